"""Quantum Fisher information of SU(2) unitary processes.

Closed-form m-vector and QFI evaluation, reparametrization tools and
independent numerical oracles for cross-checking them.
"""

from .engine import (
    MVectorSet,
    ProbeState,
    QfiMatrix,
    SingularityReport,
    cramer_rao_bound,
    m_coefficients,
    m_vectors,
    precision_limit,
    probe_from_density,
    qfi,
    qfi_matrix,
    qfi_single_max,
    singular_threshold,
    singularity_report,
)
from .errors import (
    BranchSingularError,
    ConvergenceWarning,
    DimensionError,
    DomainError,
    DomainWarning,
    PreconditionError,
    SeriesConvergenceError,
    SingularFisherError,
)
from .hamiltonian import HamiltonianSpec, ParamPoint, alpha_at, jacobian_at, numeric_jacobian
from .pauli import (
    SIGMA,
    adjoint_rotation,
    bloch_direction,
    eig_hermitian2,
    omega_frame,
    pauli_compose,
    pauli_decompose,
    su2_exp,
)
from .reparam import (
    ComposedMap,
    CosetToCanonical,
    IdentityMap,
    LinearMap,
    ParameterMap,
    TransferMatrix,
    canonical_from_coset,
    coset_m_vectors,
    transfer_from_map,
    transform_m_vectors,
    transform_qfi,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HamiltonianSpec",
    "ParamPoint",
    "alpha_at",
    "jacobian_at",
    "numeric_jacobian",
    "MVectorSet",
    "ProbeState",
    "QfiMatrix",
    "SingularityReport",
    "cramer_rao_bound",
    "m_coefficients",
    "m_vectors",
    "precision_limit",
    "probe_from_density",
    "qfi",
    "qfi_matrix",
    "qfi_single_max",
    "singular_threshold",
    "singularity_report",
    "BranchSingularError",
    "ConvergenceWarning",
    "DimensionError",
    "DomainError",
    "DomainWarning",
    "PreconditionError",
    "SeriesConvergenceError",
    "SingularFisherError",
    "SIGMA",
    "adjoint_rotation",
    "bloch_direction",
    "eig_hermitian2",
    "omega_frame",
    "pauli_compose",
    "pauli_decompose",
    "su2_exp",
    "ComposedMap",
    "CosetToCanonical",
    "IdentityMap",
    "LinearMap",
    "ParameterMap",
    "TransferMatrix",
    "canonical_from_coset",
    "coset_m_vectors",
    "transfer_from_map",
    "transform_m_vectors",
    "transform_qfi",
]
