"""Closed-form m-vectors and QFI matrices for SU(2) processes.

For ``U = exp(-i alpha(theta) . sigma t)`` each parameter carries a vector
``m_i`` with ``i U^dagger dU/dtheta_i = m_i . sigma``. For a qubit probe with
eigenvalues ``p0 >= p1`` and dominant-eigenvector Bloch direction ``n``::

    F_ij = 4 (p0 - p1)^2 m_i^T (1 - n n^T) m_j
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike

from .errors import DimensionError, SingularFisherError
from .hamiltonian import HamiltonianSpec, ParamPoint, alpha_at, jacobian_at
from .pauli import (
    HERMITIAN_TOL,
    I2,
    bloch_direction,
    eig_hermitian2,
    omega_frame,
    pauli_compose,
)

__all__ = [
    "ProbeState",
    "MVectorSet",
    "QfiMatrix",
    "SingularityReport",
    "probe_from_density",
    "m_coefficients",
    "m_vectors",
    "qfi_matrix",
    "qfi",
    "qfi_single_max",
    "singular_threshold",
    "precision_limit",
    "cramer_rao_bound",
    "singularity_report",
    "SERIES_SWITCH",
    "PROBE_TOL",
]

PROBE_TOL = 1e-12
# Below this value of 2|alpha|t the m-vector coefficients use Taylor series.
SERIES_SWITCH = 1e-2
# Relative determinant cutoff for treating F as singular.
SINGULAR_RTOL = 1e-10


@dataclass(frozen=True)
class ProbeState:
    """Qubit probe ``p0 |n><n| + p1 |-n><-n|`` with ``p0 >= p1``."""

    p0: float
    p1: float
    n_hat: tuple[float, float, float]

    def __init__(self, p0: float, p1: float, n_hat: ArrayLike, tol: float = PROBE_TOL):
        n = np.asarray(n_hat, dtype=float)
        if n.shape != (3,):
            raise ValueError(f"n_hat must have 3 components, got shape {n.shape}")
        if abs(p0 + p1 - 1) > tol:
            raise ValueError(f"probabilities must sum to 1, got p0 + p1 = {p0 + p1!r}")
        if not (p0 >= p1 - tol and p1 >= -tol):
            raise ValueError(f"need p0 >= p1 >= 0, got p0={p0!r}, p1={p1!r}")
        if abs(np.linalg.norm(n) - 1) > tol:
            raise ValueError(f"n_hat must be a unit vector, |n_hat| = {np.linalg.norm(n)!r}")
        object.__setattr__(self, "p0", float(p0))
        object.__setattr__(self, "p1", float(p1))
        object.__setattr__(self, "n_hat", tuple(float(v) for v in n))

    @classmethod
    def from_bloch(cls, p0: float, direction: ArrayLike) -> ProbeState:
        """Probe with weight ``p0`` on the state along ``direction`` (normalized here).

        ``p0 < 1/2`` is accepted and re-expressed with the antipodal direction.
        """
        d = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(d)
        if norm == 0:
            raise ValueError("Bloch direction must be nonzero")
        d = d / norm
        if p0 < 0.5:
            p0, d = 1 - p0, -d
        return cls(p0, 1 - p0, d)

    @classmethod
    def pure(cls, direction: ArrayLike) -> ProbeState:
        return cls.from_bloch(1.0, direction)

    @property
    def n(self) -> np.ndarray:
        return np.array(self.n_hat)

    @property
    def weight(self) -> float:
        """``(p0 - p1)^2``."""
        return (self.p0 - self.p1) ** 2

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([self.p0, self.p1])

    def eigenbasis(self) -> np.ndarray:
        """Unitary whose columns are the eigenvectors for ``p0`` and ``p1``."""
        return omega_frame(*bloch_direction(self.n))

    def density(self) -> np.ndarray:
        proj = pauli_compose(self.n)
        return self.p0 * (I2 + proj) / 2 + self.p1 * (I2 - proj) / 2


def probe_from_density(rho0: ArrayLike, tol: float = PROBE_TOL) -> ProbeState:
    """Spectral data ``(p0, p1, n_hat)`` of a qubit density matrix.

    The maximally mixed state returns ``n_hat = z``.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2, 2):
        raise ValueError(f"density matrix must be 2x2, got shape {rho0.shape}")
    tr = complex(np.trace(rho0))
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix must have unit trace, got Tr = {tr}")
    evals, V = eig_hermitian2(rho0, hermitian_tol=HERMITIAN_TOL)
    if evals[1] < -tol or evals[0] > 1 + tol:
        raise ValueError(f"density matrix is not positive semidefinite: eigenvalues {evals}")
    p0 = float(np.clip(evals[0], 0.5, 1.0))
    a, b = V[:, 0]
    ab = np.conj(a) * b
    n = np.array([2 * ab.real, 2 * ab.imag, abs(a) ** 2 - abs(b) ** 2])
    return ProbeState(p0, 1 - p0, n / np.linalg.norm(n))


@dataclass(frozen=True)
class MVectorSet:
    """Per-parameter m-vectors; ``vectors[i]`` belongs to ``names[i]``."""

    vectors: np.ndarray
    names: tuple[str, ...]
    theta: tuple[float, ...] | None = None
    t: float | None = None

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float).reshape(-1, 3)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) != v.shape[0]:
            raise DimensionError(f"{v.shape[0]} vectors but {len(self.names)} names")

    @property
    def n(self) -> int:
        return len(self.names)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.vectors[self.names.index(name)]


@dataclass(frozen=True)
class QfiMatrix:
    matrix: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        F = np.array(self.matrix, dtype=float)
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise DimensionError(f"QFI matrix must be square, got shape {F.shape}")
        if len(self.names) != F.shape[0]:
            raise DimensionError(f"{F.shape[0]}x{F.shape[0]} matrix but {len(self.names)} names")
        F.setflags(write=False)
        object.__setattr__(self, "matrix", F)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        F = self.matrix
        return bool(np.max(np.abs(F - F.T), initial=0.0) <= tol * max(1.0, np.max(np.abs(F), initial=0.0)))

    def is_psd(self, rtol: float = 1e-10) -> bool:
        w = np.linalg.eigvalsh(self.matrix)
        return bool(w[0] >= -rtol * max(w[-1], 1.0))


def m_coefficients(a: float, t: float) -> tuple[float, float, float]:
    """Scalar weights ``(c1, c2, c3)`` such that

    ``m = c1 dalpha - c2 (alpha x dalpha) + c3 (alpha . dalpha) alpha``

    with ``x = 2 a t``: ``c1 = sin(x)/(2a)``, ``c2 = (1 - cos x)/(2a^2)``,
    ``c3 = (x - sin x)/(2a^3)``. Small ``x`` uses the Taylor expansions, so
    ``a -> 0`` gives ``m -> t dalpha``.
    """
    x = 2 * a * t
    if x < SERIES_SWITCH:
        x2 = x * x
        c1 = t * (1 - x2 / 6 + x2**2 / 120 - x2**3 / 5040 + x2**4 / 362880)
        c2 = t**2 * (1 - x2 / 12 + x2**2 / 360 - x2**3 / 20160 + x2**4 / 1814400)
        c3 = t**3 * (2 / 3 - x2 / 30 + x2**2 / 1260 - x2**3 / 90720 + x2**4 / 9979200)
        return c1, c2, c3
    return np.sin(x) / (2 * a), (1 - np.cos(x)) / (2 * a * a), (x - np.sin(x)) / (2 * a**3)


def m_vectors(spec: HamiltonianSpec, p: ParamPoint) -> MVectorSet:
    """Closed-form m-vectors of ``exp(-i alpha(theta) . sigma t)`` at ``p``."""
    alpha = alpha_at(spec, p)
    J = jacobian_at(spec, p)
    c1, c2, c3 = m_coefficients(float(np.linalg.norm(alpha)), p.t)
    dalpha = J.T  # (n, 3)
    m = c1 * dalpha - c2 * np.cross(alpha, dalpha) + c3 * np.outer(dalpha @ alpha, alpha)
    return MVectorSet(m, spec.params, p.theta, p.t)


def _as_vectors(m: MVectorSet | ArrayLike) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(m, MVectorSet):
        return m.vectors, m.names
    v = np.asarray(m, dtype=float).reshape(-1, 3)
    return v, tuple(f"theta{i + 1}" for i in range(v.shape[0]))


def qfi_matrix(m: MVectorSet | ArrayLike, probe: ProbeState) -> QfiMatrix:
    """``F = 4 (p0 - p1)^2 (P m)(P m)^T`` with ``P = 1 - n n^T``."""
    vecs, names = _as_vectors(m)
    n = probe.n
    perp = vecs - np.outer(vecs @ n, n)
    return QfiMatrix(4 * probe.weight * (perp @ perp.T), names)


def qfi(spec: HamiltonianSpec, p: ParamPoint, probe: ProbeState) -> QfiMatrix:
    """QFI at a point; a degenerate probe short-circuits to zero."""
    if probe.p0 == probe.p1:
        return QfiMatrix(np.zeros((spec.n, spec.n)), spec.params)
    return qfi_matrix(m_vectors(spec, p), probe)


def qfi_single_max(m_theta: ArrayLike) -> float:
    """Largest single-parameter QFI over all probes, ``4 |m|^2``.

    It is reached by any pure probe whose Bloch vector is orthogonal to ``m``.
    """
    m = np.asarray(m_theta, dtype=float)
    return float(4 * m @ m)


def _matrix_of(F: QfiMatrix | ArrayLike) -> np.ndarray:
    return F.matrix if isinstance(F, QfiMatrix) else np.atleast_2d(np.asarray(F, dtype=float))


def singular_threshold(F: QfiMatrix | ArrayLike, rtol: float = SINGULAR_RTOL) -> float:
    """Determinant cutoff ``rtol * prod_i max(F_ii, 1)``."""
    M = _matrix_of(F)
    return float(rtol * np.prod(np.maximum(np.diag(M), 1.0)))


def _inverse(F: QfiMatrix | ArrayLike, rtol: float) -> np.ndarray:
    M = _matrix_of(F)
    det = float(np.linalg.det(M))
    if not det > singular_threshold(M, rtol):
        w, v = np.linalg.eigh(M)
        raise SingularFisherError(det, v[:, 0])
    return np.linalg.inv(M)


def precision_limit(F: QfiMatrix | ArrayLike, rtol: float = SINGULAR_RTOL) -> float:
    """Total precision limit ``Tr F^-1``; raises :class:`SingularFisherError`."""
    return float(np.trace(_inverse(F, rtol)))


def cramer_rao_bound(F: QfiMatrix | ArrayLike, N: int = 1, rtol: float = SINGULAR_RTOL) -> np.ndarray:
    """Per-parameter bound ``sqrt((F^-1)_ii / N)`` for ``N`` repetitions."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    return np.sqrt(np.diag(_inverse(F, rtol)) / N)


@dataclass(frozen=True)
class SingularityReport:
    det: float
    singular: bool
    qfi_rank: int
    gram_rank: int
    n_in_span: dict[tuple[str, str], bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "det": self.det,
            "singular": self.singular,
            "qfi_rank": self.qfi_rank,
            "gram_rank": self.gram_rank,
            "n_hat_in_span": [
                {"pair": list(pair), "in_span": flag} for pair, flag in self.n_in_span.items()
            ],
        }


def _rank(A: np.ndarray, rtol: float) -> int:
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def singularity_report(
    m: MVectorSet | ArrayLike,
    probe: ProbeState,
    rtol: float = 1e-10,
) -> SingularityReport:
    """Diagnose why ``F`` may be singular.

    Reports the rank of the m-vector Gram matrix (linear dependence) and, for
    each parameter pair, whether ``n_hat`` lies in the span of their m-vectors.
    """
    vecs, names = _as_vectors(m)
    F = qfi_matrix(vecs, probe).matrix
    det = float(np.linalg.det(F))
    n = probe.n
    flags = {}
    for i, j in combinations(range(len(names)), 2):
        basis = vecs[[i, j]]
        scale = np.max(np.linalg.norm(basis, axis=1))
        if scale == 0:
            flags[(names[i], names[j])] = False
            continue
        coef, *_ = np.linalg.lstsq(basis.T, n, rcond=None)
        resid = float(np.linalg.norm(basis.T @ coef - n))
        flags[(names[i], names[j])] = bool(resid <= 1e-8)
    gram_rank = _rank(vecs @ vecs.T, rtol) if len(names) else 0
    qfi_rank = _rank(F, rtol)
    singular = bool(det <= singular_threshold(F) or qfi_rank < len(names))
    return SingularityReport(det, singular, qfi_rank, gram_rank, flags)
