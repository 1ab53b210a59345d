"""Fixed-size qubit primitives: Pauli decomposition, SU(2) exponentials,
adjoint (Bloch-sphere) rotations and the 2x2 Hermitian eigenproblem.

Conventions
-----------
* A traceless Hermitian 2x2 matrix ``M`` is identified with the real vector
  ``m`` such that ``M = m . sigma``; ``m_k = Tr(sigma_k M) / 2``.
* ``adjoint_rotation(U)[i, j] = Tr(sigma_i U sigma_j U^dagger) / 2`` so that
  ``U (v . sigma) U^dagger = (O v) . sigma``.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from .errors import PreconditionError

__all__ = [
    "SIGMA",
    "I2",
    "PreconditionError",
    "HERMITIAN_TOL",
    "UNITARY_TOL",
    "TRACE_TOL",
    "pauli_decompose",
    "pauli_compose",
    "su2_exp",
    "adjoint_rotation",
    "omega_frame",
    "bloch_direction",
    "eig_hermitian2",
    "is_unitary",
]

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
SIGMA.setflags(write=False)

# Default precondition tolerances (absolute, scaled by max(1, max|entry|)).
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12
TRACE_TOL = 1e-12


def _as_matrix2(M: ArrayLike) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.shape != (2, 2):
        raise PreconditionError(f"expected a 2x2 matrix, got shape {M.shape}")
    return M


def _scale(M: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(M))))


def _check_hermitian(M: np.ndarray, tol: float) -> None:
    resid = float(np.max(np.abs(M - M.conj().T)))
    if resid > tol * _scale(M):
        raise PreconditionError(
            f"matrix is not Hermitian: max|M - M^dagger| = {resid:.3e} > {tol:.1e}"
        )


def _check_unitary(U: np.ndarray, tol: float) -> None:
    resid = float(np.max(np.abs(U.conj().T @ U - I2)))
    if resid > tol:
        raise PreconditionError(
            f"matrix is not unitary: max|U^dagger U - 1| = {resid:.3e} > {tol:.1e}"
        )


def is_unitary(U: ArrayLike, tol: float = UNITARY_TOL) -> bool:
    U = _as_matrix2(U)
    return bool(np.max(np.abs(U.conj().T @ U - I2)) <= tol)


def pauli_decompose(
    M: ArrayLike,
    hermitian_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
) -> np.ndarray:
    """Return the real 3-vector ``m`` with ``M = m . sigma``.

    ``M`` must be Hermitian and traceless; the check is made against the
    given tolerances (scaled by the entry magnitude for the Hermitian test).
    """
    M = _as_matrix2(M)
    _check_hermitian(M, hermitian_tol)
    tr = abs(complex(np.trace(M)))
    if tr > trace_tol * _scale(M):
        raise PreconditionError(
            f"matrix is not traceless: |Tr M| = {tr:.3e} > {trace_tol:.1e}"
        )
    return np.array(
        [
            ((M[0, 1] + M[1, 0]) / 2).real,
            ((M[1, 0] - M[0, 1]) / 2).imag,
            ((M[0, 0] - M[1, 1]) / 2).real,
        ]
    )


def pauli_compose(m: ArrayLike) -> np.ndarray:
    """Return ``m . sigma``."""
    x, y, z = np.asarray(m, dtype=float)
    return np.array([[z, x - 1j * y], [x + 1j * y, -z]], dtype=complex)


def su2_exp(a: ArrayLike, scale: float = 1.0) -> np.ndarray:
    """``exp(-i * scale * a . sigma)`` via the closed SU(2) form.

    ``cos(scale |a|) 1 - i sin(scale |a|) a_hat . sigma``; the ``a = 0`` limit
    is taken through ``sin(x)/x`` so no direction is ever formed.
    """
    a = np.asarray(a, dtype=float)
    norm = float(np.linalg.norm(a))
    angle = scale * norm
    # sin(scale*|a|)/|a| = scale * sinc(angle)
    k = scale * np.sinc(angle / np.pi)
    return np.cos(angle) * I2 - 1j * k * pauli_compose(a)


def adjoint_rotation(U: ArrayLike, tol: float = UNITARY_TOL) -> np.ndarray:
    """Rotation matrix ``O_ij = Tr(sigma_i U sigma_j U^dagger) / 2``."""
    U = _as_matrix2(U)
    _check_unitary(U, tol)
    Ud = U.conj().T
    # conj[j] = U sigma_j U^dagger; O[i, j] = Tr(sigma_i conj[j]) / 2
    conj = np.einsum("ab,jbc,cd->jad", U, SIGMA, Ud)
    O = 0.5 * np.einsum("iab,jba->ij", SIGMA, conj)
    return O.real.copy()


def omega_frame(theta: float, phi: float) -> np.ndarray:
    """Unitary whose columns are the +1 / -1 eigenvectors of ``sigma . n``,
    ``n = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))``."""
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]], dtype=complex
    )


def bloch_direction(n: ArrayLike) -> tuple[float, float]:
    """Polar and azimuthal angles ``(theta, phi)`` of a unit vector."""
    x, y, z = np.asarray(n, dtype=float)
    return float(np.arctan2(np.hypot(x, y), z)), float(np.arctan2(y, x))


def _fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    for comp in v:
        if abs(comp) > tol:
            return v * (abs(comp) / comp)
    return v


def eig_hermitian2(
    H: ArrayLike, hermitian_tol: float = HERMITIAN_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a 2x2 Hermitian matrix.

    Returns ``(evals, V)`` with ``evals`` descending and eigenvectors in the
    columns of ``V``. Each column is phased so its first non-negligible
    component is real positive. A multiple of the identity yields ``V = 1``.
    """
    H = _as_matrix2(H)
    _check_hermitian(H, hermitian_tol)
    H = (H + H.conj().T) / 2
    h = pauli_decompose(H - np.trace(H).real / 2 * I2, hermitian_tol=np.inf)
    mean = np.trace(H).real / 2
    radius = float(np.linalg.norm(h))
    evals = np.array([mean + radius, mean - radius])
    if radius <= 1e-15 * _scale(H):
        return np.array([mean, mean]), I2.copy()
    _, vecs = np.linalg.eigh(H)
    vecs = vecs[:, ::-1]
    V = np.column_stack([_fix_phase(vecs[:, 0]), _fix_phase(vecs[:, 1])])
    return evals, V
