"""Brute-force reference routes for every closed-form quantity.

None of these call the closed-form m-vector code in :mod:`su2qfi.engine`:

* generators ``M = i U^dagger dU`` and ``K = i dU U^dagger`` by central
  differences of the unitary;
* Wilcox's integral ``dU = int_0^1 e^{-isHt} (-it dH) e^{-i(1-s)Ht} ds`` by
  fixed-order Gauss-Legendre quadrature, either on matrices or through the
  Bloch rotation of ``V(s) = e^{-i(1-s)Ht}``;
* the nested-commutator series ``i sum_n (it)^(n+1)/(n+1)! ad_H^n(dH)``;
* SLD operators and the eigenbasis / covariance QFI formulas, written for
  general dimension.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import factorial
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from .engine import ProbeState, QfiMatrix
from .errors import ConvergenceWarning, SeriesConvergenceError
from .hamiltonian import HamiltonianSpec, ParamPoint, alpha_at, jacobian_at
from .pauli import adjoint_rotation, pauli_compose, pauli_decompose, su2_exp

__all__ = [
    "GeneratorMatrix",
    "SldMatrix",
    "unitary_of",
    "fd_step",
    "m_matrix_fd",
    "k_matrix_fd",
    "m_vector_fd",
    "rotation_integrand",
    "wilcox_rotation",
    "m_vector_wilcox",
    "m_matrix_wilcox",
    "h_series",
    "sld_matrix",
    "qfi_eigenbasis",
    "qfi_covariance",
    "qfi_sld",
    "single_max_search",
    "QUADRATURE_ORDER",
    "FD_RESIDUAL_WARN",
]

QUADRATURE_ORDER = 32
FD_RESIDUAL_WARN = 1e-6
SERIES_GUARD_ARG = 10.0
SERIES_GUARD_TERMS = 60


@dataclass(frozen=True)
class GeneratorMatrix:
    """Hermitian generator for one parameter.

    ``flavor`` is ``"M"`` (``i U^dagger dU``) or ``"K"`` (``i dU U^dagger``).
    ``residual`` is the anti-Hermitian part removed by symmetrization (zero
    for routes that are Hermitian by construction).
    """

    matrix: np.ndarray
    index: int
    flavor: str = "M"
    residual: float = 0.0
    warning: str | None = None

    @property
    def m(self) -> np.ndarray:
        return pauli_decompose(self.matrix, hermitian_tol=1e-10, trace_tol=1e-10)


@dataclass(frozen=True)
class SldMatrix:
    """SLD operator in the computational basis plus its elements in the
    eigenbasis ``U |phi_a>`` of the evolved state."""

    matrix: np.ndarray
    index: int
    eigen_elements: np.ndarray


def unitary_of(spec: HamiltonianSpec, p: ParamPoint) -> np.ndarray:
    """``U = exp(-i alpha(theta) . sigma t)``."""
    return su2_exp(alpha_at(spec, p), p.t)


def fd_step(theta_i: float) -> float:
    return 1e-5 * max(1.0, abs(theta_i))


def _du_fd(spec: HamiltonianSpec, p: ParamPoint, i: int, h: float | None):
    theta = p.vector
    h = fd_step(theta[i]) if h is None else h
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    e = np.zeros_like(theta)
    e[i] = h
    up = unitary_of(spec, p.replace(theta=theta + e))
    dn = unitary_of(spec, p.replace(theta=theta - e))
    return (up - dn) / (2 * h)


def _hermitize(A: np.ndarray, index: int, flavor: str) -> GeneratorMatrix:
    anti = float(np.max(np.abs(A - A.conj().T))) / 2
    msg = None
    if anti > FD_RESIDUAL_WARN:
        msg = f"anti-Hermitian residual {anti:.3e} exceeds {FD_RESIDUAL_WARN:.0e}"
        warnings.warn(msg, ConvergenceWarning, stacklevel=3)
    return GeneratorMatrix((A + A.conj().T) / 2, index, flavor, anti, msg)


def m_matrix_fd(spec: HamiltonianSpec, p: ParamPoint, i: int, h: float | None = None) -> GeneratorMatrix:
    """``M_i = i U^dagger dU/dtheta_i`` with a central-difference derivative."""
    U = unitary_of(spec, p)
    return _hermitize(1j * U.conj().T @ _du_fd(spec, p, i, h), i, "M")


def k_matrix_fd(spec: HamiltonianSpec, p: ParamPoint, i: int, h: float | None = None) -> GeneratorMatrix:
    """``K_i = i (dU/dtheta_i) U^dagger`` with a central-difference derivative."""
    U = unitary_of(spec, p)
    return _hermitize(1j * _du_fd(spec, p, i, h) @ U.conj().T, i, "K")


def m_vector_fd(spec: HamiltonianSpec, p: ParamPoint, i: int, h: float | None = None) -> np.ndarray:
    return m_matrix_fd(spec, p, i, h).m


# -- Wilcox quadrature ---------------------------------------------------


def _gauss_legendre01(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 2:
        raise ValueError(f"quadrature order must be >= 2, got {order}")
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1) / 2, w / 2


def rotation_integrand(alpha: ArrayLike, s: float, t: float) -> np.ndarray:
    """Analytic ``O_lk(s)`` for ``V(s) = exp(-i (1-s) t alpha . sigma)``::

        O_lk = cos(2 tau) d_kl - sin(2 tau) eps_ktl a_t + 2 sin^2(tau) a_k a_l

    with ``tau = (1-s)|alpha| t`` and ``a = alpha / |alpha|``.
    """
    alpha = np.asarray(alpha, dtype=float)
    norm = np.linalg.norm(alpha)
    tau = (1 - s) * norm * t
    if norm == 0:
        return np.eye(3)
    a = alpha / norm
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1
    # eps_ktl a_t indexed [l, k]
    cross = np.einsum("ktl,t->lk", eps, a)
    return np.cos(2 * tau) * np.eye(3) - np.sin(2 * tau) * cross + 2 * np.sin(tau) ** 2 * np.outer(a, a)


def wilcox_rotation(alpha: ArrayLike, s: float, t: float) -> np.ndarray:
    """``O(s) = adjoint_rotation(V(s))`` computed from the unitary itself."""
    return adjoint_rotation(su2_exp(alpha, (1 - s) * t))


def m_vector_wilcox(
    spec: HamiltonianSpec, p: ParamPoint, i: int, quadrature_order: int = QUADRATURE_ORDER
) -> np.ndarray:
    """``[m_i]_k = t sum_l (d alpha_l / d theta_i) int_0^1 O_lk(s) ds``."""
    nodes, weights = _gauss_legendre01(quadrature_order)
    alpha = alpha_at(spec, p)
    dalpha = jacobian_at(spec, p)[:, i]
    integral = sum(w * wilcox_rotation(alpha, s, p.t) for s, w in zip(nodes, weights))
    return p.t * integral.T @ dalpha


def m_matrix_wilcox(
    spec: HamiltonianSpec, p: ParamPoint, i: int, quadrature_order: int = QUADRATURE_ORDER
) -> GeneratorMatrix:
    """``M_i = t int_0^1 V(s)^dagger dH V(s) ds`` as a matrix quadrature."""
    nodes, weights = _gauss_legendre01(quadrature_order)
    alpha = alpha_at(spec, p)
    dH = pauli_compose(jacobian_at(spec, p)[:, i])
    M = np.zeros((2, 2), dtype=complex)
    for s, w in zip(nodes, weights):
        V = su2_exp(alpha, (1 - s) * p.t)
        M += w * (V.conj().T @ dH @ V)
    M *= p.t
    return GeneratorMatrix((M + M.conj().T) / 2, i, "M")


# -- commutator series ---------------------------------------------------


def h_series(spec: HamiltonianSpec, p: ParamPoint, i: int, n_terms: int = 30) -> GeneratorMatrix:
    """Truncated series ``H_i = i sum_{n < n_terms} (it)^(n+1)/(n+1)! ad_H^n(dH)``.

    The returned generator is ``-H_i``, which equals ``M_i`` in the limit.
    Arguments ``|alpha| t > 10`` with fewer than 60 terms are refused.
    """
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    alpha = alpha_at(spec, p)
    arg = float(np.linalg.norm(alpha)) * p.t
    if arg > SERIES_GUARD_ARG and n_terms < SERIES_GUARD_TERMS:
        msg = (
            f"series refused: |alpha| t = {arg:.3g} > {SERIES_GUARD_ARG:g} "
            f"needs at least {SERIES_GUARD_TERMS} terms, got {n_terms}"
        )
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
        raise SeriesConvergenceError(msg)
    H = pauli_compose(alpha)
    term = pauli_compose(jacobian_at(spec, p)[:, i])
    total = np.zeros((2, 2), dtype=complex)
    for n in range(n_terms):
        total += (1j * p.t) ** (n + 1) / factorial(n + 1) * term
        term = H @ term - term @ H
    series = 1j * total
    return GeneratorMatrix(-(series + series.conj().T) / 2, i, "M")


# -- SLD and QFI formulas -----------------------------------------------


def _spectral(probe) -> tuple[np.ndarray, np.ndarray]:
    """``(p, V)``: eigenvalues and eigenvector columns of the probe."""
    if isinstance(probe, ProbeState):
        return probe.probabilities, probe.eigenbasis()
    p, V = probe
    return np.asarray(p, dtype=float), np.asarray(V, dtype=complex)


def _matrices(gens: Sequence) -> list[np.ndarray]:
    return [g.matrix if isinstance(g, GeneratorMatrix) else np.asarray(g, dtype=complex) for g in gens]


def _names(n: int, names) -> tuple[str, ...]:
    return tuple(names) if names is not None else tuple(f"theta{i + 1}" for i in range(n))


def sld_matrix(K: GeneratorMatrix | ArrayLike, probe, U: ArrayLike) -> SldMatrix:
    """SLD ``(L)_ab = 2i (p_a - p_b)/(p_a + p_b) (K)_ab`` in the basis ``U |phi_a>``.

    Pairs with ``p_a + p_b = 0`` lie outside the support and are set to zero.
    """
    index = K.index if isinstance(K, GeneratorMatrix) else 0
    Kmat = _matrices([K])[0]
    p, V = _spectral(probe)
    W = np.asarray(U, dtype=complex) @ V
    Ke = W.conj().T @ Kmat @ W
    psum = p[:, None] + p[None, :]
    pdiff = p[:, None] - p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(psum > 0, 2j * pdiff / np.where(psum > 0, psum, 1.0), 0.0)
    Le = factor * Ke
    return SldMatrix(W @ Le @ W.conj().T, index, Le)


def qfi_eigenbasis(M_list: Sequence, probe, names=None) -> QfiMatrix:
    """``F_ij = sum_{a != b} 2 (p_a - p_b)^2/(p_a + p_b) (M_i)_ab (M_j)_ba``
    with elements in the eigenbasis of the initial state."""
    p, V = _spectral(probe)
    Ms = [V.conj().T @ M @ V for M in _matrices(M_list)]
    d = len(p)
    weight = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            if a != b and p[a] + p[b] > 0:
                weight[a, b] = 2 * (p[a] - p[b]) ** 2 / (p[a] + p[b])
    n = len(Ms)
    F = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            F[i, j] = np.real(np.sum(weight * Ms[i] * Ms[j].T))
    return QfiMatrix((F + F.T) / 2, _names(n, names))


def qfi_covariance(H_list: Sequence, probe, names=None) -> QfiMatrix:
    """Covariance form::

        F_ij = sum_a 4 p_a cov_a(H_i, H_j)
               - sum_{a != b} 8 p_a p_b/(p_a + p_b) Re(<a|H_i|b><b|H_j|a>)
    """
    p, V = _spectral(probe)
    Hs = [V.conj().T @ H @ V for H in _matrices(H_list)]
    d = len(p)
    n = len(Hs)
    F = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            Hi, Hj = Hs[i], Hs[j]
            anti = Hi @ Hj + Hj @ Hi
            total = 0.0
            for a in range(d):
                cov = 0.5 * anti[a, a].real - (Hi[a, a] * Hj[a, a]).real
                total += 4 * p[a] * cov
            for a in range(d):
                for b in range(d):
                    if a != b and p[a] + p[b] > 0:
                        total -= 8 * p[a] * p[b] / (p[a] + p[b]) * (Hi[a, b] * Hj[b, a]).real
            F[i, j] = total
    return QfiMatrix((F + F.T) / 2, _names(n, names))


def qfi_sld(L_list: Sequence[SldMatrix], rho: ArrayLike, names=None) -> QfiMatrix:
    """``F_ij = Tr(rho {L_i, L_j}) / 2`` from explicit SLD operators."""
    rho = np.asarray(rho, dtype=complex)
    Ls = [L.matrix if isinstance(L, SldMatrix) else np.asarray(L, dtype=complex) for L in L_list]
    n = len(Ls)
    F = np.array(
        [[0.5 * np.trace(rho @ (Ls[i] @ Ls[j] + Ls[j] @ Ls[i])).real for j in range(n)] for i in range(n)]
    )
    return QfiMatrix(F, _names(n, names))


def single_max_search(
    m_theta: ArrayLike,
    n_samples: int = 10_000,
    rng: np.random.Generator | None = None,
    perpendicular: bool = False,
) -> float:
    """Monte-Carlo maximum of the single-parameter QFI over random pure probes.

    With ``perpendicular=True`` probes are drawn uniformly from the great
    circle orthogonal to ``m_theta``.
    """
    rng = np.random.default_rng() if rng is None else rng
    m = np.asarray(m_theta, dtype=float)
    n = rng.normal(size=(n_samples, 3))
    if perpendicular and np.any(m):
        mhat = m / np.linalg.norm(m)
        n -= np.outer(n @ mhat, mhat)
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    values = 4 * (m @ m - (n @ m) ** 2)
    return float(np.max(values))
