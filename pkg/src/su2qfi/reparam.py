"""Transfer matrices between parametrizations of the same unitary.

If ``alpha = f(beta)`` then ``S[k, l] = d alpha_k / d beta_l`` and

    F_beta = S^T F_alpha S,        m_beta_l = sum_k m_alpha_k S[k, l].

The worked example is the coset chart
``U(eta, gamma, xi) = exp(-i gamma (sin(xi) sx + cos(xi) sy)/2) exp(-i eta sz/2)``
mapped onto the angle-axis coordinates ``(r, theta, phi)`` at time ``t``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .engine import MVectorSet, QfiMatrix
from .errors import BranchSingularError, DimensionError, DomainError, DomainWarning
from .hamiltonian import COSET_POLE_TOL, coset_components, default_step
from .pauli import su2_exp

__all__ = [
    "TransferMatrix",
    "ParameterMap",
    "IdentityMap",
    "LinearMap",
    "CosetToCanonical",
    "ComposedMap",
    "MapEvaluationError",
    "transfer_from_map",
    "transform_qfi",
    "transform_m_vectors",
    "canonical_from_coset",
    "coset_from_canonical",
    "coset_unitary",
    "coset_m_vectors",
    "canonical_unitary",
]


class MapEvaluationError(RuntimeError):
    """The parameter map failed while building a transfer matrix."""

    def __init__(self, message: str, coordinate: int):
        super().__init__(message)
        self.coordinate = coordinate


@dataclass(frozen=True)
class TransferMatrix:
    """``S[k, l] = d alpha_k / d beta_l`` at ``point`` (a beta value)."""

    S: np.ndarray
    source_names: tuple[str, ...]
    target_names: tuple[str, ...]
    point: tuple[float, ...] = ()

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim != 2:
            raise DimensionError(f"transfer matrix must be 2-D, got shape {S.shape}")
        if S.shape != (len(self.source_names), len(self.target_names)):
            raise DimensionError(
                f"transfer matrix shape {S.shape} does not match "
                f"{len(self.source_names)} source x {len(self.target_names)} target names"
            )
        S.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "source_names", tuple(self.source_names))
        object.__setattr__(self, "target_names", tuple(self.target_names))
        object.__setattr__(self, "point", tuple(float(v) for v in self.point))

    def __matmul__(self, other: TransferMatrix) -> TransferMatrix:
        """Chain rule: ``(alpha <- beta) @ (beta <- gamma)``."""
        if self.S.shape[1] != other.S.shape[0]:
            raise DimensionError(f"cannot compose {self.S.shape} with {other.S.shape}")
        return TransferMatrix(self.S @ other.S, self.source_names, other.target_names, other.point)


class ParameterMap:
    """A map ``beta -> alpha``. Subclasses may override :meth:`jacobian`;
    returning ``None`` selects central differences."""

    source_names: tuple[str, ...]
    target_names: tuple[str, ...]

    def __call__(self, beta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, beta: np.ndarray) -> np.ndarray | None:
        return None


class _CallableMap(ParameterMap):
    def __init__(self, fn, source_names, target_names, jacobian=None):
        self.fn = fn
        self.source_names = tuple(source_names)
        self.target_names = tuple(target_names)
        self._jac = jacobian

    def __call__(self, beta):
        return np.asarray(self.fn(beta), dtype=float)

    def jacobian(self, beta):
        return None if self._jac is None else np.asarray(self._jac(beta), dtype=float)


class IdentityMap(ParameterMap):
    def __init__(self, names: Sequence[str]):
        self.source_names = self.target_names = tuple(names)

    def __call__(self, beta):
        return np.array(beta, dtype=float)

    def jacobian(self, beta):
        return np.eye(len(self.source_names))


class LinearMap(ParameterMap):
    """``alpha = A beta + b``."""

    def __init__(self, A: ArrayLike, source_names: Sequence[str], target_names: Sequence[str],
                 offset: ArrayLike | None = None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.source_names = tuple(source_names)
        self.target_names = tuple(target_names)
        if self.A.shape != (len(self.source_names), len(self.target_names)):
            raise DimensionError(
                f"matrix shape {self.A.shape} does not match {len(self.source_names)} outputs "
                f"x {len(self.target_names)} inputs"
            )
        self.offset = np.zeros(self.A.shape[0]) if offset is None else np.asarray(offset, dtype=float)
        if self.offset.shape != (self.A.shape[0],):
            raise DimensionError(f"offset must have {self.A.shape[0]} entries, got {self.offset.shape}")

    def __call__(self, beta):
        return self.A @ np.asarray(beta, dtype=float) + self.offset

    def jacobian(self, beta):
        return self.A.copy()


class CosetToCanonical(ParameterMap):
    """``(eta, gamma, xi) -> (r, theta, phi)`` at fixed evolution time ``t``."""

    source_names = ("r", "theta", "phi")
    target_names = ("eta", "gamma", "xi")

    def __init__(self, t: float, allow_pole: bool = False):
        if not t > 0:
            raise DomainError(f"coset map needs t > 0, got {t}")
        self.t = float(t)
        self.allow_pole = allow_pole

    def __call__(self, beta):
        return np.array(canonical_from_coset(*beta, self.t, allow_pole=self.allow_pole))

    def jacobian(self, beta):
        return _coset_canonical_jacobian(*beta, self.t)


class ComposedMap(ParameterMap):
    """``outer(inner(beta))``."""

    def __init__(self, outer: ParameterMap, inner: ParameterMap):
        if len(outer.target_names) != len(inner.source_names):
            raise DimensionError(
                f"outer map takes {len(outer.target_names)} inputs, inner produces {len(inner.source_names)}"
            )
        self.outer = outer
        self.inner = inner
        self.source_names = outer.source_names
        self.target_names = inner.target_names

    def __call__(self, beta):
        return self.outer(self.inner(beta))

    def jacobian(self, beta):
        Ji = self.inner.jacobian(np.asarray(beta, dtype=float))
        Jo = self.outer.jacobian(self.inner(beta))
        if Ji is None or Jo is None:
            return None
        return Jo @ Ji


def _as_map(f) -> ParameterMap:
    if isinstance(f, ParameterMap):
        return f
    if callable(f):
        return _CallableMap(f, (), ())
    raise TypeError(f"expected a ParameterMap or callable, got {type(f).__name__}")


def transfer_from_map(
    f: ParameterMap | Callable[[np.ndarray], ArrayLike],
    beta: ArrayLike,
    step: float | None = None,
    numeric: bool = False,
) -> TransferMatrix:
    """Jacobian ``S = d alpha / d beta`` of the map at ``beta``.

    The map's analytic Jacobian is used when available (unless ``numeric``);
    otherwise central differences with ``step`` or :func:`default_step`.
    """
    pmap = _as_map(f)
    beta = np.asarray(beta, dtype=float)
    S = None if numeric else pmap.jacobian(beta)
    if S is None:
        steps = default_step(beta) if step is None else np.full(beta.shape, float(step))
        cols = []
        for i, h in enumerate(steps):
            e = np.zeros_like(beta)
            e[i] = h
            try:
                up, dn = pmap(beta + e), pmap(beta - e)
            except Exception as exc:
                raise MapEvaluationError(
                    f"map evaluation failed while differencing coordinate {i}: {exc}", i
                ) from exc
            cols.append((np.asarray(up, float) - np.asarray(dn, float)) / (2 * h))
        S = np.column_stack(cols)
    src = pmap.source_names or tuple(f"alpha{k + 1}" for k in range(S.shape[0]))
    tgt = pmap.target_names or tuple(f"beta{l + 1}" for l in range(S.shape[1]))
    return TransferMatrix(S, src, tgt, tuple(beta))


def transform_qfi(F_alpha: QfiMatrix, S: TransferMatrix) -> QfiMatrix:
    """``F_beta = S^T F_alpha S``."""
    if F_alpha.matrix.shape[0] != S.S.shape[0]:
        raise DimensionError(
            f"QFI is {F_alpha.matrix.shape[0]}x{F_alpha.matrix.shape[0]} but S has {S.S.shape[0]} rows"
        )
    F = S.S.T @ F_alpha.matrix @ S.S
    return QfiMatrix((F + F.T) / 2, S.target_names)


def transform_m_vectors(m_alpha: MVectorSet, S: TransferMatrix) -> MVectorSet:
    """``m_beta_l = sum_k m_alpha_k S[k, l]``."""
    if m_alpha.n != S.S.shape[0]:
        raise DimensionError(f"{m_alpha.n} m-vectors but S has {S.S.shape[0]} rows")
    return MVectorSet(S.S.T @ m_alpha.vectors, S.target_names, S.point, m_alpha.t)


# -- coset chart ---------------------------------------------------------


def coset_unitary(eta: float, gamma: float, xi: float) -> np.ndarray:
    """``exp(-i gamma (sin(xi) sx + cos(xi) sy)/2) exp(-i eta sz/2)`` as a matrix product."""
    outer = su2_exp((np.sin(xi), np.cos(xi), 0.0), gamma / 2)
    inner = su2_exp((0.0, 0.0, 1.0), eta / 2)
    return outer @ inner


def canonical_unitary(r: float, theta: float, phi: float, t: float) -> np.ndarray:
    axis = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    return su2_exp(r * axis, t)


def canonical_from_coset(
    eta: float, gamma: float, xi: float, t: float, allow_pole: bool = False
) -> tuple[float, float, float]:
    """Angle-axis coordinates ``(r, theta, phi)`` reproducing the coset unitary.

    With ``U = c0 1 - i u . sigma``: ``r t = arccos(c0)`` in ``[0, pi]``,
    ``theta = atan2(|sin(gamma/2)|, cos(gamma/2) sin(eta/2))`` and
    ``phi = atan2(s cos(xi + eta/2), s sin(xi + eta/2))`` with ``s = sin(gamma/2)``,
    i.e. the quadrant of ``arctan(cot(xi + eta/2))`` is read off the signs of
    ``u_x, u_y``.

    Within ``1e-9`` of ``sin(gamma/2) = 0`` the azimuth is ill-defined:
    :class:`BranchSingularError` is raised unless ``allow_pole``, in which case
    the limit ``gamma -> 0+`` is returned with a :class:`DomainWarning`. The
    identity (``gamma = eta = 0``) maps to ``(0, 0, 0)``.
    """
    if not t > 0:
        raise DomainError(f"coset map needs t > 0, got {t}")
    c0, u, _, _ = coset_components(eta, gamma, xi)
    sin_rt = float(np.linalg.norm(u))
    rt = float(np.arctan2(sin_rt, c0))
    S = np.sin(gamma / 2)
    w = xi + eta / 2
    if abs(S) < COSET_POLE_TOL:
        if sin_rt < COSET_POLE_TOL and c0 > 0:
            # identity element; axis conventionally z, phi = 0
            limits = {"r": rt / t, "theta": 0.0, "phi": 0.0}
        else:
            limits = {
                "r": rt / t,
                "theta": 0.0 if np.cos(gamma / 2) * np.sin(eta / 2) >= 0 else np.pi,
                "phi": float(np.arctan2(np.cos(w), np.sin(w))),
            }
        if not allow_pole:
            raise BranchSingularError(
                f"coset point (eta={eta}, gamma={gamma}, xi={xi}) lies on the theta in {{0, pi}} "
                "pole of the angle-axis chart; phi is undefined there",
                "phi",
                limits,
            )
        warnings.warn("coset point on the angle-axis pole; returning limiting values", DomainWarning,
                      stacklevel=2)
        return limits["r"], limits["theta"], limits["phi"]
    theta = float(np.arctan2(abs(S), np.cos(gamma / 2) * np.sin(eta / 2)))
    phi = float(np.arctan2(S * np.cos(w), S * np.sin(w)))
    return rt / t, theta, phi


# Kept under the name used by the interface contract.
coset_from_canonical = canonical_from_coset


def _coset_canonical_jacobian(eta: float, gamma: float, xi: float, t: float) -> np.ndarray:
    """Analytic ``d(r, theta, phi) / d(eta, gamma, xi)``."""
    C, S = np.cos(gamma / 2), np.sin(gamma / 2)
    c, s = np.cos(eta / 2), np.sin(eta / 2)
    u2 = 1 - (C * c) ** 2
    if abs(S) < COSET_POLE_TOL or u2 <= 0:
        raise BranchSingularError(
            f"transfer matrix is singular at coset point (eta={eta}, gamma={gamma}, xi={xi})", "theta"
        )
    u = np.sqrt(u2)
    sgn = np.sign(S)
    return np.array(
        [
            [C * s / (2 * u * t), S * c / (2 * u * t), 0.0],
            [-abs(S) * C * c / (2 * u2), sgn * s / (2 * u2), 0.0],
            [-0.5, 0.0, -1.0],
        ]
    )


def coset_m_vectors(eta: float, gamma: float, xi: float) -> MVectorSet:
    """Closed-form coset m-vectors, with ``G = xi + eta``::

        m_eta   = (0, 0, 1) / 2
        m_gamma = (sin G, cos G, 0) / 2
        m_xi    = sin(gamma/2) (cos(gamma/2) cos G, -cos(gamma/2) sin G, sin(gamma/2))
    """
    G = xi + eta
    C, S = np.cos(gamma / 2), np.sin(gamma / 2)
    vecs = np.array(
        [
            [0.0, 0.0, 0.5],
            [0.5 * np.sin(G), 0.5 * np.cos(G), 0.0],
            [S * C * np.cos(G), -S * C * np.sin(G), S * S],
        ]
    )
    return MVectorSet(vecs, ("eta", "gamma", "xi"), (eta, gamma, xi), None)
