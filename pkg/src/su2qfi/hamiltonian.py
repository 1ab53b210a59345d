"""Parametrized qubit Hamiltonians ``H(theta) = alpha(theta) . sigma``.

Four kinds are supported:

``angle-axis``
    ``alpha = r (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))``;
    coordinates ``r, theta, phi``.
``fixed-axis-field``
    spin-half in a field in the x-z plane, ``alpha = B (sin(theta), 0, cos(theta))``;
    coordinates ``theta, B``.
``coset``
    the unitary ``exp(-i gamma (sin(xi) sx + cos(xi) sy) / 2) exp(-i eta sz / 2)``
    written as ``exp(-i alpha . sigma t)``; coordinates ``eta, gamma, xi``.
    Here ``alpha`` depends on ``t`` and ``t > 0`` is required.
``linear-custom``
    ``alpha = alpha0 + sum_i theta_i v_i`` (+ an optional user callable whose
    Jacobian is taken by central differences).

For the built-in kinds ``params`` selects the estimated coordinates (in
order); every other coordinate must be supplied in ``constants``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .errors import DimensionError, DomainError, DomainWarning

__all__ = [
    "KINDS",
    "COORDINATES",
    "HamiltonianSpec",
    "ParamPoint",
    "alpha_at",
    "jacobian_at",
    "numeric_jacobian",
    "default_step",
    "coset_components",
    "COSET_POLE_TOL",
]

COORDINATES: dict[str, tuple[str, ...]] = {
    "angle-axis": ("r", "theta", "phi"),
    "fixed-axis-field": ("theta", "B"),
    "coset": ("eta", "gamma", "xi"),
}
KINDS = (*COORDINATES, "linear-custom")

# Distance to the theta in {0, pi} pole of the canonical chart that gets flagged.
COSET_POLE_TOL = 1e-9


@dataclass(frozen=True)
class ParamPoint:
    """Parameter values ``theta`` (ordered as ``HamiltonianSpec.params``) and time ``t``."""

    theta: tuple[float, ...]
    t: float

    def __init__(self, theta: ArrayLike, t: float):
        object.__setattr__(self, "theta", tuple(float(v) for v in np.atleast_1d(theta)))
        object.__setattr__(self, "t", float(t))
        if self.t < 0:
            raise DomainError(f"evolution time must be >= 0, got {self.t}")

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.theta, dtype=float)

    def replace(self, theta: ArrayLike | None = None, t: float | None = None) -> ParamPoint:
        return ParamPoint(self.theta if theta is None else theta, self.t if t is None else t)


@dataclass(frozen=True)
class HamiltonianSpec:
    kind: str
    params: tuple[str, ...]
    constants: Mapping[str, Any] = field(default_factory=dict)
    nonlinear: Callable[[np.ndarray], ArrayLike] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "constants", dict(self.constants))
        if self.kind not in KINDS:
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}; expected one of {KINDS}")
        if len(self.params) < 1:
            raise ValueError("at least one estimation parameter is required")
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"parameter names must be unique: {self.params}")
        if self.kind == "linear-custom":
            self._validate_linear()
        else:
            if self.nonlinear is not None:
                raise ValueError("a nonlinear term is only allowed for linear-custom")
            coords = COORDINATES[self.kind]
            unknown = [p for p in self.params if p not in coords]
            if unknown:
                raise ValueError(f"{self.kind}: unknown parameters {unknown}; coordinates are {coords}")
            missing = [c for c in coords if c not in self.params and c not in self.constants]
            if missing:
                raise ValueError(f"{self.kind}: constants missing for fixed coordinates {missing}")

    def _validate_linear(self) -> None:
        c = self.constants
        alpha0 = np.asarray(c.get("alpha0", (0.0, 0.0, 0.0)), dtype=float)
        if alpha0.shape != (3,):
            raise ValueError(f"linear-custom: alpha0 must have 3 components, got shape {alpha0.shape}")
        if "directions" not in c:
            raise ValueError("linear-custom: constants.directions is required")
        V = np.asarray(c["directions"], dtype=float)
        if V.shape != (len(self.params), 3):
            raise ValueError(
                f"linear-custom: directions must have shape ({len(self.params)}, 3), got {V.shape}"
            )
        if self.nonlinear is None and not np.any(V):
            raise ValueError("linear-custom: at least one direction vector must be nonzero")

    @property
    def n(self) -> int:
        return len(self.params)

    # -- constructors ------------------------------------------------------

    @classmethod
    def angle_axis(cls, params: Sequence[str] = ("r", "theta", "phi"), **fixed: float) -> HamiltonianSpec:
        return cls("angle-axis", tuple(params), fixed)

    @classmethod
    def fixed_axis_field(cls, params: Sequence[str] = ("theta", "B"), **fixed: float) -> HamiltonianSpec:
        return cls("fixed-axis-field", tuple(params), fixed)

    @classmethod
    def coset(cls, params: Sequence[str] = ("eta", "gamma", "xi"), **fixed: float) -> HamiltonianSpec:
        return cls("coset", tuple(params), fixed)

    @classmethod
    def linear_custom(
        cls,
        directions: ArrayLike,
        alpha0: ArrayLike = (0.0, 0.0, 0.0),
        params: Sequence[str] | None = None,
        nonlinear: Callable[[np.ndarray], ArrayLike] | None = None,
    ) -> HamiltonianSpec:
        V = np.atleast_2d(np.asarray(directions, dtype=float))
        if params is None:
            params = tuple(f"theta{i + 1}" for i in range(V.shape[0]))
        constants = {"alpha0": [float(v) for v in np.asarray(alpha0, dtype=float)],
                     "directions": V.tolist()}
        return cls("linear-custom", tuple(params), constants, nonlinear)

    # -- JSON form ---------------------------------------------------------

    def to_dict(self) -> dict:
        if self.nonlinear is not None:
            raise ValueError("a spec with a Python nonlinear term has no JSON form")
        return {"kind": self.kind, "params": list(self.params), "constants": dict(self.constants)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> HamiltonianSpec:
        kind = data.get("kind")
        params = data.get("params")
        if params is None and kind in COORDINATES:
            params = COORDINATES[kind]
        if params is None:
            raise ValueError("params is required")
        constants = {
            k: (float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v)
            for k, v in dict(data.get("constants", {})).items()
        }
        return cls(kind, tuple(params), constants)


def _check(spec: HamiltonianSpec, p: ParamPoint) -> None:
    if len(p.theta) != spec.n:
        raise DimensionError(
            f"point has {len(p.theta)} parameter values but spec {spec.kind} has {spec.n} {spec.params}"
        )


def _coords(spec: HamiltonianSpec, p: ParamPoint) -> dict[str, float]:
    values = {k: float(v) for k, v in spec.constants.items()}
    values.update(zip(spec.params, p.theta))
    return values


# -- coset chart ---------------------------------------------------------


def coset_components(eta: float, gamma: float, xi: float):
    """Pauli components of the coset unitary, ``U = c0 1 - i u . sigma``.

    Returns ``(c0, u, dc0, du)`` with derivatives taken along
    ``(eta, gamma, xi)``: ``dc0`` has shape (3,), ``du[k, j] = d u_k / d coord_j``.
    """
    C, S = np.cos(gamma / 2), np.sin(gamma / 2)
    c, s = np.cos(eta / 2), np.sin(eta / 2)
    w = xi + eta / 2
    cw, sw = np.cos(w), np.sin(w)
    c0 = C * c
    u = np.array([S * sw, S * cw, C * s])
    dc0 = np.array([-C * s / 2, -S * c / 2, 0.0])
    du = np.array(
        [
            [S * cw / 2, C * sw / 2, S * cw],
            [-S * sw / 2, C * cw / 2, -S * sw],
            [C * c / 2, -S * s / 2, 0.0],
        ]
    )
    return c0, u, dc0, du


def _angle_over_sin(c0: float, sin_x: float) -> tuple[float, float]:
    """``g = x / sin(x)`` and ``dg/dc0`` for ``x = arccos(c0)`` in ``[0, pi)``."""
    x = float(np.arctan2(sin_x, c0))
    if x < 1e-2:
        x2 = x * x
        g = 1 + x2 / 6 + 7 * x2**2 / 360 + 31 * x2**3 / 15120 + 127 * x2**4 / 604800
        dg = -1 / 3 - 2 * x2 / 15 - 2 * x2**2 / 63 - 4 * x2**3 / 675 - 2 * x2**4 / 2079
        return g, dg
    return x / sin_x, (x * c0 - sin_x) / sin_x**3


def _coset_alpha_jac(coords: dict[str, float], t: float):
    if t <= 0:
        raise DomainError("the coset chart writes U = exp(-i alpha.sigma t) and needs t > 0")
    eta, gamma, xi = coords["eta"], coords["gamma"], coords["xi"]
    c0, u, dc0, du = coset_components(eta, gamma, xi)
    sin_x = float(np.linalg.norm(u))
    if c0 < 0 and sin_x < 1e-9:
        raise DomainError(
            f"coset point (eta={eta}, gamma={gamma}, xi={xi}) maps to U = -1, "
            "where the Hamiltonian axis is undefined"
        )
    if abs(np.sin(gamma / 2)) < COSET_POLE_TOL and sin_x > 0:
        warnings.warn(
            "coset point is at the theta in {0, pi} pole of the canonical chart; "
            "alpha is evaluated from the Cartesian inverse map",
            DomainWarning,
            stacklevel=4,
        )
    g, dg = _angle_over_sin(c0, sin_x)
    alpha = g * u / t
    jac = (np.outer(u, dg * dc0) + g * du) / t
    return alpha, jac


# -- evaluation ----------------------------------------------------------


def _alpha_jac_builtin(spec: HamiltonianSpec, p: ParamPoint):
    """``alpha`` and the full Jacobian over all coordinates of the kind."""
    c = _coords(spec, p)
    if spec.kind == "angle-axis":
        r, th, ph = c["r"], c["theta"], c["phi"]
        st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
        ahat = np.array([st * cp, st * sp, ct])
        jac = np.column_stack(
            [ahat, r * np.array([ct * cp, ct * sp, -st]), r * np.array([-st * sp, st * cp, 0.0])]
        )
        return r * ahat, jac
    if spec.kind == "fixed-axis-field":
        th, B = c["theta"], c["B"]
        st, ct = np.sin(th), np.cos(th)
        jac = np.column_stack([B * np.array([ct, 0.0, -st]), np.array([st, 0.0, ct])])
        return B * np.array([st, 0.0, ct]), jac
    if spec.kind == "coset":
        return _coset_alpha_jac(c, p.t)
    raise AssertionError(spec.kind)


def _linear_alpha(spec: HamiltonianSpec, theta: np.ndarray) -> np.ndarray:
    alpha0 = np.asarray(spec.constants.get("alpha0", (0.0, 0.0, 0.0)), dtype=float)
    V = np.asarray(spec.constants["directions"], dtype=float)
    alpha = alpha0 + theta @ V
    if spec.nonlinear is not None:
        alpha = alpha + np.asarray(spec.nonlinear(theta), dtype=float)
    return alpha


def alpha_at(spec: HamiltonianSpec, p: ParamPoint) -> np.ndarray:
    """Field vector ``alpha(theta)`` at the point."""
    _check(spec, p)
    if spec.kind == "linear-custom":
        return _linear_alpha(spec, p.vector)
    return _alpha_jac_builtin(spec, p)[0]


def jacobian_at(spec: HamiltonianSpec, p: ParamPoint) -> np.ndarray:
    """``3 x n`` matrix whose column ``i`` is ``d alpha / d theta_i``.

    Built-in kinds are analytic. For linear-custom the linear part is exact
    and only a user ``nonlinear`` term is differentiated numerically.
    """
    _check(spec, p)
    if spec.kind == "linear-custom":
        J = np.asarray(spec.constants["directions"], dtype=float).T.copy()
        if spec.nonlinear is not None:
            J += _central_differences(
                lambda th: np.asarray(spec.nonlinear(th), dtype=float), p.vector, None
            )
        return J
    _, full = _alpha_jac_builtin(spec, p)
    coords = COORDINATES[spec.kind]
    return full[:, [coords.index(name) for name in spec.params]]


def default_step(theta: np.ndarray) -> np.ndarray:
    """Per-coordinate central-difference step ``eps^(1/3) max(1, |theta_i|)``."""
    return np.finfo(float).eps ** (1 / 3) * np.maximum(1.0, np.abs(theta))


def _central_differences(f, theta: np.ndarray, step) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    steps = default_step(theta) if step is None else np.broadcast_to(np.asarray(step, float), theta.shape)
    cols = []
    for i, h in enumerate(steps):
        e = np.zeros_like(theta)
        e[i] = h
        cols.append((np.asarray(f(theta + e)) - np.asarray(f(theta - e))) / (2 * h))
    return np.column_stack(cols)


def numeric_jacobian(spec: HamiltonianSpec, p: ParamPoint, step: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of ``alpha``; ``step`` defaults to :func:`default_step`."""
    _check(spec, p)
    if step is not None and step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    return _central_differences(lambda th: alpha_at(spec, p.replace(theta=th)), p.vector, step)
