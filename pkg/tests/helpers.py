"""Random instance generators shared by the test modules."""

from __future__ import annotations

import numpy as np

from su2qfi import HamiltonianSpec, ParamPoint, ProbeState, alpha_at

KIND_CYCLE = ("angle-axis", "fixed-axis-field", "coset", "linear-custom")


def unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_instance(rng: np.random.Generator, kind: str | None = None, max_alpha_t: float | None = None,
                    t_max: float = 3.0) -> tuple[HamiltonianSpec, ParamPoint]:
    """A random ``(spec, point)``; ``max_alpha_t`` caps ``|alpha| t`` by resampling ``t``."""
    kind = kind or KIND_CYCLE[rng.integers(len(KIND_CYCLE))]
    if kind == "angle-axis":
        spec = HamiltonianSpec.angle_axis()
        theta = [rng.uniform(0.1, 3.0), rng.uniform(0.05, np.pi - 0.05), rng.uniform(0, 2 * np.pi)]
    elif kind == "fixed-axis-field":
        spec = HamiltonianSpec.fixed_axis_field(phi=float(rng.uniform(0, 2 * np.pi)))
        theta = [rng.uniform(0.05, np.pi - 0.05), rng.uniform(0.1, 3.0)]
    elif kind == "coset":
        spec = HamiltonianSpec.coset()
        theta = [rng.uniform(-np.pi, np.pi), rng.uniform(0.1, np.pi - 0.1), rng.uniform(0, 2 * np.pi)]
    else:
        n = int(rng.integers(1, 4))
        spec = HamiltonianSpec.linear_custom(rng.normal(size=(n, 3)), alpha0=rng.normal(size=3))
        theta = rng.uniform(-1, 1, size=n)
    lo = 0.2 if kind == "coset" else 0.0
    for _ in range(100):
        p = ParamPoint(theta, rng.uniform(lo, t_max))
        if max_alpha_t is None or np.linalg.norm(alpha_at(spec, p)) * p.t <= max_alpha_t:
            return spec, p
    # fall back to a short time that satisfies the cap
    a = np.linalg.norm(alpha_at(spec, ParamPoint(theta, 1.0)))
    return spec, ParamPoint(theta, min(t_max, 0.5 * max_alpha_t / max(a, 1e-12)))


def random_probe(rng: np.random.Generator, style: str | None = None) -> ProbeState:
    style = style or ("pure", "mixed", "near-degenerate")[rng.integers(3)]
    if style == "pure":
        return ProbeState.pure(unit(rng))
    if style == "near-degenerate":
        return ProbeState.from_bloch(0.5 + 10 ** rng.uniform(-8, -5), unit(rng))
    return ProbeState.from_bloch(rng.uniform(0.5, 1.0), unit(rng))


def rotation(rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
