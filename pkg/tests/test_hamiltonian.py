import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_instance
from su2qfi import DimensionError, DomainError, DomainWarning, HamiltonianSpec, ParamPoint
from su2qfi.hamiltonian import alpha_at, default_step, jacobian_at, numeric_jacobian
from su2qfi.pauli import su2_exp
from su2qfi.reparam import coset_unitary


def test_alpha_examples():
    aa = HamiltonianSpec.angle_axis()
    assert np.allclose(alpha_at(aa, ParamPoint([1, np.pi / 2, 0], 1)), [1, 0, 0], atol=1e-16)
    fa = HamiltonianSpec.fixed_axis_field(phi=0.0)
    assert np.allclose(alpha_at(fa, ParamPoint([0, 2], 1)), [0, 0, 2])
    lc = HamiltonianSpec.linear_custom([[0, 0, 1]])
    assert np.array_equal(alpha_at(lc, ParamPoint([0.7], 1)), [0, 0, 0.7])


def test_jacobian_examples():
    aa = HamiltonianSpec.angle_axis()
    J = jacobian_at(aa, ParamPoint([1, np.pi / 2, 0], 1))
    assert np.allclose(J, np.column_stack([[1, 0, 0], [0, 0, -1], [0, 1, 0]]), atol=1e-15)
    th, B = 0.7, 1.9
    fa = HamiltonianSpec.fixed_axis_field(phi=0.0)
    J = jacobian_at(fa, ParamPoint([th, B], 1))
    assert np.allclose(J[:, 0], B * np.array([np.cos(th), 0, -np.sin(th)]))
    assert np.allclose(J[:, 1], [np.sin(th), 0, np.cos(th)])
    V = np.array([[1.0, 2, 3], [0, -1, 0.5]])
    lc = HamiltonianSpec.linear_custom(V, alpha0=[1, 1, 1])
    assert np.array_equal(jacobian_at(lc, ParamPoint([0.3, 0.4], 1)), V.T)


def test_fixed_axis_field_is_angle_axis_slice():
    fa = HamiltonianSpec.fixed_axis_field(phi=0.0)
    aa = HamiltonianSpec.angle_axis(params=("theta", "r"), phi=0.0)
    p = ParamPoint([0.9, 1.7], 1.3)
    assert np.array_equal(alpha_at(fa, p), alpha_at(aa, p))
    assert np.array_equal(jacobian_at(fa, p), jacobian_at(aa, p))


@pytest.mark.parametrize("kind", ["angle-axis", "fixed-axis-field", "coset"])
def test_numeric_jacobian_matches_analytic(kind):
    rng = np.random.default_rng(11)
    for _ in range(200):
        spec, p = random_instance(rng, kind)
        J = jacobian_at(spec, p)
        assert np.max(np.abs(numeric_jacobian(spec, p, 1e-5) - J)) < 1e-6
        assert np.max(np.abs(numeric_jacobian(spec, p) - J)) < 1e-8


def test_numeric_jacobian_linear_is_exact():
    spec = HamiltonianSpec.linear_custom([[0.3, -1, 2]], alpha0=[0.1, 0, 0])
    for h in (1e-1, 1e-3, 1e-6):
        assert np.allclose(numeric_jacobian(spec, ParamPoint([0.5], 1), h), jacobian_at(spec, ParamPoint([0.5], 1)),
                           atol=1e-9)


def test_numeric_jacobian_error_is_second_order():
    spec = HamiltonianSpec.angle_axis()
    p = ParamPoint([1.2, 0.8, 0.4], 1)
    J = jacobian_at(spec, p)
    hs = np.array([1e-1, 5e-2, 2.5e-2, 1.25e-2])
    errs = [np.max(np.abs(numeric_jacobian(spec, p, h) - J)) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert 1.8 < slope < 2.2


def test_default_step_scale():
    h = default_step(np.array([0.0, 10.0]))
    eps3 = np.finfo(float).eps ** (1 / 3)
    assert np.allclose(h, [eps3, 10 * eps3])


@settings(max_examples=100)
@given(st.floats(0.1, 3), st.floats(0.01, np.pi - 0.01), st.floats(0, 2 * np.pi))
def test_angle_axis_direction_derivatives_are_orthogonal(r, th, ph):
    spec = HamiltonianSpec.angle_axis()
    J = jacobian_at(spec, ParamPoint([r, th, ph], 1))
    ahat = J[:, 0]
    assert abs(ahat @ J[:, 1]) < 1e-12 and abs(ahat @ J[:, 2]) < 1e-12


def test_linear_custom_nonlinear_term():
    spec = HamiltonianSpec.linear_custom([[1, 0, 0]], nonlinear=lambda th: [0, th[0] ** 2, 0])
    J = jacobian_at(spec, ParamPoint([0.5], 1))
    assert np.allclose(J[:, 0], [1, 1.0, 0], atol=1e-9)
    with pytest.raises(ValueError):
        spec.to_dict()


def test_coset_alpha_reconstructs_unitary():
    rng = np.random.default_rng(12)
    spec = HamiltonianSpec.coset()
    for _ in range(100):
        eta, gamma, xi = rng.uniform(-np.pi, np.pi), rng.uniform(0.05, np.pi), rng.uniform(0, 2 * np.pi)
        t = rng.uniform(0.2, 3)
        alpha = alpha_at(spec, ParamPoint([eta, gamma, xi], t))
        assert np.allclose(su2_exp(alpha, t), coset_unitary(eta, gamma, xi), atol=1e-12)


def test_coset_domain_errors():
    spec = HamiltonianSpec.coset()
    with pytest.raises(DomainError):
        alpha_at(spec, ParamPoint([0.3, 0.4, 0.5], 0.0))
    with pytest.raises(DomainError):
        alpha_at(spec, ParamPoint([2 * np.pi, 0.0, 0.5], 1.0))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        alpha = alpha_at(spec, ParamPoint([0.6, 0.0, 0.5], 1.0))
    assert any(issubclass(w.category, DomainWarning) for w in caught)
    assert np.allclose(alpha, [0, 0, 0.3])


def test_validation():
    with pytest.raises(ValueError):
        HamiltonianSpec("angle-axis", ("r", "r"), {"theta": 0, "phi": 0})
    with pytest.raises(ValueError):
        HamiltonianSpec("angle-axis", ("r",))
    with pytest.raises(ValueError):
        HamiltonianSpec("nope", ("r",))
    with pytest.raises(ValueError):
        HamiltonianSpec.linear_custom([[0, 0, 0]])
    with pytest.raises(ValueError):
        HamiltonianSpec("linear-custom", ("a",), {"directions": [[1, 0]]})
    with pytest.raises(DimensionError):
        alpha_at(HamiltonianSpec.angle_axis(), ParamPoint([1, 2], 1))
    with pytest.raises(ValueError):
        ParamPoint([1.0], -1)


def test_json_roundtrip():
    for spec in (
        HamiltonianSpec.angle_axis(),
        HamiltonianSpec.fixed_axis_field(params=("theta",), B=2.0, phi=0.0),
        HamiltonianSpec.coset(),
        HamiltonianSpec.linear_custom([[1, 2, 3]], alpha0=[0.5, 0, 0], params=["g"]),
    ):
        data = json.loads(json.dumps(spec.to_dict()))
        assert HamiltonianSpec.from_dict(data) == spec


def test_param_point_replace():
    p = ParamPoint([1, 2], 0.5)
    assert p.replace(t=2.0) == ParamPoint([1, 2], 2.0)
    assert p.replace(theta=[3, 4]).theta == (3.0, 4.0)
    assert np.array_equal(p.vector, [1, 2])
