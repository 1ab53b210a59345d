import math
import warnings

import numpy as np
import pytest

from helpers import random_instance, random_probe, unit
from su2qfi import (
    ConvergenceWarning,
    HamiltonianSpec,
    ParamPoint,
    ProbeState,
    SeriesConvergenceError,
    m_vectors,
    qfi,
)
from su2qfi import oracle
from su2qfi.hamiltonian import alpha_at, jacobian_at
from su2qfi.pauli import I2, pauli_compose, su2_exp


def test_unitary_examples():
    spec = HamiltonianSpec.linear_custom([[0, 0, 1]])
    assert np.allclose(oracle.unitary_of(spec, ParamPoint([1.0], 0.0)), I2)
    assert np.allclose(oracle.unitary_of(spec, ParamPoint([1.0], np.pi)), -I2, atol=1e-15)
    rng = np.random.default_rng(31)
    for _ in range(50):
        s, p = random_instance(rng)
        U = oracle.unitary_of(s, p)
        assert np.allclose(U.conj().T @ U, I2, atol=1e-13)


def test_generators_hermitian_traceless_and_conjugate():
    rng = np.random.default_rng(32)
    for _ in range(50):
        spec, p = random_instance(rng)
        U = oracle.unitary_of(spec, p)
        for i in range(spec.n):
            M = oracle.m_matrix_fd(spec, p, i)
            K = oracle.k_matrix_fd(spec, p, i)
            W = oracle.m_matrix_wilcox(spec, p, i)
            for G, tol in ((M, 1e-10), (K, 1e-10), (W, 1e-12)):
                assert np.allclose(G.matrix, G.matrix.conj().T, atol=tol)
                assert abs(np.trace(G.matrix)) < max(tol, 1e-9)
            assert np.allclose(K.matrix, U @ M.matrix @ U.conj().T, atol=1e-9)


def test_fd_examples():
    spec = HamiltonianSpec.angle_axis()
    p = ParamPoint([1.1, 0.7, 2.0], 1.4)
    ahat = jacobian_at(spec, p)[:, 0]
    assert np.allclose(oracle.m_vector_fd(spec, p, 0, 1e-5), p.t * ahat, atol=1e-8)
    # parameter that alpha does not depend on
    flat = HamiltonianSpec.linear_custom([[1, 0, 0], [0, 0, 0]], alpha0=[0, 0.5, 0])
    assert np.allclose(oracle.m_matrix_fd(flat, ParamPoint([0.3, 0.2], 1), 1).matrix, 0, atol=1e-10)
    with pytest.raises(ValueError):
        oracle.m_matrix_fd(spec, p, 0, 0.0)


def test_fd_vs_wilcox():
    rng = np.random.default_rng(33)
    for _ in range(200):
        spec, p = random_instance(rng)
        for i in range(spec.n):
            assert np.max(np.abs(oracle.m_vector_fd(spec, p, i) - oracle.m_vector_wilcox(spec, p, i))) < 1e-6


def test_wilcox_examples():
    spec = HamiltonianSpec.angle_axis(params=("r",), theta=0.4, phi=1.2)
    p = ParamPoint([1.7], 0.0)
    assert not np.any(oracle.m_vector_wilcox(spec, p, 0))
    # direction fixed, magnitude varying: only the first term survives
    p = ParamPoint([1.7], 1.3)
    ahat = alpha_at(spec, p) / 1.7
    assert np.allclose(oracle.m_vector_wilcox(spec, p, 0), 1.3 * ahat, atol=1e-14)
    with pytest.raises(ValueError):
        oracle.m_vector_wilcox(spec, p, 0, 1)


def test_rotation_integrand_matches_unitary():
    rng = np.random.default_rng(34)
    for _ in range(100):
        alpha, s, t = rng.normal(size=3), rng.uniform(), rng.uniform(0, 3)
        assert np.allclose(oracle.rotation_integrand(alpha, s, t), oracle.wilcox_rotation(alpha, s, t), atol=1e-12)
    assert np.array_equal(oracle.rotation_integrand([0, 0, 0], 0.3, 1.0), np.eye(3))


def test_series_commuting_case_terminates():
    spec = HamiltonianSpec.angle_axis(params=("r",), theta=0.4, phi=1.2)
    p = ParamPoint([1.5], 2.0)
    dH = pauli_compose(jacobian_at(spec, p)[:, 0])
    for n in (1, 5, 30):
        assert np.allclose(oracle.h_series(spec, p, 0, n).matrix, p.t * dH, atol=1e-14)


def test_series_matches_quadrature_at_unit_argument():
    rng = np.random.default_rng(35)
    for _ in range(50):
        spec, p = random_instance(rng, "angle-axis")
        p = p.replace(t=1.0 / p.theta[0])  # |alpha| t = 1
        for i in range(3):
            assert np.allclose(oracle.h_series(spec, p, i, 30).m, oracle.m_vector_wilcox(spec, p, i), atol=1e-12)


def test_series_error_decays_factorially():
    spec = HamiltonianSpec.angle_axis()
    p = ParamPoint([1.0, 0.8, 0.3], 2.0)
    exact = m_vectors(spec, p).vectors[1]
    ns = np.arange(4, 20, 2)
    errs = np.array([np.max(np.abs(oracle.h_series(spec, p, 1, int(n)).m - exact)) for n in ns])
    # the first omitted term t (2|alpha|t)^n / (n+1)! |d alpha| bounds the error
    bound = np.array([p.t * (2 * 2.0) ** n / math.factorial(n + 1) for n in ns])
    assert np.all(errs <= 2 * bound)
    assert np.all(np.diff(np.log(errs)) < np.diff(np.log(bound)) + 0.5)


def test_series_truncation_tail_bound():
    # at |alpha| t <= 3 the 30-term series sits within twice the first omitted term
    rng = np.random.default_rng(36)
    for _ in range(300):
        spec, p = random_instance(rng, max_alpha_t=3.0)
        at = np.linalg.norm(alpha_at(spec, p)) * p.t
        for i in range(spec.n):
            tail = p.t * np.linalg.norm(jacobian_at(spec, p)[:, i]) * (2 * at) ** 30 / math.factorial(31)
            dev = np.max(np.abs(oracle.h_series(spec, p, i, 30).m - oracle.m_vector_wilcox(spec, p, i)))
            assert dev <= 2 * tail + 1e-14


def test_series_guard():
    spec = HamiltonianSpec.angle_axis()
    p = ParamPoint([5.0, 0.8, 0.3], 3.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        with pytest.raises(SeriesConvergenceError):
            oracle.h_series(spec, p, 0, 30)
    assert np.allclose(oracle.h_series(spec, p, 0, 120).m, m_vectors(spec, p).vectors[0], atol=1e-8)


def test_sld_examples():
    rng = np.random.default_rng(37)
    spec, p = random_instance(rng, "angle-axis")
    U = oracle.unitary_of(spec, p)
    K = oracle.k_matrix_fd(spec, p, 1)
    assert not np.any(oracle.sld_matrix(K, ProbeState(0.5, 0.5, (0, 0, 1)), U).matrix)
    pure = ProbeState.pure(unit(rng))
    L = oracle.sld_matrix(K, pure, U)
    W = U @ pure.eigenbasis()
    Ke = W.conj().T @ K.matrix @ W
    assert np.allclose(L.eigen_elements, [[0, 2j * Ke[0, 1]], [-2j * Ke[1, 0], 0]])


def test_sld_solves_defining_equation():
    rng = np.random.default_rng(38)
    for _ in range(50):
        spec, p = random_instance(rng)
        probe = random_probe(rng, "mixed")
        rho0 = probe.density()
        U = oracle.unitary_of(spec, p)
        rho = U @ rho0 @ U.conj().T
        for i in range(spec.n):
            L = oracle.sld_matrix(oracle.k_matrix_fd(spec, p, i), probe, U).matrix
            h = 1e-5
            e = np.zeros(spec.n)
            e[i] = h
            Up = oracle.unitary_of(spec, p.replace(theta=p.vector + e))
            Um = oracle.unitary_of(spec, p.replace(theta=p.vector - e))
            drho = (Up @ rho0 @ Up.conj().T - Um @ rho0 @ Um.conj().T) / (2 * h)
            assert np.max(np.abs(drho - 0.5 * (L @ rho + rho @ L))) < 1e-8


def test_qfi_sld_matches_closed_form():
    rng = np.random.default_rng(39)
    for _ in range(50):
        spec, p = random_instance(rng)
        probe = random_probe(rng, "mixed")
        U = oracle.unitary_of(spec, p)
        Ls = [oracle.sld_matrix(oracle.k_matrix_fd(spec, p, i), probe, U) for i in range(spec.n)]
        F = oracle.qfi_sld(Ls, U @ probe.density() @ U.conj().T).matrix
        assert np.allclose(F, qfi(spec, p, probe).matrix, atol=1e-7)


def test_eigenbasis_and_covariance_examples():
    rng = np.random.default_rng(40)
    spec, p = random_instance(rng, "angle-axis")
    Ms = [oracle.m_matrix_wilcox(spec, p, i) for i in range(3)]
    Hs = [-M.matrix for M in Ms]
    zero = ProbeState(0.5, 0.5, (0, 0, 1))
    assert np.allclose(oracle.qfi_eigenbasis(Ms, zero).matrix, 0)
    assert np.allclose(oracle.qfi_covariance(Hs, zero).matrix, oracle.qfi_eigenbasis(Ms, zero).matrix, atol=1e-12)
    # pure probe: F = 4 cov_0(H_i, H_j)
    pure = ProbeState.pure(unit(rng))
    v = pure.eigenbasis()[:, 0]
    cov = np.array([[0.5 * (v.conj() @ (Hi @ Hj + Hj @ Hi) @ v).real - (v.conj() @ Hi @ v).real
                     * (v.conj() @ Hj @ v).real for Hj in Hs] for Hi in Hs])
    assert np.allclose(oracle.qfi_covariance(Hs, pure).matrix, 4 * cov, atol=1e-12)
    # z probe reproduces 4 (p0-p1)^2 [m_i.m_j - m_iz m_jz]
    zp = ProbeState.from_bloch(0.75, (0, 0, 1))
    m = m_vectors(spec, p).vectors
    expected = 4 * zp.weight * (m @ m.T - np.outer(m[:, 2], m[:, 2]))
    assert np.allclose(oracle.qfi_eigenbasis(Ms, zp).matrix, expected, atol=1e-12)


def test_formulas_agree_in_higher_dimension():
    # the eigenbasis and covariance forms are not qubit specific
    rng = np.random.default_rng(41)
    d = 4
    p = rng.dirichlet(np.ones(d))
    V, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    Hs = []
    for _ in range(3):
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        Hs.append(A + A.conj().T)
    eig = oracle.qfi_eigenbasis([-H for H in Hs], (p, V)).matrix
    cov = oracle.qfi_covariance(Hs, (p, V)).matrix
    assert np.allclose(eig, cov, atol=1e-10)


def test_single_max_search_perpendicular():
    rng = np.random.default_rng(42)
    m = rng.normal(size=3)
    assert np.isclose(oracle.single_max_search(m, 100, rng, perpendicular=True), 4 * m @ m)
    assert oracle.single_max_search([0, 0, 0], 10, rng) == 0


def test_su2_exp_used_by_oracles_is_consistent():
    alpha = np.array([0.3, -0.2, 0.9])
    assert np.allclose(oracle.unitary_of(HamiltonianSpec.linear_custom([alpha]), ParamPoint([1.0], 0.8)),
                       su2_exp(alpha, 0.8))
