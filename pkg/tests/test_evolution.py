import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctoa.analytic import eigenfunction, normalize
from ctoa.evolution import (
    EvolutionTrace,
    FourierState,
    PlaneWaveBasis,
    classify_density,
    evolve,
    moment_matrices,
    moments,
    origin_density_ratio,
    project,
    reconstruct,
    trace,
)
from ctoa.kernel import PhysicalParams
from ctoa.quadrature import GridFunction, gauss_legendre, rescale


def _bump(p, rule, shift=0.2):
    # smooth, vanishing with all derivatives at the walls, off-centre so <q> != 0
    q = rule.nodes / p.l
    return GridFunction(rule, np.exp(-1.0 / (1 - q * q + 1e-300)) * np.exp(3j * q) * (1 + shift * q))


def test_basis_orthonormal_and_boundary_condition():
    p = PhysicalParams(l=1.7, gamma=0.4)
    b = PlaneWaveBasis(p, 12)
    rule = rescale(gauss_legendre(120), p.l)
    F = b.functions(rule.nodes)
    G = F.conj().T @ (rule.weights[:, None] * F)
    assert np.max(np.abs(G - np.eye(b.size))) < 1e-13
    left, right = b.functions([-p.l])[0], b.functions([p.l])[0]
    assert np.allclose(left, np.exp(-2j * p.gamma) * right, atol=1e-14)


def test_basis_rejects_negative_K():
    with pytest.raises(ValueError):
        PlaneWaveBasis(PhysicalParams(), -1)


@pytest.mark.parametrize("l", [0.5, 1.0, 2.3])
@pytest.mark.parametrize("gamma", [0.0, 0.3, math.pi / 2])
def test_moment_matrices_match_quadrature(l, gamma):
    p = PhysicalParams(l=l, gamma=gamma)
    b = PlaneWaveBasis(p, 20)
    rule = rescale(gauss_legendre(200), l)
    F = b.functions(rule.nodes)
    w = rule.weights[:, None]
    Qq = F.conj().T @ (w * rule.nodes[:, None] * F)
    Q2q = F.conj().T @ (w * rule.nodes[:, None] ** 2 * F)
    Q, Q2 = moment_matrices(b)
    assert np.max(np.abs(Q - Qq)) < 1e-8
    assert np.max(np.abs(Q2 - Q2q)) < 1e-8


def test_moment_matrices_hermitian_and_read_only():
    Q, Q2 = moment_matrices(PlaneWaveBasis(PhysicalParams(), 15))
    assert np.array_equal(Q, Q.conj().T)
    assert np.array_equal(Q2, Q2.conj().T)
    assert np.min(np.linalg.eigvalsh(Q2)) > 0
    with pytest.raises(ValueError):
        Q[0, 0] = 1.0


@pytest.mark.parametrize(
    "gamma,case", [(0.0, "periodic_even"), (0.01, "general"), (math.pi / 2, "antiperiodic_odd")]
)
def test_norm_conserved(gamma, case):
    p = PhysicalParams(gamma=gamma)
    f = normalize(eigenfunction(p, case, 3), rescale(gauss_legendre(1000), 1.0))
    s0 = project(f, PlaneWaveBasis(p, 200))
    n0 = np.vdot(s0.coeffs, s0.coeffs).real
    for t in (0.01, 0.37, 5.0, 123.4):
        st_ = evolve(s0, t)
        assert abs(np.vdot(st_.coeffs, st_.coeffs).real - n0) < 1e-10


def test_evolve_composes():
    p = PhysicalParams(gamma=0.2)
    rule = rescale(gauss_legendre(200), 1.0)
    s0 = project(_bump(p, rule), PlaneWaveBasis(p, 40))
    a = evolve(evolve(s0, 0.3), 0.7)
    b = evolve(s0, 0.7)
    assert a.time == b.time == 0.7
    assert np.allclose(a.coeffs, b.coeffs, atol=1e-14)
    assert np.allclose(evolve(b, 0.0).coeffs, s0.coeffs, atol=1e-14)


def test_project_reconstruct_round_trip():
    p = PhysicalParams(gamma=0.7)
    rule = rescale(gauss_legendre(400), 1.0)
    basis = PlaneWaveBasis(p, 60)
    c = np.array([1.0, 1j]) @ np.random.default_rng(2).normal(size=(2, basis.size))
    c[np.abs(basis.modes) > 25] = 0.0
    f = GridFunction(rule, basis.functions(rule.nodes) @ c)
    s = project(f, basis)
    assert s.captured_norm == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(s.coeffs - c)) < 1e-12
    assert (reconstruct(s, rule) - f).norm() < 1e-12 * f.norm()


def test_project_validation():
    p = PhysicalParams()
    with pytest.raises(ValueError):
        project(GridFunction(rescale(gauss_legendre(50), 1.0), np.ones(50)), PlaneWaveBasis(p, 20))
    with pytest.raises(ValueError):
        project(GridFunction(rescale(gauss_legendre(100), 2.0), np.ones(100)), PlaneWaveBasis(p, 20))


def test_trace_matches_direct_quadrature_of_reconstruction():
    p = PhysicalParams(gamma=0.3)
    rule = rescale(gauss_legendre(400), 1.0)
    f = _bump(p, rule)
    tr = trace(p, f, 60, 0.5, 0.05)
    s0 = project(f, PlaneWaveBasis(p, 60))
    for i in (0, 3, 10):
        psi = reconstruct(evolve(s0, tr.times[i]), rule)
        rho = np.abs(psi.values) ** 2
        nrm = rule.integrate(rho)
        m1 = rule.integrate(rule.nodes * rho) / nrm
        m2 = rule.integrate(rule.nodes**2 * rho) / nrm
        assert abs(tr.mean[i] - m1) < 1e-12
        assert abs(tr.variance[i] - (m2 - m1 * m1)) < 1e-12
        assert moments(evolve(s0, tr.times[i]))[0] == pytest.approx(tr.mean[i], abs=1e-13)


def test_trace_chunking_is_seamless():
    p = PhysicalParams()
    rule = rescale(gauss_legendre(200), 1.0)
    tr = trace(p, _bump(p, rule), 30, 0.5, 1e-4)
    assert len(tr.times) == 5001
    s0 = project(_bump(p, rule), PlaneWaveBasis(p, 30))
    for i in (2047, 2048, 2049, 5000):
        assert moments(evolve(s0, tr.times[i]))[1] == pytest.approx(tr.variance[i], abs=1e-13)


def test_trace_argument_checks_and_interpolation():
    p = PhysicalParams()
    rule = rescale(gauss_legendre(200), 1.0)
    with pytest.raises(ValueError):
        trace(p, _bump(p, rule), 10, 1.0, 0.0)
    tr = EvolutionTrace(np.array([0.0, 1.0]), np.array([0.0, 2.0]), np.array([1.0, 3.0]), 1.0, 1.0)
    assert tr.at(0.25) == (0.5, 1.5)
    assert tr.minimum() == (0.0, 1.0)
    with pytest.raises(ValueError):
        tr.at(1.5)


def test_mirror_symmetric_state_keeps_zero_mean():
    p = PhysicalParams()
    f = normalize(eigenfunction(p, "periodic_even", 2), rescale(gauss_legendre(800), 1.0))
    tr = trace(p, f, 200, 0.1, 1e-3)
    assert np.max(np.abs(tr.mean)) < 1e-12


@pytest.mark.parametrize(
    "gamma,case", [(0.0, "periodic_even"), (0.0, "periodic_odd"), (math.pi / 2, "antiperiodic_odd")]
)
def test_minimum_variance_decreases_with_n(gamma, case):
    p = PhysicalParams(gamma=gamma)
    rule = rescale(gauss_legendre(1000), 1.0)
    mins = []
    for n in range(1, 7):
        ef = eigenfunction(p, case, n)
        tr = trace(p, normalize(ef, rule), 200, 2 * ef.tau, 1e-3)
        mins.append(tr.minimum()[1])
    assert np.all(np.diff(mins) < 0), mins


@settings(max_examples=30, deadline=None)
@given(
    coeffs=st.lists(
        st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
        min_size=11,
        max_size=11,
    ),
    t=st.floats(0, 50),
    gamma=st.floats(-1.5, math.pi / 2),
)
def test_variance_non_negative_and_norm_preserved(coeffs, t, gamma):
    c = np.array(coeffs, dtype=complex)
    if np.vdot(c, c).real < 1e-6:
        return
    s = FourierState(PlaneWaveBasis(PhysicalParams(gamma=gamma), 5), c)
    e = evolve(s, t)
    assert abs(np.vdot(e.coeffs, e.coeffs).real - np.vdot(c, c).real) <= 1e-10 * np.vdot(c, c).real
    m1, var = moments(e)
    assert -1.0 <= m1 <= 1.0
    assert var >= -1e-12


def test_basis_function_projects_to_unit_coefficient():
    p = PhysicalParams(gamma=0.3)
    basis = PlaneWaveBasis(p, 20)
    rule = rescale(gauss_legendre(200), 1.0)
    s = project(GridFunction(rule, basis.functions(rule.nodes)[:, basis.K]), basis)
    others = np.delete(s.coeffs, basis.K)
    assert abs(s.coeffs[basis.K] - 1.0) < 1e-12 and np.max(np.abs(others)) < 1e-12


def test_momentum_eigenstate_is_stationary():
    p = PhysicalParams(l=1.5, gamma=0.2)
    basis = PlaneWaveBasis(p, 10)
    c = np.zeros(basis.size, complex)
    c[basis.K + 3] = 1.0
    s = FourierState(basis, c)
    for t in (0.0, 0.7, 12.0):
        m, v = moments(evolve(s, t))
        assert abs(m) < 1e-15 and abs(v - p.l**2 / 3) < 1e-14
        assert abs(abs(evolve(s, t).coeffs[basis.K + 3]) - 1.0) < 1e-15


def test_periodic_even_ground_state_capture():
    p = PhysicalParams()
    rule = rescale(gauss_legendre(2000), 1.0)
    f = normalize(eigenfunction(p, "periodic_even", 1), rule)
    s = project(f, PlaneWaveBasis(p, 200))
    assert s.captured_norm > 1 - 1e-6
    # Parseval: the squared reconstruction error is exactly the norm left out
    err2 = (reconstruct(s, rule) - f).norm() ** 2
    assert abs(err2 - (1 - s.captured_norm)) < 1e-10


@pytest.mark.parametrize(
    "gamma,case", [(math.pi / 2, "antiperiodic_odd"), (0.0, "periodic_even"), (0.4, "general")]
)
def test_coefficient_tail_follows_endpoint_jumps(gamma, case):
    # g = exp(-i gamma q / l) phi extended periodically; integrating by parts twice gives
    # b_k ~ (-1)^k [i dg / w + dg' / w^2] / sqrt(2l), w = k pi / l, with dg, dg' the
    # jumps of g and g' across the wall. Special families have dg = 0 and a k^-2 tail.
    p = PhysicalParams(l=1.3, gamma=gamma)
    rule = rescale(gauss_legendre(2000), p.l)
    ef = eigenfunction(p, case, 1)
    f = normalize(ef, rule)
    scale = f.values[0] / ef(rule.nodes[0])
    l, h = p.l, 1e-6

    def g(q):
        return ef(q) * scale * np.exp(-1j * gamma * q / l)

    dg = g(l) - g(-l)
    dgp = (g(l) - g(l - h)) / h - (g(-l + h) - g(-l)) / h
    if case != "general":
        assert abs(dg) < 1e-10
    basis = PlaneWaveBasis(p, 200)
    s = project(f, basis)
    for k in (150, 200):
        w = k * math.pi / l
        want = (-1) ** k * (1j * dg / w + dgp / w**2) / math.sqrt(2 * l)
        got = s.coeffs[basis.modes == k][0]
        assert abs(got - want) < 2e-2 * abs(want)


@pytest.mark.parametrize(
    "gamma,case", [(0.0, "periodic_even"), (0.3, "general"), (math.pi / 2, "antiperiodic_odd")]
)
def test_time_reversed_state_retraces_backwards(gamma, case):
    # Theta maps the gamma domain onto the -gamma domain
    p = PhysicalParams(gamma=gamma)
    rule = rescale(gauss_legendre(1000), 1.0)
    f = normalize(eigenfunction(p, case, 2), rule)
    s = project(f, PlaneWaveBasis(p, 150))
    sr = project(GridFunction(rule, np.conj(f.values)), PlaneWaveBasis(p.with_gamma(-gamma), 150))
    for t in (0.01, 0.05, 0.2):
        a, b = moments(evolve(sr, t)), moments(evolve(s, -t))
        assert abs(a[0] - b[0]) < 1e-10 and abs(a[1] - b[1]) < 1e-10


@pytest.mark.parametrize(
    "gamma,case,n", [(0.0, "periodic_even", 3), (math.pi / 2, "antiperiodic_odd", 5)]
)
def test_variance_dips_once(gamma, case, n):
    p = PhysicalParams(gamma=gamma)
    ef = eigenfunction(p, case, n)
    tr = trace(p, normalize(ef, rescale(gauss_legendre(2000), 1.0)), 200, 2 * ef.tau, 1e-4)
    i = int(np.argmin(tr.variance))
    assert 0 < i < len(tr.times) - 1
    assert np.all(np.diff(tr.variance[: i + 1]) < 0)
    assert np.all(np.diff(tr.variance[i:]) > 0)


@pytest.mark.parametrize(
    "gamma,case,n,want",
    [
        (0.0, "periodic_even", 3, "non-nodal"),
        (0.0, "periodic_odd", 2, "nodal"),
        (math.pi / 2, "antiperiodic_even", 2, "non-nodal"),
        (math.pi / 2, "antiperiodic_odd", 3, "nodal"),
        (0.01, "general", 3, "nodal"),
        (0.01, "general", 4, "non-nodal"),
    ],
)
def test_density_at_minimum_variance(gamma, case, n, want):
    p = PhysicalParams(gamma=gamma)
    ef = eigenfunction(p, case, n)
    f = normalize(ef, rescale(gauss_legendre(2000), 1.0))
    tr = trace(p, f, 200, 2 * ef.tau, 1e-4)
    s = evolve(project(f, PlaneWaveBasis(p, 200)), tr.minimum()[0])
    assert classify_density(s, rescale(gauss_legendre(1201), 1.0)) == want


def test_origin_density_ratio_bounds():
    p = PhysicalParams()
    basis = PlaneWaveBasis(p, 3)
    rule = rescale(gauss_legendre(50), 1.0)
    c = np.zeros(basis.size, complex)
    c[basis.K] = 1.0
    assert origin_density_ratio(FourierState(basis, c), rule) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        origin_density_ratio(FourierState(basis, np.zeros(basis.size, complex)), rule)
