import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_kit import analytic
from casimir_kit import symplectic as sy
from casimir_kit.core import Parametric, Uniform


def test_single_mode_static_matrix():
    for t in (0.0, 3.7):
        assert np.array_equal(sy.hamiltonian_matrix(sy.SingleModeUniform(0.0), t), np.diag([np.pi ** 2, 1.0]))


def test_factorized_scaling_exact():
    form = sy.FactorizedUniform(0.4, 1)
    M0 = sy.hamiltonian_matrix(form, 0.0)
    for t in (0.5, 2.0, 9.0):
        assert np.max(np.abs(sy.hamiltonian_matrix(form, t) * (1 + 0.4 * t) - M0)) < 1e-14


def test_two_mode_coupling_signs():
    M = sy.hamiltonian_matrix(sy.TwoMode(0.5), 0.0)
    x1, x2, p1, p2 = range(4)
    # coefficient of x2 p1 in z^T M z / 2 is M[p1, x2] (half of it on each symmetric slot)
    assert M[p1, x2] == pytest.approx(4 * 0.5 / 3)
    assert M[x2, p1] == pytest.approx(4 * 0.5 / 3)
    assert M[p2, x1] == pytest.approx(-4 * 0.5 / 3)
    assert M[x1, p1] == pytest.approx(-0.25)
    assert np.array_equal(M, M.T)


def test_two_mode_is_mirror_of_law_coupling():
    P = np.diag([1.0, -1.0, 1.0, -1.0])
    for beta in (0.3, 0.9):
        A = sy.TwoMode(beta).generator
        B = sy.FactorizedUniform(beta, 2).generator
        assert np.allclose(P @ B @ P, A, atol=1e-15)


def test_law_original_symmetric_and_reduces():
    form = sy.LawOriginal(Parametric(0.2), 3)
    for t in np.linspace(0, 2, 7):
        M = sy.hamiltonian_matrix(form, t)
        assert np.array_equal(M, M.T)
    assert np.allclose(sy.hamiltonian_matrix(sy.LawOriginal(Uniform(0.0), 2), 1.0),
                       np.diag([np.pi ** 2, 4 * np.pi ** 2, 1, 1]))


def test_quarter_period_rotation():
    prop = sy.propagate(sy.SingleModeUniform(0.0), np.array([0.0, 0.5]), method="ode")
    assert np.allclose(prop.S[-1], [[0.0, 1 / np.pi], [-np.pi, 0.0]], atol=1e-10)
    exact = sy.propagate(sy.SingleModeUniform(0.0), np.array([0.0, 0.5]))
    assert np.allclose(exact.S[-1], [[0.0, 1 / np.pi], [-np.pi, 0.0]], atol=1e-13)


@pytest.mark.parametrize("method", ["exact", "ode"])
def test_flow_matches_tau_matrix(method):
    prop = sy.propagate(sy.SingleModeUniform(0.5), np.linspace(0, 2, 41), method=method)
    assert np.max(np.abs(prop.S[-1] - analytic.tau_coeffs(2.0, 0.5).as_array())) < 1e-8
    assert np.allclose(prop.S[0], np.eye(2))
    assert np.max(np.abs(np.linalg.det(prop.S) - 1)) < 1e-10


def test_photon_numbers_against_closed_form():
    t = np.linspace(0, 10, 200)
    for beta in (0.3, 0.5, 0.9):
        n = sy.photon_numbers(sy.propagate(sy.SingleModeUniform(beta), t, method="ode"))[:, 0]
        assert np.max(np.abs(n - analytic.photons_uniform(t, beta))) < 1e-6
    n = sy.photon_numbers(sy.propagate(sy.SingleModeUniform(0.5), np.array([0.0, 2.0])))
    assert n[-1, 0] == pytest.approx(5.54e-3, abs=1e-5)


def test_photon_number_trivial_cases():
    prop = sy.SymplecticPropagation(np.array([0.0]), np.eye(4)[None], np.zeros(1), "none")
    assert np.allclose(sy.photon_numbers(prop), 0)
    static = sy.propagate(sy.TwoMode(0.0), np.linspace(0, 3, 31))
    assert np.max(np.abs(sy.photon_numbers(static))) < 1e-12


def test_defect_tolerance_raises():
    with pytest.raises(sy.IntegrationError) as info:
        sy.propagate(sy.SingleModeUniform(0.5), np.linspace(0, 5, 11), method="ode", max_step=0.2,
                     defect_tol=1e-10)
    assert info.value.time is not None


def test_bad_grid():
    with pytest.raises(ValueError):
        sy.propagate(sy.SingleModeUniform(0.5), np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        sy.propagate(sy.LawOriginal(Uniform(0.5)), np.array([0.0, 1.0]), method="exact")


def test_frame_map_matches_law_original():
    grid = np.linspace(0, 2, 41)
    for n in (1, 2):
        mapped = sy.frame_map(sy.propagate(sy.FactorizedUniform(0.5, n), grid), Uniform(0.5))
        direct = sy.propagate(sy.LawOriginal(Uniform(0.5), n), grid, method="ode")
        assert np.allclose(mapped.S[0], np.eye(2 * n))
        assert np.max(np.abs(mapped.S - direct.S)) < 1e-6
        assert np.max(mapped.defect) < 1e-10


def test_frame_change_with_ermakov_amplitude():
    # z = T z' with T = [[s, 0], [s', 1/s]] turns p^2/2 + w^2 x^2/2 into diag(w^2 s^2 + s s'', 1/s^2)
    s, sd, sdd, w2 = 1.3, -0.4, 0.7, 5.0
    T = np.array([[s, 0], [sd, 1 / s]])
    T_dot = np.array([[sd, 0], [sdd, -sd / s ** 2]])
    out = sy.frame_change(np.diag([w2, 1.0]), T, T_dot)
    assert np.allclose(out, np.diag([w2 * s ** 2 + s * sdd, 1 / s ** 2]), atol=1e-14)


def test_normal_frequencies_and_instability():
    assert np.allclose(sy.normal_frequencies(np.diag([np.pi ** 2, 4 * np.pi ** 2, 1, 1])), [np.pi, 2 * np.pi])
    with pytest.raises(sy.DynamicalInstability):
        sy.normal_frequencies(np.diag([-1.0, 1.0]))


def test_energy_scaling_law():
    grid = np.linspace(0, 10, 101)
    form = sy.FactorizedUniform(0.7, 2)
    prop = sy.propagate(form, grid, method="ode")
    rng = np.random.default_rng(3)
    A = rng.normal(size=(4, 4))
    cov0 = A @ A.T + np.eye(4)
    mean0 = rng.normal(size=4)
    cov, means = prop.covariance(cov0), prop.means(mean0)
    e = np.array([(1 + 0.7 * t) * sy.energy(form.matrix(t), c, m) for t, c, m in zip(grid, cov, means)])
    assert np.max(np.abs(e - e[0])) < 1e-8


def test_heisenberg_consistency():
    grid = np.linspace(0, 1, 201)
    form = sy.LawOriginal(Uniform(0.5), 2)
    prop = sy.propagate(form, grid, method="ode")
    dS = np.gradient(prop.S, grid, axis=0, edge_order=2)
    rhs = np.stack([sy.J(2) @ form.matrix(t) @ S for t, S in zip(grid, prop.S)])
    h = grid[1] - grid[0]
    assert np.max(np.abs(dS - rhs)[1:-1]) < 50 * h ** 2 * np.max(np.abs(rhs))


def test_linear_invariant_examples():
    grid = np.linspace(0, 5, 101)
    static = sy.ConstantForm(np.diag([np.pi ** 2, 4 * np.pi ** 2, 1.0, 1.0]))
    assert sy.linear_invariant_check(static, [1, 0, 0, 0], grid) < 1e-10
    rng = np.random.default_rng(11)
    assert sy.linear_invariant_check(sy.TwoMode(0.5), rng.normal(size=4), grid) < 1e-6
    fine = np.linspace(0, 5, 2001)
    inv = sy.linear_invariant(sy.TwoMode(0.5), rng.normal(size=4), fine)
    assert inv.residual < 1e-3  # finite-difference residual of the Hamilton equations


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.09, 0.99), st.integers(1, 3))
def test_flow_is_symplectic(beta, n):
    prop = sy.propagate(sy.LawOriginal(Uniform(beta), n), np.linspace(0, 1, 11), method="ode")
    assert np.max(prop.defect) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.09, 0.99))
def test_exact_and_ode_paths_agree(beta):
    grid = np.linspace(0, 3, 7)
    a = sy.propagate(sy.TwoMode(beta), grid, method="exact")
    b = sy.propagate(sy.TwoMode(beta), grid, method="ode")
    assert np.max(np.abs(a.S - b.S)) < 1e-9 * np.max(np.abs(a.S))
