"""Acceptance gate: one test per criterion, each at its stated tolerance."""

import time

import numpy as np
import pytest

from casimir_kit import analytic, ermakov, fock, twomode
from casimir_kit import symplectic as sy
from casimir_kit.core import Parametric, Uniform

PI = np.pi
GRID = np.linspace(0.0, 10.0, 200)

# two-mode photon ceilings at beta = 0.9 over t in [0, 20] (401 samples), fixed from the symplectic
# oracle before any Fock run: max_t n_1 and max_t n_2
TWO_MODE_CEILING = (0.03853481, 0.01753315)


def test_criterion_01_triple_oracle(gate):
    start = time.perf_counter()
    worst_sym = worst_fock = 0.0
    lad = fock.build_ladder(40)
    for beta in (0.3, 0.5, 0.9):
        exact = analytic.photons_uniform(GRID, beta)
        n_sym = sy.photon_numbers(sy.propagate(sy.SingleModeUniform(beta), GRID, method="ode"))[:, 0]
        n_fock = fock.photon_numbers(fock.evolve(fock.vacuum(lad), sy.SingleModeUniform(beta), GRID, lad))[:, 0]
        worst_sym = max(worst_sym, float(np.max(np.abs(n_sym - exact))))
        worst_fock = max(worst_fock, float(np.max(np.abs(n_fock - exact))))
    elapsed = time.perf_counter() - start
    ok = worst_sym < 1e-6 and worst_fock < 1e-4 and elapsed < 10
    gate(1, "triple oracle", ok, f"sym {worst_sym:.2e} (<1e-6), fock {worst_fock:.2e} (<1e-4), {elapsed:.1f} s (<10)")
    assert worst_sym < 1e-6
    assert worst_fock < 1e-4
    assert elapsed < 10


def test_criterion_02_light_speed_bound(gate):
    t = np.linspace(0.0, 50.0, 200001)
    peak = float(np.max(analytic.photons_uniform(t, 1.0)))
    ok = 0.0255 <= peak <= 0.0265
    gate(2, "amplitude at beta=1", ok, f"max n = {peak:.6f} in [0.0255, 0.0265]")
    assert ok
    assert peak == pytest.approx(1 / (4 * PI ** 2 - 1), rel=1e-9)


def test_criterion_03_eigenfrequency(gate):
    ratio = analytic.eigenfrequency(1, 1.0) / PI
    ok = abs(ratio - 0.98734) <= 1e-5
    gate(3, "Omega(1)/omega_1(0)", ok, f"{ratio:.10f} vs 0.98734 +/- 1e-5 (exact sqrt(1 - 1/4pi^2))")
    assert ratio == pytest.approx(0.98734, abs=1e-5)


def test_criterion_04_planck_identity(gate):
    worst = max(float(np.max(np.abs(analytic.photons_uniform(GRID, b) - analytic.photons_planck_form(GRID, b))))
                for b in (0.3, 0.5, 0.9))
    gate(4, "Planck-form identity", worst < 1e-12, f"{worst:.2e} (<1e-12)")
    assert worst < 1e-12


def test_criterion_05_parametric_resonance(gate):
    eps = 0.15
    drive = 2 * PI
    start = time.perf_counter()
    # whole drive periods t = 1..8 plus a dense grid for the in-period micromotion
    grid = np.linspace(0.0, 8.0, 161)
    lad = fock.build_ladder(80)
    traj = fock.evolve(fock.vacuum(lad), sy.LawSingleModeLadder(Parametric(eps, drive)), grid, lad)
    n = fock.photon_numbers(traj)[:, 0]
    elapsed = time.perf_counter() - start
    law = np.sinh(eps * PI * grid / 2) ** 2
    strobe = np.isclose(grid % 1.0, 0.0) & (grid >= 1)
    rel = np.abs(n[strobe] / law[strobe] - 1)
    window = grid >= 1
    dense = float(np.max(np.abs(n[window] / law[window] - 1)))
    ok = rel.max() < 0.10 and elapsed < 60 and traj.max_norm_drift < 1e-8
    gate(5, "parametric resonance (D=80)", ok,
         f"max rel err {rel.max():.3f} at t=1..8 (<0.10), in-period {dense:.3f}, "
         f"drift {traj.max_norm_drift:.1e}, {elapsed:.1f} s (<60)")
    assert strobe.sum() == 8
    assert rel.max() < 0.10
    assert traj.max_norm_drift < 1e-8
    assert elapsed < 60


def test_criterion_06_diagonalization(gate):
    worst_eta = worst_closed = worst_mode = 0.0
    for beta in (0.1, -0.1, 0.5, -0.5, 0.9, -0.9, 0.99, -0.99):
        numeric = np.array(twomode.normal_modes_numeric(beta))
        for branch in twomode.BRANCHES:
            d = twomode.diagonalize(beta, branch)
            worst_eta = max(worst_eta, abs(d.eta12), abs(d.eta21))
            closed = np.array(twomode.diagonal_coefficients(beta, branch))
            worst_closed = max(worst_closed, float(np.max(np.abs(closed - [d.mu1, d.mu2, d.nu1, d.nu2]))))
            worst_mode = max(worst_mode, float(np.max(np.abs(np.sort(d.frequencies) - numeric))))
    ok = worst_eta < 1e-10 and worst_closed < 1e-10 and worst_mode < 1e-8
    gate(6, "two-mode diagonalization", ok,
         f"eta {worst_eta:.1e} (<1e-10), closed form {worst_closed:.1e} (<1e-10), modes {worst_mode:.1e} (<1e-8)")
    assert worst_eta < 1e-10
    assert worst_closed < 1e-10
    assert worst_mode < 1e-8


def test_criterion_07_spectrum(gate):
    coupled = np.array([e for e, _ in twomode.spectrum(1e-4, 10, "coupled")])
    uncoupled = np.array([e for e, _ in twomode.spectrum(1e-4, 10, "uncoupled")])
    static = [e for e, _ in twomode.spectrum(0.0, 10, "uncoupled")]
    match = float(np.max(np.abs(coupled - uncoupled)))
    distinct_low = len(twomode.distinct_values(coupled, 1e-6))
    degenerate = twomode.degenerate_count(0.0, 10, "uncoupled")
    fast = np.array([e for e, _ in twomode.spectrum(0.9, 10)])
    gap = float(np.min(np.diff(np.sort(fast))))
    ok = match < 1e-6 and distinct_low == 6 and degenerate == 8 and gap > 1e-6
    gate(7, "spectrum structure", ok,
         f"beta=1e-4 match {match:.1e} (<1e-6), {distinct_low} distinct, {degenerate} degenerate; "
         f"beta=0.9 min gap {gap:.3f} (>1e-6)")
    assert match < 1e-6
    assert distinct_low == 6 and len(twomode.distinct_values(static)) == 6
    assert degenerate == 8
    assert gap > 1e-6


def test_criterion_08_sta_stroke(gate):
    start = time.perf_counter()
    chk = ermakov.sta_energy_check(ermakov.design_sta(PI, PI / 2, 5.0))
    elapsed = time.perf_counter() - start
    e_err = abs(chk.energy_ratio - 0.5)
    v_err = abs(chk.variance_ratio - 2.0)
    ok = e_err <= 1e-3 and v_err <= 1e-2 and chk.max_lewis_drift < 1e-6 and elapsed < 5
    gate(8, "STA stroke", ok,
         f"energy ratio {chk.energy_ratio:.6f} (0.5 +/- 1e-3), variance ratio {chk.variance_ratio:.6f} "
         f"(2 +/- 1e-2), Lewis drift {chk.max_lewis_drift:.1e} (<1e-6), {elapsed:.1f} s (<5)")
    assert e_err <= 1e-3
    assert v_err <= 1e-2
    assert chk.max_lewis_drift < 1e-6
    assert elapsed < 5


def test_criterion_09_invariant_suites(gate):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    grid = np.linspace(0.0, 10.0, 101)

    defect = 0.0
    runs = [sy.SingleModeUniform(b) for b in (0.3, 0.5, 0.9)] + [sy.TwoMode(0.5), sy.TwoMode(0.9)]
    runs += [sy.LawOriginal(Uniform(0.5), n) for n in (1, 2, 3)] + [sy.LawOriginal(Parametric(0.15), 2)]
    for form in runs:
        defect = max(defect, float(np.max(sy.propagate(form, grid, method="ode").defect)))

    lad = fock.build_ladder(40)
    drift = 0.0
    for beta in (0.3, 0.5, 0.9):
        drift = max(drift, fock.evolve(fock.vacuum(lad), sy.SingleModeUniform(beta), grid, lad).max_norm_drift)

    beta = 0.7
    form = sy.FactorizedUniform(beta, 2)
    prop = sy.propagate(form, grid, method="ode")
    A = rng.normal(size=(4, 4))
    cov, means = prop.covariance(A @ A.T + np.eye(4)), prop.means(rng.normal(size=4))
    e = np.array([(1 + beta * t) * sy.energy(form.matrix(t), c, m) for t, c, m in zip(grid, cov, means)])
    scale_sym = float(np.max(np.abs(e - e[0])))
    single = sy.SingleModeUniform(beta)
    traj = fock.evolve(fock.vacuum(lad), single, grid, lad)
    ef = fock.expectation(traj, lambda t: fock.build_hamiltonian(single, t, lad) * (1 + beta * t))
    scale_fock = float(np.max(np.abs(ef - ef[0])))

    invariant = max(sy.linear_invariant_check(sy.TwoMode(0.5), rng.normal(size=4), grid) for _ in range(10))

    frame = 0.0
    fgrid = np.linspace(0.0, 5.0, 51)
    for n in (1, 2):
        mapped = sy.frame_map(sy.propagate(sy.FactorizedUniform(0.5, n), fgrid), Uniform(0.5))
        direct = sy.propagate(sy.LawOriginal(Uniform(0.5), n), fgrid, method="ode")
        frame = max(frame, float(np.max(np.abs(mapped.S - direct.S))))
    elapsed = time.perf_counter() - start

    ok = (defect < 1e-10 and drift < 1e-8 and scale_sym < 1e-8 and scale_fock < 1e-6
          and invariant < 1e-6 and frame < 1e-6 and elapsed < 120)
    gate(9, "invariant suites", ok,
         f"defect {defect:.1e}, norm drift {drift:.1e}, scaling {scale_sym:.1e}/{scale_fock:.1e}, "
         f"linear invariant {invariant:.1e}, frame map {frame:.1e}, {elapsed:.1f} s (<120)")
    assert defect < 1e-10
    assert drift < 1e-8
    assert scale_sym < 1e-8
    assert scale_fock < 1e-6
    assert invariant < 1e-6
    assert frame < 1e-6
    assert elapsed < 120


def test_criterion_10_two_mode_boundedness(gate):
    start = time.perf_counter()
    grid = np.linspace(0.0, 20.0, 401)
    form = sy.TwoMode(0.9)
    n_sym = sy.photon_numbers(sy.propagate(form, grid))
    ceiling = np.array(TWO_MODE_CEILING)
    assert np.allclose(n_sym.max(axis=0), ceiling, rtol=1e-6)
    half = grid.size // 2
    growth = float(np.max(n_sym[half:].max(axis=0) / n_sym[:half].max(axis=0)))
    ladders = fock.mode_ladders(2, 12)
    n_fock = fock.photon_numbers(fock.evolve(fock.vacuum(ladders), form, grid, ladders))
    rel = float(np.max(np.abs(n_fock.max(axis=0) / ceiling - 1)))
    elapsed = time.perf_counter() - start
    ok = rel < 0.05 and growth < 1.5 and elapsed < 60
    gate(10, "two-mode boundedness", ok,
         f"Fock peaks vs ceiling {rel:.1e} (<0.05), late/early {growth:.3f} (<1.5), {elapsed:.1f} s (<60)")
    assert rel < 0.05
    assert growth < 1.5
    assert elapsed < 60
