"""Cross-checks between the independent solvers, driven by a :class:`RunConfig`.

Each check returns a :class:`CheckResult`; ``run_all`` is what ``casimir-kit
verify`` executes. Numerical failures become ``passed=False`` results, while
configuration problems propagate as exceptions.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import analytic, ermakov, fock, twomode
from . import symplectic as sy
from .config import RunConfig
from .core import CasimirError, Parametric, Uniform

DIAGONAL_BETAS = (0.1, -0.1, 0.5, -0.5, 0.9, -0.9, 0.99, -0.99)
RESONANCE_WINDOW = (1, 8)  # drive periods at which the sinh^2 law is compared
IDENTITY_TOL = 1e-12  # two spellings of one closed form
ROUND_TRIP_TOL = 1e-8  # design_sta -> solve_ermakov


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        d["value"] = float(self.value)
        d["threshold"] = float(self.threshold)
        return d

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.value:.3e} (limit {self.threshold:.3e}) {self.detail}".rstrip()


def _result(name, value, threshold, detail="", below=True):
    value = float(value)
    ok = bool(np.isfinite(value) and (value < threshold if below else value >= threshold))
    return CheckResult(name, ok, value, threshold, detail)


def _uniform_beta(cfg: RunConfig) -> float:
    traj = cfg.cavity.trajectory
    return traj.beta if isinstance(traj, Uniform) else 0.5


def worker_count() -> int:
    env = os.environ.get("CASIMIR_KIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"CASIMIR_KIT_THREADS must be an integer, got {env!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


# --- photon curves -----------------------------------------------------------

@dataclass
class UniformCurves:
    t: np.ndarray
    analytic: np.ndarray
    symplectic: np.ndarray
    fock: np.ndarray
    defect: float
    norm_drift: float
    leakage: float


def uniform_curves(beta: float, grid, cutoff: int, cfg: RunConfig) -> UniformCurves:
    """Principal-mode photon number from the closed form, the Gaussian ODE and the Fock oracle."""
    tol = cfg.cavity.tolerances
    grid = np.asarray(grid, dtype=float)
    form = sy.SingleModeUniform(beta)
    prop = sy.propagate(form, grid, method="ode", defect_tol=tol.defect_tol)
    ladder = fock.build_ladder(cutoff)
    traj = fock.evolve(fock.vacuum(ladder), form, grid, ladder, norm_tol=tol.norm_tol, leak_tol=tol.leak_tol)
    return UniformCurves(
        grid,
        np.asarray(analytic.photons_uniform(grid, beta)),
        sy.photon_numbers(prop)[:, 0],
        fock.photon_numbers(traj)[:, 0],
        float(np.max(prop.defect)),
        traj.max_norm_drift,
        traj.max_leakage,
    )


@dataclass
class ResonanceCurves:
    t: np.ndarray
    analytic: np.ndarray
    fock: np.ndarray
    strobe: np.ndarray  # indices of the drive-period samples used for the comparison
    norm_drift: float
    leakage: np.ndarray


def resonance_grid(cfg: RunConfig, drive: float) -> np.ndarray:
    """Config grid plus every whole drive period inside it."""
    grid = cfg.cavity.grid()
    period = 2.0 * np.pi / drive
    k = np.arange(np.ceil(grid[0] / period - 1e-12), np.floor(grid[-1] / period + 1e-12) + 1)
    return np.unique(np.round(np.concatenate([grid, k * period]), 12))


def resonance_curves(epsilon: float, drive: float, grid, cutoff: int, cfg: RunConfig) -> ResonanceCurves:
    tol = cfg.cavity.tolerances
    grid = np.asarray(grid, dtype=float)
    ladder = fock.build_ladder(cutoff)
    form = sy.LawSingleModeLadder(Parametric(epsilon, drive))
    traj = fock.evolve(fock.vacuum(ladder), form, grid, ladder, norm_tol=tol.norm_tol, leak_tol=tol.leak_tol)
    period = 2.0 * np.pi / drive
    cycles = grid / period
    lo, hi = RESONANCE_WINDOW
    strobe = np.flatnonzero((np.abs(cycles - np.round(cycles)) < 1e-9) & (cycles > lo - 1e-9) & (cycles < hi + 1e-9))
    return ResonanceCurves(grid, np.asarray(analytic.photons_resonance(grid, epsilon)),
                           fock.photon_numbers(traj)[:, 0], strobe, traj.max_norm_drift, traj.leakage)


def resonance_error(curves: ResonanceCurves) -> float:
    i = curves.strobe
    if i.size == 0:
        return float("nan")
    return float(np.max(np.abs(curves.fock[i] / curves.analytic[i] - 1.0)))


# --- individual checks -------------------------------------------------------

def check_photons(cfg: RunConfig) -> list[CheckResult]:
    beta = _uniform_beta(cfg)
    tol = cfg.cavity.tolerances
    cutoff = tol.fock_cutoff or 40
    c = uniform_curves(beta, cfg.cavity.grid(), cutoff, cfg)
    return [
        _result(f"photons.symplectic_vs_analytic[beta={beta:g}]", np.max(np.abs(c.symplectic - c.analytic)), tol.sym_tol),
        _result(f"photons.fock_vs_analytic[beta={beta:g},D={cutoff}]", np.max(np.abs(c.fock - c.analytic)), tol.fock_tol),
        _result("photons.planck_form_identity",
                np.max(np.abs(c.analytic - analytic.photons_planck_form(c.t, beta))), IDENTITY_TOL),
        _result("symplectic.defect[single-mode ode]", c.defect, tol.defect_tol),
        _result("fock.norm_drift[single-mode]", c.norm_drift, tol.norm_tol),
    ]


def check_resonance(cfg: RunConfig) -> list[CheckResult]:
    traj = cfg.cavity.trajectory
    eps, drive = (traj.epsilon, traj.drive) if isinstance(traj, Parametric) else (0.15, 2.0 * np.pi)
    tol = cfg.cavity.tolerances
    cutoff = tol.fock_cutoff or 80
    period = 2.0 * np.pi / drive
    grid = np.arange(0.0, RESONANCE_WINDOW[1] * period + 1e-12, period / 20.0)
    try:
        c = resonance_curves(eps, drive, grid, cutoff, cfg)
    except fock.NormDriftError as exc:
        return [CheckResult(f"resonance.fock[D={cutoff}]", False, float("inf"), tol.norm_tol, str(exc))]
    return [
        _result(f"resonance.sinh2_law[eps={eps:g},D={cutoff}]", resonance_error(c), tol.resonance_rel_tol,
                "max relative error at whole drive periods 1..8"),
        _result(f"resonance.leakage[D={cutoff}]", float(np.max(c.leakage)), tol.leak_tol,
                "population of the top 10% of levels"),
        _result("fock.norm_drift[resonance]", c.norm_drift, tol.norm_tol),
    ]


def check_diagonalization(cfg: RunConfig) -> list[CheckResult]:
    ck = cfg.checks
    eta = closed = modes = 0.0
    for beta in DIAGONAL_BETAS:
        for branch in twomode.BRANCHES:
            d = twomode.diagonalize(beta, branch)
            eta = max(eta, abs(d.eta12), abs(d.eta21))
            closed = max(closed, float(np.max(np.abs(np.subtract(
                (d.mu1, d.mu2, d.nu1, d.nu2), twomode.diagonal_coefficients(beta, branch))))))
            modes = max(modes, float(np.max(np.abs(np.subtract(
                sorted(d.frequencies), twomode.normal_modes_numeric(beta))))))
    return [
        _result("twomode.eta_residuals", eta, ck.eta_tol),
        _result("twomode.closed_forms_vs_substitution", closed, ck.closed_form_tol),
        _result("twomode.frequencies_vs_JM_oracle", modes, ck.mode_tol),
    ]


def check_spectrum(cfg: RunConfig) -> list[CheckResult]:
    ck = cfg.checks
    levels = cfg.spectrum.levels
    branch = cfg.spectrum.branch
    small = 1e-4
    coupled = [e for e, _ in twomode.spectrum(small, levels, "coupled", "minus")]
    uncoupled = [e for e, _ in twomode.spectrum(0.0, levels, "uncoupled")]
    gap = float(np.min(np.diff([e for e, _ in twomode.spectrum(0.9, levels, "coupled", branch)])))
    distinct = len(twomode.distinct_values(uncoupled, ck.degeneracy_tol))
    return [
        _result(f"spectrum.limit[beta={small:g}]", np.max(np.abs(np.subtract(coupled, uncoupled))), ck.degeneracy_tol),
        CheckResult("spectrum.static_distinct_levels", distinct == 6, distinct, 6, "expected exactly six"),
        _result("spectrum.split[beta=0.9]", gap, ck.degeneracy_tol, "smallest gap among ten levels", below=False),
    ]


def check_sta(cfg: RunConfig) -> list[CheckResult]:
    e = cfg.ermakov
    ramp = ermakov.design_sta(e.omega0, e.omega_f, e.tf)
    res = ermakov.sta_energy_check(ramp, samples=e.samples)
    grid = np.linspace(0.0, e.tf, 201)
    sol = ermakov.solve_ermakov(ramp.profile(), 1.0, 0.0, grid, tol=cfg.cavity.tolerances.ode_tol)
    return [
        _result("ermakov.energy_ratio", abs(res.energy_ratio - e.omega_f / e.omega0), e.energy_tol),
        _result("ermakov.variance_ratio", abs(res.variance_ratio - e.omega0 / e.omega_f), e.variance_tol),
        _result("ermakov.lewis_drift", res.max_lewis_drift, e.lewis_tol),
        _result("ermakov.round_trip", np.max(np.abs(sol.rho - ramp.rho(grid))), ROUND_TRIP_TOL),
    ]


def check_invariants(cfg: RunConfig) -> list[CheckResult]:
    ck, tol = cfg.checks, cfg.cavity.tolerances
    beta = _uniform_beta(cfg)
    grid = cfg.cavity.grid()
    out = []

    # energy scaling q(t) <H_S(t)>: constant because H_S(t) is a scalar times one operator
    form = sy.FactorizedUniform(beta, 2)
    prop = sy.propagate(form, grid, method="ode", defect_tol=tol.defect_tol)
    cov = prop.covariance(sy.vacuum_covariance(sy.static_frequencies(2)))
    q = Uniform(beta).q(grid)
    e = np.array([qi * sy.energy(form.matrix(ti), c) for qi, ti, c in zip(q, grid, cov)])
    out.append(_result("symplectic.energy_scaling", np.max(np.abs(e - e[0])), ck.scaling_sym_tol))
    out.append(_result("symplectic.defect[two-mode ode]", np.max(prop.defect), tol.defect_tol))

    ladder = fock.build_ladder(tol.fock_cutoff or 40)
    single = sy.SingleModeUniform(beta)
    traj = fock.evolve(fock.vacuum(ladder), single, grid, ladder, norm_tol=tol.norm_tol, leak_tol=tol.leak_tol)
    builder = fock.HamiltonianBuilder(single, ladder)
    ef = fock.expectation(traj, lambda t: builder(t) * Uniform(beta).q(t))
    out.append(_result("fock.energy_scaling", np.max(np.abs(ef - ef[0])), ck.scaling_fock_tol))

    rng = np.random.default_rng(0)
    drift = max(sy.linear_invariant_check(sy.TwoMode(beta), rng.normal(size=4), grid, n_states=4, seed=i)
                for i in range(10))
    out.append(_result("symplectic.linear_invariant[two-mode]", drift, ck.invariant_tol))

    worst = 0.0
    for n in (1, 2):
        mapped = sy.frame_map(sy.propagate(sy.FactorizedUniform(0.5, n), grid, method="exact"), Uniform(0.5))
        direct = sy.propagate(sy.LawOriginal(Uniform(0.5), n), grid, method="ode", defect_tol=tol.defect_tol)
        worst = max(worst, float(np.max(np.abs(mapped.S - direct.S))))
    out.append(_result("symplectic.frame_map[N=1,2]", worst, ck.frame_tol))
    return out


@dataclass
class TwoModeBound:
    t: np.ndarray
    symplectic: np.ndarray
    fock: np.ndarray
    ceiling: np.ndarray
    early: np.ndarray
    late: np.ndarray


def twomode_bound(beta: float = 0.9, tf: float = 20.0, samples: int = 401, cutoff: int = 12,
                  cfg: RunConfig | None = None) -> TwoModeBound:
    tol = (cfg or RunConfig()).cavity.tolerances
    grid = np.linspace(0.0, tf, samples)
    form = sy.TwoMode(beta)
    n_sym = sy.photon_numbers(sy.propagate(form, grid, method="exact"))
    ladders = fock.mode_ladders(2, cutoff)
    traj = fock.evolve(fock.vacuum(ladders), form, grid, ladders, norm_tol=tol.norm_tol, leak_tol=tol.leak_tol)
    half = samples // 2
    return TwoModeBound(grid, n_sym, fock.photon_numbers(traj), n_sym.max(axis=0),
                        n_sym[:half].max(axis=0), n_sym[half:].max(axis=0))


def check_twomode_bound(cfg: RunConfig) -> list[CheckResult]:
    ck = cfg.checks
    b = twomode_bound(cfg=cfg)
    rel = float(np.max(np.abs(b.fock.max(axis=0) / b.ceiling - 1.0)))
    growth = float(np.max(b.late / b.early))
    return [
        _result("twomode.fock_ceiling[beta=0.9,D=12]", rel, ck.bound_rel_tol),
        _result("twomode.no_envelope[late/early]", growth, ck.envelope_ratio),
    ]


SUITE = (check_photons, check_resonance, check_diagonalization, check_spectrum, check_sta, check_invariants,
         check_twomode_bound)


def run_all(cfg: RunConfig, workers: int | None = None) -> list[CheckResult]:
    """Every check, in suite order; independent checks run concurrently."""
    def guarded(fn):
        try:
            return fn(cfg)
        except CasimirError as exc:
            if isinstance(exc, ValueError):
                raise
            return [CheckResult(fn.__name__, False, float("nan"), 0.0, f"{type(exc).__name__}: {exc}")]

    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        results = list(pool.map(guarded, SUITE))
    return [r for group in results for r in group]
