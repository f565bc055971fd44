"""Time-dependent oscillators through the Ermakov equation.

For ``H = (p^2 + w(t)^2 x^2) / 2`` the auxiliary amplitude ``rho`` obeys

    rho'' + w(t)^2 rho = w0^2 / rho^3,       w0 = w(t0),

and fixes both the Lewis invariant and a canonical frame in which the
Hamiltonian factorizes as ``diag(w0^2, 1) / rho^2``. Running the equation
backwards (pick ``rho``, read off ``w``) gives shortcut-to-adiabaticity
ramps. Quadratic forms follow the ``H = z^T M z / 2`` convention of
:mod:`casimir_kit.symplectic`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from . import _rk4
from .core import CasimirError
from .symplectic import J, Oscillator, energy, frame_change, propagate, vacuum_covariance

RULES = ("ermakov", "classical")


class ErmakovSingularity(CasimirError):
    """The amplitude reached zero, where the equation is singular."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ErmakovAccuracyError(CasimirError):
    """Step halving failed to reach the requested accuracy."""


@dataclass(frozen=True)
class FrequencyProfile:
    """Squared frequency ``omega2(t)`` on ``[t0, tf]``; must be C^2 for RK4 to reach full order.

    Negative ``omega2`` inside the window is allowed (inverted potential); the
    end points must be proper oscillators.
    """

    omega2: Callable
    t0: float
    tf: float
    smoothness: str = "C2"

    def __post_init__(self):
        if not self.tf > self.t0:
            raise ValueError("profile window needs tf > t0")
        if self.omega2(self.t0) <= 0 or self.omega2(self.tf) <= 0:
            raise ValueError("omega^2 must be positive at both ends of the window")

    @classmethod
    def constant(cls, omega: float, t0: float = 0.0, tf: float = 10.0) -> "FrequencyProfile":
        w2 = float(omega) ** 2
        return cls(lambda t: w2 + 0.0 * np.asarray(t, dtype=float), t0, tf)

    @property
    def omega0(self) -> float:
        return float(np.sqrt(self.omega2(self.t0)))

    @property
    def omega_f(self) -> float:
        return float(np.sqrt(self.omega2(self.tf)))

    def omega(self, t):
        return np.sqrt(np.asarray(self.omega2(t), dtype=float))

    def form(self) -> Oscillator:
        return Oscillator(self.omega2)

    def max_omega(self, probes: int = 513) -> float:
        ts = np.linspace(self.t0, self.tf, probes)
        return float(np.sqrt(np.max(np.abs([self.omega2(t) for t in ts]))))

    def contains(self, grid) -> bool:
        grid = np.asarray(grid, dtype=float)
        span = self.tf - self.t0
        return bool(grid.min() >= self.t0 - 1e-12 * span and grid.max() <= self.tf + 1e-12 * span)


@dataclass
class ErmakovSolution:
    """Amplitude ``sigma`` sampled on ``t`` plus the dense internal integration.

    ``rule`` is ``"ermakov"`` (``sigma = rho``) or ``"classical"`` (``sigma'' + w^2 sigma = 0``).
    """

    t: np.ndarray
    rho: np.ndarray
    rho_dot: np.ndarray
    residual: float
    step: float
    error_estimate: float
    rule: str
    profile: FrequencyProfile
    omega0: float
    dense_t: np.ndarray
    dense_rho: np.ndarray
    dense_rho_dot: np.ndarray

    def accel(self, t, rho):
        return _accel(self.profile, self.omega0, self.rule, t, rho)

    def at(self, t):
        """``(sigma, sigma', sigma'')`` at arbitrary ``t`` inside the grid (quartic-accurate Hermite)."""
        t = np.asarray(t, dtype=float)
        rho_dd = self.accel(self.dense_t, self.dense_rho)
        s = CubicHermiteSpline(self.dense_t, self.dense_rho, self.dense_rho_dot)(t)
        sd = CubicHermiteSpline(self.dense_t, self.dense_rho_dot, rho_dd)(t)
        return s, sd, self.accel(t, s)


def _accel(profile, omega0, rule, t, rho):
    w2 = np.asarray(profile.omega2(t), dtype=float)
    if rule == "ermakov":
        return -w2 * rho + omega0 ** 2 / rho ** 3
    return -w2 * rho


def _dense_grid(grid, h):
    n = _rk4.substeps(grid, h)
    pieces = [np.linspace(a, b, m, endpoint=False) for a, b, m in zip(grid[:-1], grid[1:], n)]
    return np.concatenate(pieces + [grid[-1:]]), np.concatenate([[0], np.cumsum(n)])


def _integrate(profile, omega0, rule, y0, grid, h):
    dense, index = _dense_grid(grid, h)

    def rhs(t, y):
        return np.array([y[1], _accel(profile, omega0, rule, t, y[0])])

    sign = np.sign(y0[0])

    def guard(t, y):
        # a sign change of sigma makes the frame map singular for either rule
        if not sign * y[0] > 0:
            raise ErmakovSingularity(f"sigma reached {y[0]:.3e} at t={t:.6g}", time=t)
        return y

    y = _rk4.integrate(rhs, np.asarray(y0, dtype=float), dense, np.inf, after_step=guard)
    return dense, y, index


def _solve(profile, sigma0, sigma_dot0, grid, rule, tol, max_halvings, step):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    if not profile.contains(grid):
        raise ValueError("grid leaves the profile window")
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}")
    if rule == "ermakov" and not sigma0 > 0:
        raise ValueError("rho0 must be positive")
    if sigma0 == 0:
        raise ValueError("sigma0 must be nonzero")
    omega0 = profile.omega0
    # shortest period: the bare frequency or the effective one near a small rho
    w_max = max(profile.max_omega(), omega0 / min(sigma0, 1.0) ** 2 if rule == "ermakov" else 0.0)
    h = step if step is not None else 2.0 * np.pi / w_max / 50.0
    y0 = (sigma0, sigma_dot0)

    coarse = _integrate(profile, omega0, rule, y0, grid, h)
    for _ in range(max_halvings):
        h /= 2.0
        fine = _integrate(profile, omega0, rule, y0, grid, h)
        scale = max(1.0, float(np.max(np.abs(fine[1][:, 0]))))
        # Richardson estimate for a fourth-order method
        err = float(np.max(np.abs(fine[1][fine[2]] - coarse[1][coarse[2]]))) / 15.0
        if err < tol * scale:
            break
        coarse = fine
    else:
        raise ErmakovAccuracyError(f"no convergence after {max_halvings} halvings (estimate {err:.3e})")

    dense, y, index = fine
    rho, rho_dot = y[index, 0], y[index, 1]
    # residual from an independent derivative of the integrated rho' (spline of the dense samples)
    rho_dd = CubicSpline(dense, y[:, 1])(grid, 1)
    w2 = np.asarray(profile.omega2(grid), dtype=float)
    target = omega0 ** 2 / rho ** 3 if rule == "ermakov" else 0.0
    residual = float(np.max(np.abs(rho_dd + w2 * rho - target)))
    return ErmakovSolution(grid, rho, rho_dot, residual, h, err, rule, profile, omega0,
                           dense, y[:, 0], y[:, 1])


def solve_ermakov(profile: FrequencyProfile, rho0: float, rho_dot0: float, grid, tol: float = 1e-9,
                  max_halvings: int = 10, step: float | None = None) -> ErmakovSolution:
    """Integrate the Ermakov equation with RK4, halving the step until the Richardson estimate is below ``tol``."""
    return _solve(profile, rho0, rho_dot0, grid, "ermakov", tol, max_halvings, step)


def solve_classical(profile: FrequencyProfile, sigma0: float, sigma_dot0: float, grid, tol: float = 1e-9,
                    max_halvings: int = 10, step: float | None = None) -> ErmakovSolution:
    """Classical trajectory ``sigma'' + w^2 sigma = 0``; the frame it defines removes the potential."""
    return _solve(profile, sigma0, sigma_dot0, grid, "classical", tol, max_halvings, step)


# --- shortcut to adiabaticity ---------------------------------------------

_SMOOTHSTEP = Polynomial([0, 0, 0, 10, -15, 6])  # zero first and second derivatives at both ends


@dataclass(frozen=True)
class StaRamp:
    """Quintic ``rho`` with stationary ends, and the frequency it induces."""

    omega0: float
    omega_f: float
    tf: float
    t0: float = 0.0

    @property
    def rho_f(self) -> float:
        return float(np.sqrt(self.omega0 / self.omega_f))

    @property
    def duration(self) -> float:
        return self.tf - self.t0

    @cached_property
    def poly(self) -> Polynomial:
        """``rho`` as a polynomial in ``s = (t - t0) / (tf - t0)``."""
        return 1.0 + (self.rho_f - 1.0) * _SMOOTHSTEP

    @cached_property
    def _derivs(self):
        return self.poly.deriv(1), self.poly.deriv(2)

    @property
    def coefficients(self) -> np.ndarray:
        return self.poly.coef

    def _s(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.t0) / self.duration, 0.0, 1.0)

    def rho(self, t):
        return self.poly(self._s(t))

    def rho_dot(self, t):
        return self._derivs[0](self._s(t)) / self.duration

    def rho_ddot(self, t):
        return self._derivs[1](self._s(t)) / self.duration ** 2

    def omega2(self, t):
        """Induced ``w^2 = w0^2 / rho^4 - rho'' / rho``."""
        r = self.rho(t)
        return self.omega0 ** 2 / r ** 4 - self.rho_ddot(t) / r

    def profile(self) -> FrequencyProfile:
        return FrequencyProfile(self.omega2, self.t0, self.tf)

    def at(self, t):
        return self.rho(t), self.rho_dot(t), self.rho_ddot(t)

    def negative_windows(self, samples: int = 4001) -> list[tuple[float, float]]:
        """Intervals (to sampling resolution) where the induced ``w^2`` is negative."""
        t = np.linspace(self.t0, self.tf, samples)
        neg = self.omega2(t) < 0
        windows, start = [], None
        for ti, flag in zip(t, neg):
            if flag and start is None:
                start = ti
            elif not flag and start is not None:
                windows.append((float(start), float(ti)))
                start = None
        if start is not None:
            windows.append((float(start), float(t[-1])))
        return windows


def design_sta(omega0: float, omega_f: float, tf: float, t0: float = 0.0) -> StaRamp:
    """Minimal-degree ramp from ``w0`` to ``wf`` in time ``tf - t0`` with ``rho(tf) = sqrt(w0 / wf)``."""
    if omega0 <= 0 or omega_f <= 0:
        raise ValueError("frequencies must be positive")
    if not tf > t0:
        raise ValueError("ramp duration must be positive")
    return StaRamp(float(omega0), float(omega_f), float(tf), float(t0))


# --- invariant and frames ---------------------------------------------------

def lewis_invariant_form(rho: float, rho_dot: float, omega0: float) -> np.ndarray:
    """``M`` with ``z^T M z / 2 = (rho p - rho' x)^2 / 2 + w0^2 x^2 / (2 rho^2)``."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return np.array([[rho_dot ** 2 + omega0 ** 2 / rho ** 2, -rho * rho_dot],
                     [-rho * rho_dot, rho ** 2]])


def transform_hamiltonian(profile: FrequencyProfile, rule: str, t: float, sigma=None) -> np.ndarray:
    """Coefficient matrix of the oscillator seen in the frame ``x = sigma x'``, ``p = p'/sigma + sigma' x'``.

    ``sigma`` is an :class:`ErmakovSolution` or a :class:`StaRamp` (anything
    with ``at(t) -> (s, s', s'')``). With ``rule="ermakov"`` the result is
    ``diag(w0^2, 1) / rho^2``; with ``rule="classical"`` it is a free particle
    ``diag(0, 1 / sigma^2)``.
    """
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}")
    if sigma is None:
        if rule != "ermakov":
            raise ValueError("the classical rule needs an explicit sigma solution")
        sigma = solve_ermakov(profile, 1.0, 0.0, np.linspace(profile.t0, profile.tf, 257))
    if isinstance(sigma, ErmakovSolution) and sigma.rule != rule:
        raise ValueError(f"sigma was solved with rule {sigma.rule!r}, not {rule!r}")
    s, sd, sdd = (float(v) for v in sigma.at(t))
    if abs(s) < 1e-300:
        raise ErmakovSingularity(f"sigma vanishes at t={t}", time=t)
    T = np.array([[s, 0.0], [sd, 1.0 / s]])
    T_dot = np.array([[sd, 0.0], [sdd, -sd / s ** 2]])
    M = np.diag([float(profile.omega2(t)), 1.0])
    return frame_change(M, T, T_dot)


def factorization_defect(M1: np.ndarray, M2: np.ndarray) -> float:
    """Size of the symplectic commutator ``[J M1, J M2]``; zero iff the two generators commute."""
    A, B = J(1) @ M1, J(1) @ M2
    return float(np.max(np.abs(A @ B - B @ A)))


# --- checks along a ramp ---------------------------------------------------

@dataclass
class StaCheck:
    t: np.ndarray
    rho: np.ndarray
    rho_dot: np.ndarray
    omega_induced: np.ndarray  # signed: -sqrt(|w^2|) inside inverted windows
    lewis: np.ndarray
    lewis_drift: np.ndarray
    energy_ratio_running: np.ndarray
    energy_ratio: float
    variance_ratio: float
    defect: float
    negative_windows: list

    @property
    def max_lewis_drift(self) -> float:
        return float(np.max(self.lewis_drift))


def sta_energy_check(ramp: StaRamp, cov0: np.ndarray | None = None, samples: int = 501,
                     max_step: float | None = None) -> StaCheck:
    """Propagate a Gaussian state through the ramp and compare the stroke with the adiabatic limit.

    ``cov0`` defaults to the ground state of ``w0``. The returned energy
    ratio should equal ``wf / w0`` and the position-variance ratio ``w0 / wf``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    t = np.linspace(ramp.t0, ramp.tf, samples)
    cov0 = vacuum_covariance(ramp.omega0) if cov0 is None else np.asarray(cov0, dtype=float)
    form = Oscillator(ramp.omega2)
    prop = propagate(form, t, method="ode", max_step=max_step)
    cov = prop.covariance(cov0)
    w2 = ramp.omega2(t)
    e = np.array([energy(form.matrix(ti), c) for ti, c in zip(t, cov)])
    rho, rho_dot = ramp.rho(t), ramp.rho_dot(t)
    lewis = np.array([energy(lewis_invariant_form(r, rd, ramp.omega0), c) for r, rd, c in zip(rho, rho_dot, cov)])
    return StaCheck(
        t=t,
        rho=rho,
        rho_dot=rho_dot,
        omega_induced=np.sign(w2) * np.sqrt(np.abs(w2)),
        lewis=lewis,
        lewis_drift=np.abs(lewis - lewis[0]),
        energy_ratio_running=e / e[0],
        energy_ratio=float(e[-1] / e[0]),
        variance_ratio=float(cov[-1, 0, 0] / cov[0, 0, 0]),
        defect=float(np.max(prop.defect)),
        negative_windows=ramp.negative_windows(),
    )


def lewis_drift(solution: ErmakovSolution, cov0: np.ndarray, mean0=None, max_step: float | None = None) -> float:
    """Max change of ``<I(t)>`` for a Gaussian state evolved under the solution's own profile."""
    if solution.rule != "ermakov":
        raise ValueError("the Lewis invariant needs an Ermakov solution")
    prop = propagate(solution.profile.form(), solution.t, method="ode", max_step=max_step)
    cov = prop.covariance(np.asarray(cov0, dtype=float))
    means = prop.means(np.zeros(2) if mean0 is None else mean0)
    vals = np.array([energy(lewis_invariant_form(r, rd, solution.omega0), c, m)
                     for r, rd, c, m in zip(solution.rho, solution.rho_dot, cov, means)])
    return float(np.max(np.abs(vals - vals[0])))
