"""Units, mirror trajectories, mode frequencies and intermode couplings.

Program units are fixed throughout the package: ``c = q0 = hbar = k_B = 1``.
Times are measured in ``q0/c``, frequencies in ``c/q0`` and temperatures in
``hbar c / (k_B q0)``. Mode indices are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

C = 1.0
Q0 = 1.0
HBAR = 1.0
K_B = 1.0

DEFAULT_DRIVE = 2.0 * np.pi  # twice the static principal-mode frequency


class CasimirError(Exception):
    """Base class for all errors raised by the toolkit."""


class MirrorCollisionError(CasimirError, ValueError):
    """The moving mirror reached (or crossed) the fixed one: ``q(t) <= 0``."""


@dataclass(frozen=True)
class UnitSystem:
    c: float = C
    q0: float = Q0
    hbar: float = HBAR
    k_B: float = K_B

    def static_frequency(self, k: int) -> float:
        return k * np.pi * self.c / self.q0


UNITS = UnitSystem()


@dataclass(frozen=True)
class Uniform:
    """Mirror moving at constant velocity ``beta = v/c``: ``q(t) = 1 + beta t``."""

    beta: float

    def q(self, t):
        return 1.0 + self.beta * np.asarray(t, dtype=float)

    def q_dot(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.beta)

    def collision_time(self) -> float:
        return -1.0 / self.beta if self.beta < 0 else np.inf


@dataclass(frozen=True)
class Parametric:
    """Oscillating mirror ``q(t) = 1 + epsilon sin(drive t)``."""

    epsilon: float
    drive: float = DEFAULT_DRIVE

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"modulation amplitude must satisfy 0 < epsilon < 1, got {self.epsilon}")

    def q(self, t):
        return 1.0 + self.epsilon * np.sin(self.drive * np.asarray(t, dtype=float))

    def q_dot(self, t):
        return self.epsilon * self.drive * np.cos(self.drive * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class Custom:
    """Tabulated trajectory, interpolated with a monotone cubic (PCHIP)."""

    times: tuple
    values: tuple
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("custom trajectory needs matching 1-d tables with at least two samples")
        if np.any(np.diff(times) <= 0):
            raise ValueError("custom trajectory times must be strictly increasing")
        object.__setattr__(self, "times", tuple(times))
        object.__setattr__(self, "values", tuple(values))
        object.__setattr__(self, "_interp", PchipInterpolator(times, values, extrapolate=False))

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise ValueError(f"time outside tabulated window [{self.times[0]}, {self.times[-1]}]")
        return t

    def q(self, t):
        return self._interp(self._check(t))

    def q_dot(self, t):
        return self._interp.derivative()(self._check(t))


Trajectory = Union[Uniform, Parametric, Custom]


def _positive(q, t):
    if np.any(q <= 0):
        raise MirrorCollisionError(f"mirror collision: q(t) <= 0 for t = {t}")
    return q


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def trajectory_q(traj: Trajectory, t):
    """Mirror position ``q(t)``; raises :class:`MirrorCollisionError` if ``q <= 0``."""
    if isinstance(t, float) and isinstance(traj, Uniform):
        # hot path inside the integrators
        q = 1.0 + traj.beta * t
        if q <= 0:
            raise MirrorCollisionError(f"mirror collision: q(t) <= 0 for t = {t}")
        return q
    return _scalar(_positive(traj.q(t), t))


def trajectory_q_dot(traj: Trajectory, t):
    return _scalar(traj.q_dot(t))


def omega_k(k: int, t, traj: Trajectory):
    """Instantaneous frequency ``k pi / q(t)`` of the k-th cavity mode."""
    if k < 1:
        raise ValueError(f"mode index must be >= 1, got {k}")
    return k * np.pi / trajectory_q(traj, t)


def coupling_G(k: int, j: int) -> float:
    """Antisymmetric intermode coupling ``(-1)^(k+j) 2kj / (j^2 - k^2)``."""
    if k < 1 or j < 1:
        raise ValueError("mode indices are 1-based")
    if k == j:
        raise ValueError("coupling undefined for k == j")
    return (-1) ** (k + j) * 2.0 * k * j / (j * j - k * k)


def coupling_matrix(n_modes: int) -> np.ndarray:
    """``G[k-1, j-1] = coupling_G(k, j)`` with zero diagonal."""
    G = np.zeros((n_modes, n_modes))
    for k in range(1, n_modes + 1):
        for j in range(1, n_modes + 1):
            if k != j:
                G[k - 1, j - 1] = coupling_G(k, j)
    return G


@dataclass(frozen=True)
class Tolerances:
    ode_tol: float = 1e-9
    defect_tol: float = 1e-10
    fock_cutoff: int | None = None  # None: 40 for uniform runs, 80 for resonance runs
    norm_tol: float = 1e-8
    leak_tol: float = 1e-2
    sym_tol: float = 1e-6
    fock_tol: float = 1e-4
    resonance_rel_tol: float = 0.1


@dataclass(frozen=True)
class CavityConfig:
    trajectory: Trajectory = Uniform(0.5)
    n_modes: int = 1
    t0: float = 0.0
    tf: float = 10.0
    samples: int = 200
    tolerances: Tolerances = Tolerances()

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if not self.tf > self.t0 >= 0:
            raise ValueError("time window must satisfy tf > t0 >= 0")
        if self.samples < 2:
            raise ValueError("need at least two samples")
        tol = self.tolerances
        for name in ("ode_tol", "defect_tol", "norm_tol", "leak_tol", "sym_tol", "fock_tol", "resonance_rel_tol"):
            if getattr(tol, name) <= 0:
                raise ValueError(f"tolerance {name} must be positive")
        if tol.fock_cutoff is not None and tol.fock_cutoff < 4:
            raise ValueError("fock cutoff must be >= 4")
        if isinstance(self.trajectory, Uniform) and self.trajectory.beta < 0:
            if self.tf >= self.trajectory.collision_time():
                raise MirrorCollisionError(
                    f"uniform compression with beta={self.trajectory.beta} collides before tf={self.tf}"
                )

    def grid(self) -> np.ndarray:
        return np.linspace(self.t0, self.tf, self.samples)

    def cutoff(self) -> int:
        if self.tolerances.fock_cutoff is not None:
            return self.tolerances.fock_cutoff
        return 80 if isinstance(self.trajectory, Parametric) else 40
