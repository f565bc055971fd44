"""Closed-form results for a single cavity mode and a uniformly moving mirror.

Everything here is a pure function of ``(t, beta)``; ``t`` may be a scalar or
a numpy array. ``beta = 0`` (static cavity) is handled as an explicit branch.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import MirrorCollisionError

PI = np.pi
OMEGA1 = PI  # static principal-mode frequency


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _stretch(t, beta):
    """``1 + beta t`` with the collision check."""
    t = np.asarray(t, dtype=float)
    stretch = 1.0 + beta * t
    if np.any(stretch <= 0):
        raise MirrorCollisionError(f"mirror collision for beta={beta}: 1 + beta*t <= 0")
    return t, stretch


def _check_velocity(beta, k=1):
    cap = 2.0 * k * PI
    if abs(beta) >= cap:
        raise ValueError(f"|beta| must be below {cap:.6g} for mode {k}, got {beta}")
    if abs(beta) > 1.0:
        warnings.warn(f"|beta| = {abs(beta)} exceeds the speed of light; result is a formal continuation",
                      RuntimeWarning, stacklevel=3)


def eigenfrequency(k: int, beta: float) -> float:
    """Time-independent eigenfrequency ``k pi sqrt(1 - (beta / 2 k pi)^2)`` of mode k."""
    if k < 1:
        raise ValueError("mode index must be >= 1")
    _check_velocity(beta, k)
    return k * PI * np.sqrt(1.0 - (beta / (2.0 * k * PI)) ** 2)


def log_time_f(t, beta: float):
    """Logarithmic clock ``ln(1 + beta t) / beta``; equals ``t`` for a static mirror."""
    t, _ = _stretch(t, beta)
    if beta == 0:
        return _scalar(t.copy())
    return _scalar(np.log1p(beta * t) / beta)


@dataclass(frozen=True)
class TauMatrix:
    """Heisenberg map ``x(t) = t11 x + t12 p``, ``p(t) = t21 x + t22 p``."""

    t: object
    beta: float
    t11: object
    t12: object
    t21: object
    t22: object

    @property
    def det(self):
        return self.t11 * self.t22 - self.t12 * self.t21

    def as_array(self) -> np.ndarray:
        return np.array([[self.t11, self.t12], [self.t21, self.t22]])


def tau_coeffs(t, beta: float) -> TauMatrix:
    """Heisenberg coefficients of the principal mode under uniform motion."""
    f = np.asarray(log_time_f(t, beta), dtype=np.longdouble)
    omega = np.longdouble(eigenfrequency(1, beta))
    phase = omega * f
    c, s = np.cos(phase), np.sin(phase)
    half_v = np.longdouble(beta) / 2
    t11 = c - half_v * s / omega
    t12 = s / omega
    t21 = -(omega + half_v ** 2 / omega) * s
    t22 = c + half_v * s / omega
    cast = lambda a: _scalar(np.asarray(a, dtype=float))
    return TauMatrix(_scalar(np.asarray(t, dtype=float)), beta, cast(t11), cast(t12), cast(t21), cast(t22))


def photons_from_tau(tau: TauMatrix):
    """Vacuum photon number counted against the static principal mode."""
    w2 = OMEGA1 ** 2
    return (0.25 * (tau.t11 ** 2 + tau.t21 ** 2 / w2)
            + 0.25 * (tau.t22 ** 2 + tau.t12 ** 2 * w2)
            + 0.5 * (tau.t12 * tau.t21 - tau.t11 * tau.t22))


def planck_factor(beta: float) -> float:
    """``1 / ((2 pi / beta)^2 - 1)``; zero for a static mirror."""
    if beta == 0:
        return 0.0
    _check_velocity(beta)
    return 1.0 / ((2.0 * PI / beta) ** 2 - 1.0)


def photons_uniform(t, beta: float):
    """Photons created from vacuum in the principal mode by a uniformly moving mirror."""
    t, _ = _stretch(t, beta)
    if beta == 0:
        return _scalar(np.zeros_like(t))
    _check_velocity(beta)
    root = np.sqrt(np.longdouble((2.0 * PI / beta) ** 2 - 1.0))
    phase = 0.5 * np.log1p(np.asarray(beta * t, dtype=np.longdouble)) * root
    return _scalar(np.asarray(np.sin(phase) ** 2 / root ** 2, dtype=float))


def photons_planck_form(t, beta: float):
    """Same photon number written as ``nbar sin^2(ln(1 + beta t) / (2 sqrt(nbar)))``."""
    t, _ = _stretch(t, beta)
    if beta == 0:
        return _scalar(np.zeros_like(t))
    nbar = np.longdouble(planck_factor(beta))
    phase = 0.5 * np.log1p(np.asarray(beta * t, dtype=np.longdouble)) / np.sqrt(nbar)
    return _scalar(np.asarray(nbar * np.sin(phase) ** 2, dtype=float))


@dataclass(frozen=True)
class ThermalDescriptor:
    beta: float
    temperature: float
    planck: float


def effective_temperature(beta: float, k: int = 1) -> float:
    """Velocity-dependent effective temperature of mode k, ``k pi / (2 ln(2 k pi / beta))``."""
    if beta <= 0:
        raise ValueError("effective temperature needs beta > 0 (its limit at beta -> 0 is zero)")
    _check_velocity(beta, k)
    return k * PI / (2.0 * np.log(2.0 * k * PI / beta))


def thermal_descriptor(beta: float) -> ThermalDescriptor:
    return ThermalDescriptor(beta, effective_temperature(beta), planck_factor(beta))


def photons_resonance(t, epsilon: float):
    """Exponential photon growth ``sinh^2(epsilon pi t / 2)`` at parametric resonance."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    return _scalar(np.sinh(epsilon * PI * t / 2.0) ** 2)


def unruh_temperature(acceleration: float) -> float:
    if acceleration < 0:
        raise ValueError("proper acceleration must be non-negative")
    return acceleration / (2.0 * PI)
