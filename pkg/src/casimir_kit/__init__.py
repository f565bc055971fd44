"""Dynamical Casimir effect in a cavity with one moving mirror.

Program units throughout: ``c = q0 = hbar = k_B = 1``, so the static cavity
mode ``k`` has frequency ``k pi``.
"""

from .analytic import (
    eigenfrequency,
    effective_temperature,
    log_time_f,
    photons_planck_form,
    photons_resonance,
    photons_uniform,
    planck_factor,
    tau_coeffs,
)
from .config import RunConfig
from .core import CavityConfig, Custom, MirrorCollisionError, Parametric, Tolerances, Uniform
from .symplectic import (
    FactorizedUniform,
    LawOriginal,
    LawSingleModeLadder,
    SingleModeUniform,
    TwoMode,
    photon_numbers,
    propagate,
)

__version__ = "0.1.0"

__all__ = [
    "CavityConfig",
    "Custom",
    "FactorizedUniform",
    "LawOriginal",
    "LawSingleModeLadder",
    "MirrorCollisionError",
    "Parametric",
    "RunConfig",
    "SingleModeUniform",
    "Tolerances",
    "TwoMode",
    "Uniform",
    "effective_temperature",
    "eigenfrequency",
    "log_time_f",
    "photon_numbers",
    "photons_planck_form",
    "photons_resonance",
    "photons_uniform",
    "planck_factor",
    "propagate",
    "tau_coeffs",
]
