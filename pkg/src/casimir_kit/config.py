"""Flat ``key = value`` configuration files.

Two serializations are accepted and produce identical :class:`RunConfig`
objects: an INI file whose ``[casimir]`` section holds dotted keys, or a
JSON object with the same dotted keys. Unknown keys are rejected so typos
do not silently fall back to defaults.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .core import CavityConfig, Parametric, Tolerances, Uniform

SECTION = "casimir"
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


@dataclass(frozen=True)
class ErmakovSettings:
    omega0: float = np.pi
    omega_f: float = np.pi / 2
    tf: float = 5.0
    samples: int = 501
    energy_tol: float = 1e-3
    variance_tol: float = 1e-2
    lewis_tol: float = 1e-6


@dataclass(frozen=True)
class SpectrumSettings:
    betas: tuple = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99)
    levels: int = 10
    branch: str = "plus"


@dataclass(frozen=True)
class CheckSettings:
    """Thresholds of the ``verify`` suite that are not tied to one cavity run."""

    eta_tol: float = 1e-10
    closed_form_tol: float = 1e-10
    mode_tol: float = 1e-8
    degeneracy_tol: float = 1e-6
    scaling_sym_tol: float = 1e-8
    scaling_fock_tol: float = 1e-6
    invariant_tol: float = 1e-6
    frame_tol: float = 1e-6
    bound_rel_tol: float = 0.05
    envelope_ratio: float = 1.5


@dataclass(frozen=True)
class RunConfig:
    cavity: CavityConfig = field(default_factory=CavityConfig)
    ermakov: ErmakovSettings = field(default_factory=ErmakovSettings)
    spectrum: SpectrumSettings = field(default_factory=SpectrumSettings)
    checks: CheckSettings = field(default_factory=CheckSettings)


def _floats(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(x) for x in text.replace(";", ",").split(","))


def _opt_int(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else int(text)


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "auto"
    return str(value)


# key -> parser; order fixes the serialization order
_PARSERS = {
    "trajectory.kind": str,
    "trajectory.beta": float,
    "trajectory.epsilon": float,
    "trajectory.drive": float,
    "modes": int,
    "t0": float,
    "tf": float,
    "samples": int,
    "fock.cutoff": _opt_int,
    "fock.norm_tol": float,
    "fock.leak_tol": float,
    "ode.tol": float,
    "symplectic.defect_tol": float,
    "check.sym_tol": float,
    "check.fock_tol": float,
    "resonance.rel_tol": float,
    "ermakov.omega0": float,
    "ermakov.omega_f": float,
    "ermakov.tf": float,
    "ermakov.samples": int,
    "ermakov.energy_tol": float,
    "ermakov.variance_tol": float,
    "ermakov.lewis_tol": float,
    "spectrum.betas": _floats,
    "spectrum.levels": int,
    "twomode.branch": str,
}
_CHECK_KEYS = tuple(f.name for f in fields(CheckSettings))
_PARSERS.update({f"check.{name}": float for name in _CHECK_KEYS})


def to_flat(cfg: RunConfig) -> dict:
    cav, tol, traj = cfg.cavity, cfg.cavity.tolerances, cfg.cavity.trajectory
    if isinstance(traj, Uniform):
        kind, beta, eps, drive = "uniform", traj.beta, 0.15, 2 * np.pi
    elif isinstance(traj, Parametric):
        kind, beta, eps, drive = "parametric", 0.0, traj.epsilon, traj.drive
    else:
        raise ConfigError("custom trajectories cannot be serialized to a config file")
    return {
        "trajectory.kind": kind,
        "trajectory.beta": float(beta),
        "trajectory.epsilon": float(eps),
        "trajectory.drive": float(drive),
        "modes": cav.n_modes,
        "t0": float(cav.t0),
        "tf": float(cav.tf),
        "samples": cav.samples,
        "fock.cutoff": tol.fock_cutoff,
        "fock.norm_tol": tol.norm_tol,
        "fock.leak_tol": tol.leak_tol,
        "ode.tol": tol.ode_tol,
        "symplectic.defect_tol": tol.defect_tol,
        "check.sym_tol": tol.sym_tol,
        "check.fock_tol": tol.fock_tol,
        "resonance.rel_tol": tol.resonance_rel_tol,
        "ermakov.omega0": float(cfg.ermakov.omega0),
        "ermakov.omega_f": float(cfg.ermakov.omega_f),
        "ermakov.tf": float(cfg.ermakov.tf),
        "ermakov.samples": cfg.ermakov.samples,
        "ermakov.energy_tol": cfg.ermakov.energy_tol,
        "ermakov.variance_tol": cfg.ermakov.variance_tol,
        "ermakov.lewis_tol": cfg.ermakov.lewis_tol,
        "spectrum.betas": tuple(float(b) for b in cfg.spectrum.betas),
        "spectrum.levels": cfg.spectrum.levels,
        "twomode.branch": cfg.spectrum.branch,
        **{f"check.{name}": float(getattr(cfg.checks, name)) for name in _CHECK_KEYS},
    }


def from_flat(values: dict, base: RunConfig | None = None) -> RunConfig:
    """Build a config from (possibly partial) dotted keys layered over ``base``."""
    unknown = set(values) - set(_PARSERS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    flat = to_flat(base or RunConfig())
    for key, raw in values.items():
        try:
            flat[key] = _PARSERS[key](raw) if isinstance(raw, str) else _coerce(key, raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc

    kind = flat["trajectory.kind"].lower()
    try:
        if kind == "uniform":
            traj = Uniform(flat["trajectory.beta"])
        elif kind == "parametric":
            traj = Parametric(flat["trajectory.epsilon"], flat["trajectory.drive"])
        else:
            raise ConfigError(f"trajectory.kind must be uniform or parametric, got {kind!r}")
        tol = Tolerances(
            ode_tol=flat["ode.tol"],
            defect_tol=flat["symplectic.defect_tol"],
            fock_cutoff=flat["fock.cutoff"],
            norm_tol=flat["fock.norm_tol"],
            leak_tol=flat["fock.leak_tol"],
            sym_tol=flat["check.sym_tol"],
            fock_tol=flat["check.fock_tol"],
            resonance_rel_tol=flat["resonance.rel_tol"],
        )
        cavity = CavityConfig(
            trajectory=traj,
            n_modes=flat["modes"],
            t0=flat["t0"],
            tf=flat["tf"],
            samples=flat["samples"],
            tolerances=tol,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    branch = flat["twomode.branch"].lower()
    if branch not in ("plus", "minus"):
        raise ConfigError("twomode.branch must be plus or minus")
    if flat["spectrum.levels"] < 1:
        raise ConfigError("spectrum.levels must be >= 1")
    erm = ErmakovSettings(*(flat[f"ermakov.{f.name}"] for f in fields(ErmakovSettings)))
    if erm.omega0 <= 0 or erm.omega_f <= 0 or erm.tf <= 0 or erm.samples < 2:
        raise ConfigError("ermakov settings need positive frequencies, duration and >= 2 samples")
    if min(erm.energy_tol, erm.variance_tol, erm.lewis_tol) <= 0:
        raise ConfigError("ermakov tolerances must be positive")
    checks = CheckSettings(**{name: flat[f"check.{name}"] for name in _CHECK_KEYS})
    if min(vars(checks).values()) <= 0:
        raise ConfigError("check thresholds must be positive")
    spectrum = SpectrumSettings(flat["spectrum.betas"], flat["spectrum.levels"], branch)
    return RunConfig(cavity, erm, spectrum, checks)


def _coerce(key, raw):
    parser = _PARSERS[key]
    if parser is _floats:
        return tuple(float(x) for x in np.atleast_1d(raw))
    if parser is _opt_int:
        return None if raw is None else int(raw)
    return parser(raw)


def load(path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return from_flat(json.loads(text))
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError:
        parser.read_string(f"[{SECTION}]\n" + text)
    if not parser.has_section(SECTION):
        raise ConfigError(f"missing [{SECTION}] section in {path}")
    return from_flat(dict(parser.items(SECTION)))


def dumps(cfg: RunConfig, fmt: str = "ini") -> str:
    flat = to_flat(cfg)
    if fmt == "json":
        return json.dumps({k: list(v) if isinstance(v, tuple) else v for k, v in flat.items()}, indent=2) + "\n"
    lines = [f"[{SECTION}]"] + [f"{key} = {_fmt(value)}" for key, value in flat.items()]
    return "\n".join(lines) + "\n"


def save(cfg: RunConfig, path) -> Path:
    path = Path(path)
    path.write_text(dumps(cfg, "json" if path.suffix.lower() == ".json" else "ini"))
    return path


def with_overrides(cfg: RunConfig, **flat_overrides) -> RunConfig:
    """Apply dotted-key overrides given as keyword arguments (dots spelled ``__``)."""
    values = {k.replace("__", "."): v for k, v in flat_overrides.items() if v is not None}
    return from_flat({**to_flat(cfg), **values}) if values else replace(cfg)
