"""``casimir-kit`` command line.

Exit codes: 0 when every check passes, 1 when a numerical check fails,
2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import checks, config, ermakov, twomode
from .core import CasimirError, Parametric, Uniform

log = logging.getLogger("casimir_kit")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
REL_FLOOR = 1e-12  # denominator floor for relative-error columns


class UsageError(Exception):
    pass


# --- output helpers -----------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return "%.17g" % float(value)


def write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    log.info("wrote %s (%d rows)", path, len(lines) - 1)
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, subcommand: str, cfg: config.RunConfig, outputs: list[Path],
                   results: list[checks.CheckResult], extra: dict | None = None) -> Path:
    flat = {k: list(v) if isinstance(v, tuple) else v for k, v in config.to_flat(cfg).items()}
    inputs = json.dumps({"subcommand": subcommand, "config": flat}, sort_keys=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "config": flat,
        "input_hash": hashlib.sha256(inputs.encode()).hexdigest(),
        "outputs": [{"path": p.name, "sha256": _sha256(p)} for p in outputs],
        "checks": [r.as_dict() for r in results],
        "passed": all(r.passed for r in results),
    }
    if extra:
        manifest.update(extra)
    path = out / f"{subcommand}.manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n")
    return path


def _rel(x, ref):
    return np.abs(x - ref) / np.maximum(np.abs(ref), REL_FLOOR)


def _finish(results: list[checks.CheckResult]) -> int:
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --- subcommands -------------------------------------------------------------

def _betas(args, cfg) -> list[float]:
    if args.beta is not None:
        return list(args.beta)
    traj = cfg.cavity.trajectory
    return [traj.beta] if isinstance(traj, Uniform) else []


def cmd_photons(cfg: config.RunConfig, args, out: Path) -> int:
    traj = cfg.cavity.trajectory
    if isinstance(traj, Parametric):
        return _photons_parametric(cfg, out, "photons")
    betas = _betas(args, cfg)
    if not betas:
        raise UsageError("no velocity given")
    for b in betas:
        if abs(b) >= 2.0 * np.pi:
            raise UsageError(f"|beta| = {abs(b)} is outside the range of the single-mode solution")
    tol = cfg.cavity.tolerances
    grid = cfg.cavity.grid()
    n_modes = cfg.cavity.n_modes
    if n_modes > 2:
        raise UsageError("photons compares solvers for one or two modes; use --modes 1 or 2")

    def job(beta):
        if n_modes == 1:
            return checks.uniform_curves(beta, grid, cfg.cavity.cutoff(), cfg)
        return checks.twomode_bound(beta, grid[-1], grid.size, tol.fock_cutoff or 12, cfg)

    with ThreadPoolExecutor(max_workers=checks.worker_count()) as pool:
        curves = list(pool.map(job, betas))

    outputs, results = [], []
    for beta, c in zip(betas, curves):
        name = "photons.csv" if len(betas) == 1 else f"photons_beta_{beta:g}.csv"
        if n_modes == 1:
            rows = zip(c.t, c.analytic, c.symplectic, c.fock, _rel(c.symplectic, c.analytic), _rel(c.fock, c.analytic))
            outputs.append(write_csv(out / name, ["t", "n_analytic", "n_symplectic", "n_fock", "rel_err_sym",
                                                  "rel_err_fock"], rows))
            results += [
                checks._result(f"photons.symplectic[beta={beta:g}]", np.max(np.abs(c.symplectic - c.analytic)),
                               tol.sym_tol),
                checks._result(f"photons.fock[beta={beta:g}]", np.max(np.abs(c.fock - c.analytic)), tol.fock_tol),
                checks._result(f"fock.norm_drift[beta={beta:g}]", c.norm_drift, tol.norm_tol),
            ]
        else:
            rows = zip(c.t, c.symplectic[:, 0], c.symplectic[:, 1], c.fock[:, 0], c.fock[:, 1])
            outputs.append(write_csv(out / name, ["t", "n1_symplectic", "n2_symplectic", "n1_fock", "n2_fock"], rows))
            results.append(checks._result(f"photons.two_mode_fock[beta={beta:g}]",
                                          np.max(np.abs(c.fock - c.symplectic)), tol.fock_tol))
    outputs.append(write_manifest(out, "photons", cfg, outputs, results))
    return _finish(results)


def _photons_parametric(cfg: config.RunConfig, out: Path, name: str) -> int:
    traj = cfg.cavity.trajectory
    tol = cfg.cavity.tolerances
    grid = checks.resonance_grid(cfg, traj.drive)
    c = checks.resonance_curves(traj.epsilon, traj.drive, grid, cfg.cavity.cutoff(), cfg)
    rows = zip(c.t, c.analytic, c.fock, _rel(c.fock, c.analytic))
    csv = write_csv(out / f"{name}.csv", ["t", "n_analytic", "n_fock", "rel_err_fock"], rows)
    window = c.strobe
    leak = float(np.max(c.leakage[: window[-1] + 1])) if window.size else float(np.max(c.leakage))
    results = [
        checks._result(f"resonance.sinh2_law[eps={traj.epsilon:g}]", checks.resonance_error(c),
                       tol.resonance_rel_tol, "whole drive periods 1..8"),
        checks._result("resonance.leakage", leak, tol.leak_tol, "up to the last compared period"),
        checks._result("fock.norm_drift", c.norm_drift, tol.norm_tol),
    ]
    if window.size == 0:
        results[0].detail = "grid contains no whole drive period in 1..8"
    extra = {"leakage_full_window": float(np.max(c.leakage))}
    write_manifest(out, name, cfg, [csv], results, extra)
    return _finish(results)


def cmd_resonance(cfg: config.RunConfig, args, out: Path) -> int:
    traj = cfg.cavity.trajectory
    if not isinstance(traj, Parametric):
        eps = args.epsilon if args.epsilon is not None else 0.15
        cfg = config.from_flat({"trajectory.kind": "parametric", "trajectory.epsilon": eps}, cfg)
    return _photons_parametric(cfg, out, "resonance")


def cmd_spectrum(cfg: config.RunConfig, args, out: Path) -> int:
    betas = list(args.beta) if args.beta is not None else list(cfg.spectrum.betas)
    if not betas:
        raise UsageError("empty velocity sweep")
    bound = twomode.velocity_bound()
    for b in betas:
        if abs(b) >= bound:
            raise UsageError(f"|beta| = {abs(b)} violates the velocity bound {bound:.6f}")
    levels, branch = cfg.spectrum.levels, cfg.spectrum.branch
    tol = cfg.checks.degeneracy_tol

    def job(beta):
        coupled = twomode.spectrum(beta, levels, "coupled", branch)
        uncoupled = [e for e, _ in twomode.spectrum(beta, levels, "uncoupled")]
        return coupled, uncoupled

    with ThreadPoolExecutor(max_workers=checks.worker_count()) as pool:
        data = list(pool.map(job, betas))

    rows, summary = [], []
    for beta, (coupled, uncoupled) in zip(betas, data):
        for rank, (e, (m, n)) in enumerate(coupled):
            rows.append((beta, rank, m, n, e, twomode.eigenvalue(m, n, beta, "uncoupled")))
        ec = [e for e, _ in coupled]
        summary.append((beta, len(twomode.distinct_values(ec, tol)), len(twomode.distinct_values(uncoupled, tol)),
                        twomode.degenerate_count(beta, levels, "uncoupled", tol=tol)))
    main = write_csv(out / "spectrum.csv", ["beta", "rank", "m", "n", "E_coupled", "E_uncoupled"], rows)
    summ = write_csv(out / "spectrum_summary.csv",
                     ["beta", "distinct_coupled", "distinct_uncoupled", "degenerate_uncoupled"], summary)
    write_manifest(out, "spectrum", cfg, [main, summ], [])
    for row in summary:
        print(f"beta={row[0]:g}: {row[1]} distinct coupled, {row[2]} distinct uncoupled levels")
    return EXIT_OK


def cmd_ermakov(cfg: config.RunConfig, args, out: Path) -> int:
    e = cfg.ermakov
    ramp = ermakov.design_sta(e.omega0, e.omega_f, e.tf)
    res = ermakov.sta_energy_check(ramp, samples=e.samples)
    rows = zip(res.t, res.rho, res.rho_dot, res.omega_induced, res.lewis_drift, res.energy_ratio_running)
    csv = write_csv(out / "ermakov.csv",
                    ["t", "rho", "rho_dot", "omega_induced", "lewis_drift", "energy_ratio_running"], rows)
    results = [
        checks._result("ermakov.energy_ratio", abs(res.energy_ratio - e.omega_f / e.omega0), e.energy_tol),
        checks._result("ermakov.variance_ratio", abs(res.variance_ratio - e.omega0 / e.omega_f), e.variance_tol),
        checks._result("ermakov.lewis_drift", res.max_lewis_drift, e.lewis_tol),
    ]
    windows = [list(w) for w in res.negative_windows]
    if windows:
        print(f"note: induced omega^2 < 0 on {windows}", file=sys.stderr)
    write_manifest(out, "ermakov", cfg, [csv], results, {"negative_omega2_windows": windows})
    return _finish(results)


def cmd_verify(cfg: config.RunConfig, args, out: Path) -> int:
    traj = cfg.cavity.trajectory
    if isinstance(traj, Uniform) and abs(traj.beta) >= twomode.velocity_bound():
        raise UsageError(f"|beta| = {abs(traj.beta)} violates the velocity bound {twomode.velocity_bound():.6f}")
    results = checks.run_all(cfg)
    report = {
        "schema_version": SCHEMA_VERSION,
        "passed": all(r.passed for r in results),
        "checks": [r.as_dict() for r in results],
    }
    path = out / "verify.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    write_manifest(out, "verify", cfg, [path], results)
    return _finish(results)


COMMANDS = {
    "photons": cmd_photons,
    "resonance": cmd_resonance,
    "spectrum": cmd_spectrum,
    "ermakov": cmd_ermakov,
    "verify": cmd_verify,
}


# --- argument handling -------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI or JSON run configuration")
    common.add_argument("--out", type=Path, default=Path("casimir-out"), help="output directory")
    common.add_argument("--beta", type=_float_list, help="mirror velocity (comma list for sweeps)")
    common.add_argument("--epsilon", type=float, help="modulation amplitude for parametric runs")
    common.add_argument("--tmax", type=float, help="end of the time window")
    common.add_argument("--samples", type=int, help="number of time samples")
    common.add_argument("--cutoff", type=int, help="Fock cutoff per mode")
    common.add_argument("--modes", type=int, help="number of cavity modes")
    common.add_argument("--branch", choices=twomode.BRANCHES, help="two-mode diagonalization branch")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="casimir-kit", description="Photon creation in a cavity with a moving mirror.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "photons": "photon number from vacuum: closed form, Gaussian and Fock solvers",
        "resonance": "parametric resonance run (photons with an oscillating mirror)",
        "spectrum": "lowest two-mode eigenvalues over a velocity sweep",
        "ermakov": "shortcut-to-adiabaticity stroke of a trapped oscillator",
        "verify": "run every cross-check and write a JSON report",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def resolve_config(args) -> config.RunConfig:
    cfg = config.load(args.config) if args.config else config.RunConfig()
    over = {}
    if args.beta is not None and args.command in ("photons", "verify") and len(args.beta) == 1:
        over["trajectory.kind"] = "uniform"
        over["trajectory.beta"] = args.beta[0]
    if args.epsilon is not None:
        over["trajectory.kind"] = "parametric"
        over["trajectory.epsilon"] = args.epsilon
    if args.tmax is not None:
        over["tf"] = args.tmax
    if args.samples is not None:
        over["samples"] = args.samples
    if args.cutoff is not None:
        over["fock.cutoff"] = args.cutoff
    if args.modes is not None:
        over["modes"] = args.modes
    if args.branch is not None:
        over["twomode.branch"] = args.branch
    if args.command == "spectrum" and args.beta is not None:
        over["spectrum.betas"] = tuple(args.beta)
    return config.from_flat(over, cfg) if over else cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](cfg, args, args.out)
    except (UsageError, config.ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CasimirError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
