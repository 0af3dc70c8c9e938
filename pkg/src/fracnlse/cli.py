"""Batch command-line surface: solve, sweep, constants, verify, plot.

Configuration comes from an INI-style file plus command-line flags, with
flags winning. Every run writes a manifest (parameters, grid, tolerances,
seed, and SHA-256 checksums of the artifacts) sufficient to reproduce it
bit-identically in sequential mode. Exit codes: 0 success, 1 usage or
error, 2 ran but unconverged or failed checks.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .constants import (ConstantsReport, OptimizerConfig, estimate_constants,
                        load_constants, save_constants)
from .fields import field_to_csv, sample, save_field
from .grids import GridSpec, make_grid
from .params import ModelParams, derived_exponents
from .solver import (SolveConfig, diagnose, solve_ground_state, sweep_eta)
from .svg import loglog_svg, profile_svg, write_svg
from .verify import FAIL, PASS, SKIP, run_checks


class CliError(Exception):
    pass


# ----------------------------------------------------------------------
# configuration assembly

_DEFAULTS = {
    "params": {"dim": "1", "s": "0.4", "p": "6.0", "eta": "1.0", "m": "1.0"},
    "grid": {"n": "1024", "L": "40.0"},
    "solve": {"tol_grad": "1e-8", "tol_pohozaev": "1e-8", "step_init": "1e-2",
              "armijo": "1e-4", "max_iters": "50000", "radial_projection_every": "0",
              "seed": "0", "init_width": "", "init_noise": "0.0"},
    "sweep": {"eta": "", "eta_ref": "", "width_ref": ""},
    "constants": {"rungs": "3"},
    "output": {"dir": ""},
}


def _load_config(path: str | None) -> dict:
    conf = {sec: dict(vals) for sec, vals in _DEFAULTS.items()}
    if path:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        read = parser.read(path)
        if not read:
            raise CliError("config file not found: %s" % path)
        for sec in parser.sections():
            conf.setdefault(sec, {}).update({k: v for k, v in parser[sec].items()})
    return conf


def _apply_flags(conf: dict, args: argparse.Namespace) -> dict:
    if getattr(args, "grid", None):
        try:
            dim_s, n_s, L_s = args.grid.split(":")
            conf["params"]["dim"] = str(int(dim_s))
            conf["grid"]["n"] = str(int(n_s))
            conf["grid"]["L"] = repr(float(L_s))
        except ValueError as exc:
            raise CliError("bad --grid value %r (want N:n:L): %s" % (args.grid, exc))
    if getattr(args, "params", None):
        parts = args.params.split(",")
        if len(parts) != 4:
            raise CliError("bad --params value %r (want s,p,eta,m)" % args.params)
        for key, val in zip(("s", "p", "eta", "m"), parts):
            try:
                conf["params"][key] = repr(float(val))
            except ValueError:
                raise CliError("bad --params component %r" % val)
    if getattr(args, "eta", None):
        conf["sweep"]["eta"] = args.eta
    if getattr(args, "seed", None) is not None:
        conf["solve"]["seed"] = str(args.seed)
    if getattr(args, "radial_every", None) is not None:
        conf["solve"]["radial_projection_every"] = str(args.radial_every)
    if getattr(args, "max_iters", None) is not None:
        conf["solve"]["max_iters"] = str(args.max_iters)
    if getattr(args, "tol_grad", None) is not None:
        conf["solve"]["tol_grad"] = repr(args.tol_grad)
    if getattr(args, "tol_pohozaev", None) is not None:
        conf["solve"]["tol_pohozaev"] = repr(args.tol_pohozaev)
    if getattr(args, "init_width", None) is not None:
        conf["solve"]["init_width"] = repr(args.init_width)
    if getattr(args, "init_noise", None) is not None:
        conf["solve"]["init_noise"] = repr(args.init_noise)
    if getattr(args, "rungs", None) is not None:
        conf["constants"]["rungs"] = str(args.rungs)
    if getattr(args, "out", None):
        conf["output"]["dir"] = args.out
    return conf


def _parse_run(conf: dict, command: str):
    try:
        params = ModelParams(dim=int(conf["params"]["dim"]),
                             s=float(conf["params"]["s"]),
                             p=float(conf["params"]["p"]),
                             eta=float(conf["params"]["eta"]),
                             m=float(conf["params"]["m"]))
        grid = make_grid(params.dim, int(conf["grid"]["n"]), float(conf["grid"]["L"]))
        solve_cfg = SolveConfig(
            grid=grid,
            tol_grad=float(conf["solve"]["tol_grad"]),
            tol_pohozaev=float(conf["solve"]["tol_pohozaev"]),
            step_init=float(conf["solve"]["step_init"]),
            armijo=float(conf["solve"]["armijo"]),
            max_iters=int(conf["solve"]["max_iters"]),
            radial_projection_every=int(conf["solve"]["radial_projection_every"]),
            seed=int(conf["solve"]["seed"]),
            init_noise=float(conf["solve"]["init_noise"]),
        )
    except ValueError as exc:
        raise CliError(str(exc))
    width_raw = conf["solve"]["init_width"]
    init_width = float(width_raw) if width_raw else grid.half_length / 10.0
    outdir = Path(conf["output"]["dir"] or ("runs/%s" % command))
    return params, grid, solve_cfg, init_width, outdir


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _write_manifest(outdir: Path, command: str, params: ModelParams | None,
                    grid: GridSpec | None, tolerances: dict, seed: int | None,
                    artifact_names: list) -> None:
    manifest = {
        "command": command,
        "params": None if params is None else {
            "dim": params.dim, "s": params.s, "p": params.p,
            "eta": params.eta, "m": params.m},
        "grid": None if grid is None else {
            "dim": grid.dim, "n": grid.points_per_axis, "L": grid.half_length},
        "tolerances": tolerances,
        "seed": seed,
        "artifacts": {name: _sha256(outdir / name) for name in sorted(artifact_names)},
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dump_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------
# plotting from persisted artifacts (shared by solve/sweep/plot)


def _read_csv_rows(path: Path, expected_min_cols: int) -> list:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < expected_min_cols:
            raise CliError("corrupt CSV %s at line 1 (bad header)" % path)
        for lineno, row in enumerate(reader, start=2):
            if len(row) < expected_min_cols:
                raise CliError("corrupt CSV %s at line %d (short row)" % (path, lineno))
            try:
                rows.append([float(cell) if cell not in ("", "None") else math.nan
                             for cell in row[:expected_min_cols]])
            except ValueError:
                raise CliError("corrupt CSV %s at line %d (non-numeric cell)"
                               % (path, lineno))
    return rows


def _plot_profile(outdir: Path) -> None:
    rows = _read_csv_rows(outdir / "field.csv", 2)
    radii = [math.sqrt(sum(c * c for c in row[:-1])) for row in rows]
    values = [row[-1] for row in rows]
    write_svg(outdir / "profile.svg",
              profile_svg(radii, values, title="converged profile"))


def _plot_sweep(outdir: Path) -> None:
    rows = _read_csv_rows(outdir / "sweep.csv", 2)
    xs = [r[0] for r in rows if not math.isnan(r[1]) and r[1] > 0]
    ys = [r[1] for r in rows if not math.isnan(r[1]) and r[1] > 0]
    if not xs:
        raise CliError("sweep table %s has no positive energies to plot"
                       % (outdir / "sweep.csv"))
    ref = None
    slope_path = outdir / "slope.json"
    if slope_path.exists():
        with open(slope_path) as fh:
            ref = json.load(fh).get("reference_slope")
    write_svg(outdir / "sweep.svg",
              loglog_svg(xs, ys, reference_slope=ref, title="level decay",
                         xlabel="eta", ylabel="energy"))


# ----------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    conf = _apply_flags(_load_config(args.config), args)
    params, grid, solve_cfg, init_width, outdir = _parse_run(conf, "solve")
    outdir.mkdir(parents=True, exist_ok=True)
    constants = load_constants(args.constants) if args.constants else None

    init = sample(grid, "gaussian", {"width": init_width})
    report = solve_ground_state(init, params, solve_cfg, constants=constants)
    diagnostics = None
    if report.converged and constants is not None:
        diagnostics = diagnose(report, constants, params).to_dict()

    with open(outdir / "history.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "energy", "pohozaev_abs", "grad_norm"])
        for i, (e, p_abs, g) in enumerate(report.history):
            writer.writerow([i, "%.17g" % e, "%.17g" % p_abs, "%.17g" % g])
    save_field(report.final_field, outdir / "field.bin", s=params.s)
    field_to_csv(report.final_field, outdir / "field.csv")
    _dump_json(outdir / "report.json", {
        "params": {"dim": params.dim, "s": params.s, "p": params.p,
                   "eta": params.eta, "m": params.m},
        "grid": {"dim": grid.dim, "n": grid.points_per_axis, "L": grid.half_length},
        "config": {"tol_grad": solve_cfg.tol_grad,
                   "tol_pohozaev": solve_cfg.tol_pohozaev,
                   "step_init": solve_cfg.step_init, "armijo": solve_cfg.armijo,
                   "max_iters": solve_cfg.max_iters,
                   "radial_projection_every": solve_cfg.radial_projection_every,
                   "seed": solve_cfg.seed, "init_width": init_width,
                   "init_noise": solve_cfg.init_noise},
        "report": report.to_dict(),
        "diagnostics": diagnostics,
    })
    _plot_profile(outdir)
    _write_manifest(outdir, "solve", params, grid,
                    {"tol_grad": solve_cfg.tol_grad,
                     "tol_pohozaev": solve_cfg.tol_pohozaev},
                    solve_cfg.seed,
                    ["report.json", "history.csv", "field.bin", "field.csv",
                     "profile.svg"])
    print("solve: converged=%s E=%.8g mu=%.6g |P|/A=%.3e iterations=%d"
          % (report.converged, report.energy_level, report.mu,
             report.pohozaev_residual, report.iterations))
    return 0 if report.converged else 2


def cmd_sweep(args) -> int:
    conf = _apply_flags(_load_config(args.config), args)
    params, grid, solve_cfg, init_width, outdir = _parse_run(conf, "sweep")
    eta_raw = conf["sweep"]["eta"].strip()
    if not eta_raw:
        raise CliError("sweep needs a non-empty eta list (--eta or [sweep] eta)")
    try:
        etas = [float(tok) for tok in eta_raw.split(",") if tok.strip()]
    except ValueError:
        raise CliError("bad eta list %r" % eta_raw)
    if not etas:
        raise CliError("sweep needs a non-empty eta list (--eta or [sweep] eta)")
    eta_ref = float(conf["sweep"]["eta_ref"]) if conf["sweep"]["eta_ref"] else None
    width_ref_raw = conf["sweep"]["width_ref"]
    width_ref = float(width_ref_raw) if width_ref_raw else (
        float(conf["solve"]["init_width"]) if conf["solve"]["init_width"] else None)
    outdir.mkdir(parents=True, exist_ok=True)

    base = replace(params, eta=etas[0])
    try:
        sweep = sweep_eta(base, etas, solve_cfg, eta_ref=eta_ref, width_ref=width_ref)
    except ValueError as exc:
        raise CliError(str(exc))

    with open(outdir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eta", "energy", "mu", "poho_residual", "iterations",
                         "converged", "error"])
        for e in sweep.entries:
            writer.writerow([
                "%.17g" % e.eta,
                "" if e.energy is None else "%.17g" % e.energy,
                "" if e.mu is None else "%.17g" % e.mu,
                "" if e.pohozaev_residual is None else "%.17g" % e.pohozaev_residual,
                e.iterations, int(e.converged), e.error or ""])
    _dump_json(outdir / "slope.json", {
        "slope": sweep.slope,
        "reference_slope": sweep.reference_slope,
        "eta_ref": sweep.eta_ref,
        "half_length_ref": sweep.half_length_ref,
        "width_ref": sweep.width_ref,
        "note": sweep.note,
        "entries": len(sweep.entries),
    })
    _plot_sweep(outdir)
    _write_manifest(outdir, "sweep", params, grid,
                    {"tol_grad": solve_cfg.tol_grad,
                     "tol_pohozaev": solve_cfg.tol_pohozaev},
                    solve_cfg.seed,
                    ["sweep.csv", "slope.json", "sweep.svg"])
    for e in sweep.entries:
        print("eta=%-10g E=%-14s mu=%-14s converged=%s%s"
              % (e.eta,
                 "n/a" if e.energy is None else "%.6g" % e.energy,
                 "n/a" if e.mu is None else "%.6g" % e.mu,
                 e.converged, (" error=" + e.error) if e.error else ""))
    if sweep.slope is not None:
        print("fitted slope %.4f (reference %.4f)" % (sweep.slope, sweep.reference_slope))
    else:
        print("no slope fitted: %s" % sweep.note)
    all_ok = all(e.converged for e in sweep.entries)
    return 0 if all_ok else 2


def cmd_constants(args) -> int:
    conf = _apply_flags(_load_config(args.config), args)
    params, grid, _, _, outdir = _parse_run(conf, "constants")
    rungs = int(conf["constants"]["rungs"])
    if rungs < 1:
        raise CliError("constants ladder needs at least one rung")
    outdir.mkdir(parents=True, exist_ok=True)
    report = estimate_constants(grid, params, OptimizerConfig(), rungs=rungs)
    save_constants(report, outdir / "constants.json")
    _write_manifest(outdir, "constants", params, grid, {"rungs": rungs},
                    None, ["constants.json"])
    print("constants: S_est=%.6g C_est=%.6g converged=%s"
          % (report.S_est, report.C_est, report.converged))
    for label, trace in sorted(report.refinement.items()):
        print("  %s trace: %s" % (label, ", ".join("n=%d %.6g" % (n, v)
                                                   for n, v in trace)))
    return 0 if report.converged else 2


def cmd_verify(args) -> int:
    constants = load_constants(args.constants) if args.constants else None
    rows = run_checks(constants=constants)
    width = max(len(r.name) for r in rows)
    for r in rows:
        print("%-*s  %-4s  %s" % (width, r.name, r.status, r.detail))
    n_fail = sum(1 for r in rows if r.status == FAIL)
    n_skip = sum(1 for r in rows if r.status == SKIP)
    print("verify: %d pass, %d fail, %d skipped"
          % (sum(1 for r in rows if r.status == PASS), n_fail, n_skip))
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        _dump_json(outdir / "verify.json",
                   {"rows": [{"name": r.name, "status": r.status, "detail": r.detail}
                             for r in rows]})
    if n_fail or n_skip:
        return 2
    return 0


def cmd_plot(args) -> int:
    if not args.out:
        raise CliError("plot needs --out pointing at a run directory")
    outdir = Path(args.out)
    made = 0
    if (outdir / "field.csv").exists():
        _plot_profile(outdir)
        print("wrote %s" % (outdir / "profile.svg"))
        made += 1
    if (outdir / "sweep.csv").exists():
        _plot_sweep(outdir)
        print("wrote %s" % (outdir / "sweep.svg"))
        made += 1
    if made == 0:
        raise CliError("no plottable inputs (field.csv or sweep.csv) in %s" % outdir)
    return 0


# ----------------------------------------------------------------------
# argument parsing


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="INI config file; flags override it")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--grid", help="grid as N:n:L")
    sub.add_argument("--params", help="model parameters as s,p,eta,m")
    sub.add_argument("--seed", type=int, help="seed for initializer perturbation")
    sub.add_argument("--radial-every", type=int, dest="radial_every",
                     help="symmetrize every k iterations (0 = off)")
    sub.add_argument("--constants", help="path to a constants report JSON")
    sub.add_argument("--max-iters", type=int, dest="max_iters")
    sub.add_argument("--tol-grad", type=float, dest="tol_grad")
    sub.add_argument("--tol-pohozaev", type=float, dest="tol_pohozaev")
    sub.add_argument("--init-width", type=float, dest="init_width")
    sub.add_argument("--init-noise", type=float, dest="init_noise")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracnlse",
        description="Ground-state laboratory for a fractional NLS energy "
                    "with combined critical and subcritical nonlinearities.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("solve", cmd_solve), ("sweep", cmd_sweep),
                     ("constants", cmd_constants), ("verify", cmd_verify),
                     ("plot", cmd_plot)):
        sub = subs.add_parser(name)
        _add_common(sub)
        if name == "sweep":
            sub.add_argument("--eta", help="comma-separated coupling list")
        if name == "constants":
            sub.add_argument("--rungs", type=int, help="refinement ladder length")
        sub.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
