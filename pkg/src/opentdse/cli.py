"""
Command-line front end.

    opentdse run     --config CFG [--mode MODE] [--out DIR]
    opentdse compare --config CFG [--oracle auto|DIR] [--mode MODE] [--out DIR]
    opentdse sweep   --config CFG --var NAME --values LIST [--mode MODE] [--workers N]

Exit status: 0 ok, 2 configuration problem, 3 numerical failure,
4 comparison mismatch.  The default output directory comes from the
config, then from $OPENTDSE_OUT, then ``out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Optional

import numpy as np

from .config_io import dump_config, load_config, with_energy
from .core import validate_config
from .exceptions import ConfigError, DomainError, MisalignedTrajectories, NumericalFailure, TruncatedSupport
from .integrator import run
from .reference import absorption_error, analytic_errors, overlap_error, remap_errors
from .results import Trajectory

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_MISMATCH = 0, 2, 3, 4
CLI_MODES = ("combined", "full", "absorb", "remap", "cut")
SWEEP_VARS = ("energy", "m_exp", "L", "La", "barrier_height")
SERIES_COLUMNS = ["step", "t_fs", "norm_interior", "norm_left_layer", "norm_right_layer", "eps_inj", "eps_ar", "eps_tot"]
ENV_OUT = "OPENTDSE_OUT"

log = logging.getLogger("opentdse")


# ---------------------------------------------------------------- output files


def _cell(v):
    return "" if v is None else repr(float(v))


def series_csv(report, errors: Optional[dict] = None) -> str:
    errors = errors or {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_COLUMNS)
    n = report.norms
    for i, (step, t) in enumerate(zip(report.steps, report.times)):
        eps = [errors[k].values[i] if k in errors else None for k in ("inj", "ar", "tot")]
        w.writerow(
            [int(step), _cell(t), _cell(n["interior"][i]), _cell(n["left_layer"][i]), _cell(n["right_layer"][i])]
            + [_cell(e) for e in eps]
        )
    return buf.getvalue()


def write_snapshots(path: str, traj: Trajectory, mode: str):
    with open(path, "w", encoding="utf-8") as fh:
        header = {"kind": "header", "mode": mode, "dx": traj.dx, "x": traj.x.tolist(), "n_records": len(traj)}
        fh.write(json.dumps(header) + "\n")
        for step, t, snap in zip(traj.steps, traj.times, traj.snapshots):
            rec = {"step": int(step), "t_fs": float(t), "psi": np.column_stack([snap.real, snap.imag]).tolist()}
            fh.write(json.dumps(rec) + "\n")


def read_snapshots(path: str) -> Trajectory:
    """Trajectory from a snapshots.ndjson file (or a directory holding one)."""
    if os.path.isdir(path):
        path = os.path.join(path, "snapshots.ndjson")
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        steps, times, snaps = [], [], []
        for line in fh:
            rec = json.loads(line)
            psi = np.asarray(rec["psi"], dtype=float)
            steps.append(rec["step"])
            times.append(rec["t_fs"])
            snaps.append(psi[:, 0] + 1j * psi[:, 1])
    return Trajectory(np.array(times), np.array(steps), np.array(snaps), np.array(header["x"]), header["dx"])


def _summary(report, extra=None) -> dict:
    out = {
        "mode": report.mode,
        "n_steps": report.n_steps,
        "t_end_fs": float(report.times[-1]),
        "transmission": report.transmission,
        "reflection": report.reflection,
        "residual": report.residual,
        "pending": report.pending,
        "injection_deficit": report.injection_deficit,
        "bookkeeping_total": report.bookkeeping_total,
        "domain_width_nm": report.domain_width,
    }
    out.update(extra or {})
    return out


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit(out_dir, config, report, errors=None, extra=None):
    os.makedirs(out_dir, exist_ok=True)
    table = series_csv(report, errors)
    _write_text(os.path.join(out_dir, "norms.csv"), table)
    _write_text(os.path.join(out_dir, "errors.csv"), table)
    _write_text(os.path.join(out_dir, "config.ini"), dump_config(config))
    _write_text(os.path.join(out_dir, "summary.json"), json.dumps(_summary(report, extra), indent=2, sort_keys=True) + "\n")
    if {"ndjson", "snapshot"} & set(config.outputs.formats) or report.mode == "full":
        write_snapshots(os.path.join(out_dir, "snapshots.ndjson"), report.trajectory, report.mode)


def _log_to(out_dir, message):
    # wall-clock data lives only in run.log so data files stay reproducible
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "run.log"), "a", encoding="utf-8") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {message}\n")


# ---------------------------------------------------------------- commands


def _load(args):
    config = load_config(args.config)
    problems = validate_config(config, mode=args.mode)
    if problems:
        raise ConfigError(problems)
    out = args.out or (config.outputs.out_dir if config.outputs.out_dir != "out" else os.environ.get(ENV_OUT, "out"))
    return config, out


def _run_steps(config, mode):
    # reference modes lose no probability, so the norm rule cannot end them
    if mode != "combined" and config.n_steps is None and config.stop_rule == "norm":
        return replace(config, stop_rule="tail")
    return config


def cmd_run(args) -> int:
    config, out = _load(args)
    report = run(_run_steps(config, args.mode), args.mode)
    _emit(out, config, report)
    _log_to(out, f"run mode={args.mode} steps={report.n_steps} wall={report.wall_clock:.3f}s")
    print(f"{args.mode}: {report.n_steps} steps, T={report.transmission:.6g} R={report.reflection:.6g} -> {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config, out = _load(args)
    reduced = run(_run_steps(config, args.mode), args.mode)
    n = reduced.n_steps
    if args.oracle == "auto":
        oracle = run(config, "full", n_steps=n).trajectory
    else:
        oracle = read_snapshots(args.oracle)
        if len(oracle) != len(reduced.trajectory):
            raise MisalignedTrajectories(
                f"oracle has {len(oracle)} records, run has {len(reduced.trajectory)}"
            )
    errors = {"tot": overlap_error(oracle, reduced.trajectory, kind="tot")}
    if args.mode == "combined":
        injected = run(config, "injection", n_steps=n).trajectory
        errors["inj"] = overlap_error(oracle, injected, kind="inj")
        errors["ar"] = overlap_error(injected, reduced.trajectory, kind="ar")
    extra = {f"eps_{k}_max": v.max for k, v in sorted(errors.items())}
    _emit(out, config, reduced, errors, extra)
    _log_to(out, f"compare mode={args.mode} oracle={args.oracle} wall={reduced.wall_clock:.3f}s")
    print(" ".join(f"{k}={v:.6g}" for k, v in extra.items()))
    return EXIT_OK


def parse_values(spec: str):
    """'0.01,0.1,1' or 'start:stop:count' (inclusive linspace)."""
    spec = (spec or "").strip()
    if not spec:
        return []
    if ":" in spec:
        lo, hi, n = spec.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
    return [float(v) for v in spec.split(",") if v.strip()]


def apply_sweep_value(config, var: str, value: float):
    if var == "energy":
        return with_energy(config, value)
    if var == "barrier_height":
        return replace(config, potential=replace(config.potential, barrier_height=value))
    field = {"m_exp": "m_exp", "L": "L", "La": "La"}[var]
    value = int(value) if var == "m_exp" else value
    return replace(
        config,
        left_boundary=replace(config.left_boundary, **{field: value}),
        right_boundary=replace(config.right_boundary, **{field: value}),
    )


def sweep_point(config, mode: str) -> dict:
    """Summary errors of one sweep point (runs in a worker process)."""
    if mode == "combined":
        from .reference import compare_combined

        c = compare_combined(config)
        return c.summary()
    cfg = _run_steps(config, mode)
    if mode == "full":
        g, an = analytic_errors(cfg, n_steps=cfg.n_steps)
        return {"eps_G_max": g.max, "eps_an_max": an.max, "an_not_worse": bool(np.all(an.values <= g.values))}
    n = cfg.n_steps or run(cfg, "full").n_steps
    if mode == "absorb":
        return {"eps_abs": absorption_error(cfg, n).max}
    rem, cut = remap_errors(cfg, n)
    return {"eps_rem_max": rem.max, "eps_cut_max": cut.max} if mode == "remap" else {"eps_cut_max": cut.max}


def _sweep_task(payload):
    config, mode = payload
    try:
        return "ok", sweep_point(config, mode)
    except (NumericalFailure, ConfigError, DomainError, TruncatedSupport, ValueError) as err:
        return f"error: {type(err).__name__}: {err}", {}


def cmd_sweep(args) -> int:
    values = parse_values(args.values)
    if not args.var or not values:
        raise ConfigError(["nothing to sweep"])
    if args.var not in SWEEP_VARS:
        raise ConfigError([f"unknown sweep variable {args.var!r}; choose from {', '.join(SWEEP_VARS)}"])
    base, out = _load(args)
    points = [apply_sweep_value(base, args.var, v) for v in values]
    payload = [(p, args.mode) for p in points]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_task, payload))
    else:
        results = [_sweep_task(p) for p in payload]
    keys = sorted({k for _, r in results for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([args.var, "status"] + keys)
    for v, (status, row) in zip(values, results):
        w.writerow([repr(v), status] + [repr(row[k]) if k in row else "" for k in keys])
    os.makedirs(out, exist_ok=True)
    _write_text(os.path.join(out, "sweep.csv"), buf.getvalue())
    _log_to(out, f"sweep var={args.var} n={len(values)} workers={args.workers}")
    print(buf.getvalue(), end="")
    ok = sum(1 for s, _ in results if s == "ok")
    return EXIT_OK if ok else EXIT_NUMERICAL


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opentdse", description="Open-boundary 1D TDSE simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument("--mode", choices=CLI_MODES, default="combined")
        p.add_argument("--out", default=None, help=f"output directory (default: config, ${ENV_OUT}, ./out)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=None, help="reserved; the solver is deterministic")

    common(sub.add_parser("run", help="run one simulation"))
    p = sub.add_parser("compare", help="run and compare against an oracle")
    common(p)
    p.add_argument("--oracle", default="auto", help="'auto' or a directory/file from 'run --mode full'")
    p = sub.add_parser("sweep", help="sweep one parameter")
    common(p)
    p.add_argument("--var", default=None, help=f"one of {', '.join(SWEEP_VARS)}")
    p.add_argument("--values", default="", help="comma list or start:stop:count")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"run": cmd_run, "compare": cmd_compare, "sweep": cmd_sweep}[args.command]
    try:
        return handler(args)
    except ConfigError as err:
        for v in err.violations:
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, TruncatedSupport, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except MisalignedTrajectories as err:
        print(f"comparison mismatch: {err}", file=sys.stderr)
        return EXIT_MISMATCH
    except NumericalFailure as err:
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
