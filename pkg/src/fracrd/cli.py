"""Command-line front end: ``fracrd simulate|verify|sweep|converge CONFIG``.

Exit codes: 0 success, 1 error or failed checks, 2 blow-up detected.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, config_hash, load_config, parse_config, set_path
from .reactions import ParameterError, linf_bounds
from .stepper import BLOWUP, COMPLETED, CSV_COLUMNS, L1_IMEX, ML_MILD, InitialDataError, LinearModeProblem, \
    convergence_study, simulate
from .specfun import SpecialFunctionError
from .verify import run_suite

log = logging.getLogger("fracrd")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BLOWUP = 2


def _fmt(x: float) -> str:
    return "" if math.isnan(x) else f"{x:.16e}"


def write_csv(path: Path, traj) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in traj.rows():
            fh.write(",".join(_fmt(float(x)) for x in row) + "\n")


def write_snapshots(path: Path, traj) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("t,species," + ",".join(f"x{j}" for j in range(traj.dom.n_modes)) + "\n")
        for t, u, v in traj.snapshots:
            for name, vals in (("u", u), ("v", v)):
                fh.write(f"{_fmt(t)},{name}," + ",".join(_fmt(x) for x in vals) + "\n")


def write_plot(path: Path, traj) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fracrd"
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    axes[0].plot(traj.t, traj.linf_u, label="sup u")
    axes[0].plot(traj.t, traj.linf_v, label="sup v")
    axes[0].set_xlabel("t")
    axes[0].legend()
    if np.any(np.isfinite(traj.lyapunov)):
        axes[1].plot(traj.t, traj.lyapunov, label="Lyapunov")
    axes[1].plot(traj.t, traj.mass_u, label="mass u")
    axes[1].plot(traj.t, traj.mass_v, label="mass v")
    axes[1].set_xlabel("t")
    axes[1].legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _dump_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(path: Path) -> None:
    print(f"wrote {path}")


def _run_one(spec, out: Path, seed: int, plot: bool, quiet: bool = False):
    """Simulate one configuration into ``out``; returns (trajectory, written paths)."""
    u0, v0 = spec.initial_fields(seed)
    traj = simulate(u0, v0, spec.dom, spec.dp, spec.kp, spec.solver)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = out / spec.outputs.get("csv", "diagnostics.csv")
    write_csv(csv_path, traj)
    written.append(csv_path)
    if spec.outputs.get("snapshots") and traj.snapshots:
        snap = out / "snapshots.csv"
        write_snapshots(snap, traj)
        written.append(snap)
    if plot or spec.outputs.get("plot"):
        svg = out / "diagnostics.svg"
        write_plot(svg, traj)
        written.append(svg)
    summary = {
        "status": traj.status,
        "regime": traj.regime.tag,
        "regime_overlaps": list(traj.regime.overlaps),
        "t_max_lower_bound": traj.t_max_lower,
        "steps": len(traj) - 1,
        "final_row_flagged": traj.status != COMPLETED,
        "flags": traj.flags,
        "max_linf_u": float(traj.linf_u.max()),
        "max_linf_v": float(traj.linf_v.max()),
        "history_terms": traj.history_terms,
        "config_hash": config_hash(spec.raw),
        "seed": seed,
    }
    if traj.regime.has_lyapunov:
        bu, bv = linf_bounds(traj.regime, traj.data_bound)
        summary.update(Lambda_u=bu, Lambda_v=bv)
    sp = out / "summary.json"
    _dump_json(sp, summary)
    written.append(sp)
    return traj, written


def cmd_simulate(args) -> int:
    spec = load_config(args.config)
    traj, written = _run_one(spec, Path(args.out), args.seed, args.plot)
    tag = traj.regime.tag or "none"
    extra = f" (also matches {', '.join(traj.regime.overlaps)})" if traj.regime.overlaps else ""
    print(f"regime: {tag}{extra}")
    print(f"status: {traj.status}")
    if traj.status != COMPLETED:
        print(f"final row flagged: t = {traj.t[-1]:.16e} (last completed t = {traj.t_max_lower:.16e})")
    for path in written:
        _emit(path)
    if traj.status == BLOWUP:
        return EXIT_BLOWUP
    return EXIT_OK if traj.status == COMPLETED else EXIT_ERROR


def cmd_verify(args) -> int:
    spec = load_config(args.config)
    report = run_suite(spec, seed=args.seed, corrupt=args.corrupt, config_hash=config_hash(spec.raw))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for r in report.results:
        print(f"{'PASS' if r.holds else 'FAIL'}  {r.name}  margin={r.margin:.3e}")
    s = report.summary
    print(f"{s['passed']}/{s['total']} checks hold")
    path = out / "report.json"
    _dump_json(path, report.to_dict())
    _emit(path)
    return EXIT_OK if report.all_hold else EXIT_ERROR


def _sweep_worker(job):
    index, doc, out, seed = job
    row = {"run": index}
    try:
        spec = parse_config(doc)
        traj, _ = _run_one(spec, Path(out), seed, plot=False)
    except (ConfigError, ParameterError, InitialDataError, SpecialFunctionError) as exc:
        row.update(status=f"error: {exc}", regime="", max_linf_u="", max_linf_v="",
                   margin_u="", margin_v="")
        return row
    row.update(status=traj.status, regime=traj.regime.tag or "none",
               max_linf_u=_fmt(traj.linf_u.max()), max_linf_v=_fmt(traj.linf_v.max()),
               margin_u="", margin_v="")
    if traj.regime.has_lyapunov:
        bu, bv = linf_bounds(traj.regime, traj.data_bound)
        row.update(margin_u=_fmt(1.0 - traj.linf_u.max() / bu), margin_v=_fmt(1.0 - traj.linf_v.max() / bv))
    return row


def cmd_sweep(args) -> int:
    spec = load_config(args.config)
    grid = spec.sweep
    if not grid:
        raise ConfigError("sweep", "no parameter grid given")
    keys = sorted(grid)
    base = {k: v for k, v in spec.raw.items() if k != "sweep"}
    out = Path(args.out)
    jobs = []
    points = list(itertools.product(*(grid[k] for k in keys)))
    for i, values in enumerate(points):
        doc = base
        for k, v in zip(keys, values):
            doc = set_path(doc, k, v)
        jobs.append((i, doc, str(out / f"run_{i:03d}"), args.seed))
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        rows = list(pool.map(_sweep_worker, jobs))
    out.mkdir(parents=True, exist_ok=True)
    fields = ["run", *keys, "regime", "status", "max_linf_u", "max_linf_v", "margin_u", "margin_v"]
    path = out / "summary.csv"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row, values in zip(rows, points):
        row.update(dict(zip(keys, values)))
        writer.writerow(row)
    path.write_text(buf.getvalue())
    for row in rows:
        run_dir = out / f"run_{row['run']:03d}"
        for name in sorted(os.listdir(run_dir)) if run_dir.exists() else []:
            _emit(run_dir / name)
    _emit(path)
    failed = [r for r in rows if str(r["status"]).startswith("error")]
    return EXIT_ERROR if failed else EXIT_OK


def cmd_converge(args) -> int:
    spec = load_config(args.config)
    conv = spec.converge
    dt = spec.solver.dt
    dts = conv.get("dts", [dt, dt / 2, dt / 4, dt / 8])
    problem = LinearModeProblem(spec.dp.rho, spec.dp.sigma1, spec.dp.d_u, conv.get("mode", 1),
                                spec.solver.t_end, spec.dom)
    l1 = convergence_study(problem, dts, L1_IMEX)
    ml = convergence_study(problem, dts, ML_MILD)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "convergence.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write("dt,error_l1_imex,error_ml_mild\n")
        for row in zip(l1.dts, l1.errors, ml.errors):
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    print(f"L1_IMEX observed order: {l1.slope:.3f}")
    print("ML_MILD: " + ("exact to tolerance" if ml.slope is None else f"order {ml.slope:.3f}"))
    _emit(path)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "sweep": cmd_sweep, "converge": cmd_converge}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracrd", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", help="JSON run configuration")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="sweep worker processes")
    parser.add_argument("--plot", action="store_true", help="also write an SVG chart")
    parser.add_argument("--corrupt", action="store_true", help="verify: run the checks on broken fixtures")
    return parser


def _setup_logging():
    level = os.environ.get("FRACRD_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
    except (ParameterError, InitialDataError, ValueError, SpecialFunctionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
