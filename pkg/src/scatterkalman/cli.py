"""Command-line front end.

    scatter-kalman <subcommand> --config <path> --out <dir> [--set key=value ...] [--workers n]

Subcommands: ``forward``, ``synth``, ``reconstruct``, ``equivalence``, ``sweep``.
"""

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunSettings, load_settings, parse_config  # noqa: F401
from .experiments import equivalence_harness, run_reconstruction, synthesize_measurements, true_field
from .filters import RegularizationSchedule
from .grid import MediumField
from .io import write_complex_table, write_field_csv, write_manifest, write_mse_csv, write_pgm

SUBCOMMANDS = ("forward", "synth", "reconstruct", "equivalence", "sweep")


class ArtifactError(RuntimeError):
    pass


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _prepare_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ArtifactError(f"output directory {out} is not writable: {exc}") from None
    return out


def _manifest(settings: RunSettings, command: str, status: str, started: str, **extra) -> dict:
    payload = {
        "command": command,
        "status": status,
        "code_version": __version__,
        "seed": settings.scenario.seed,
        "config": settings.scenario.as_dict(),
        "output": {"snapshots": settings.output.snapshots, "timing": settings.output.timing},
        "started": started,
        "finished": _now(),
    }
    if settings.sweep is not None:
        payload["sweep"] = {"axis": settings.sweep.axis, "values": list(settings.sweep.values),
                            "algorithms": list(settings.sweep.algorithms)}
    payload.update(extra)
    return payload


def _write_field(out: Path, stem: str, field: MediumField):
    write_field_csv(out / f"{stem}.csv", field)
    write_pgm(out / f"{stem}.pgm", field)


def run_forward(settings: RunSettings, out: Path) -> dict:
    cfg = settings.scenario
    model = cfg.model()
    truth = true_field(cfg)
    lin = model.linearize(truth.values)
    _write_field(out, "phantom", truth)
    write_complex_table(out / "far_field.csv", lin.far.T, header_prefix="j")
    write_complex_table(out / "total_field.csv", lin.total, header_prefix="n")
    return {"artifacts": ["phantom.csv", "phantom.pgm", "far_field.csv", "total_field.csv"]}


def run_synth(settings: RunSettings, out: Path) -> dict:
    cfg = settings.scenario
    model = cfg.model()
    truth = true_field(cfg)
    meas = synthesize_measurements(truth.values, cfg, model)
    write_complex_table(out / "measurements.csv", meas.data, header_prefix="j")
    _write_field(out, "phantom", truth)
    return {"artifacts": ["measurements.csv", "phantom.csv", "phantom.pgm"]}


def run_reconstruct(settings: RunSettings, out: Path) -> dict:
    """Write mse.csv, the final estimate and optional snapshots; return manifest extras."""
    cfg = settings.scenario
    model = cfg.model()
    truth = true_field(cfg)
    meas = synthesize_measurements(truth.values, cfg, model)
    history = run_reconstruction(cfg, meas, truth.values, model)

    write_mse_csv(out / "mse.csv", history.errors, history.wall_ms if settings.output.timing else None)
    _write_field(out, "truth", truth)
    _write_field(out, "final", MediumField(cfg.grid, history.final))
    artifacts = ["mse.csv", "truth.csv", "truth.pgm", "final.csv", "final.pgm"]
    if settings.output.snapshots:
        snap = out / "snapshots"
        snap.mkdir(exist_ok=True)
        for i, est in enumerate(history.estimates):
            _write_field(snap, f"iter_{i:03d}", MediumField(cfg.grid, est))
        artifacts.append("snapshots/")
    extras = {
        "artifacts": artifacts,
        "iterations_completed": len(history.errors) - 1,
        "final_mse": history.errors[-1],
        "alphas": history.alphas,
    }
    if history.failed:
        extras["error"] = history.error
    return extras


def run_equivalence(settings: RunSettings, out: Path, scale: str = "tiny") -> dict:
    report = equivalence_harness(scale, seed=settings.scenario.seed)
    report["linear_passed"] = report["linear_max"] <= 1e-10
    report["nonlinear_passed"] = report["nonlinear_max"] <= 1e-8
    write_manifest(out / "equivalence.json", report)
    print(f"linear (Kalman sweep vs full Tikhonov): max rel. deviation {report['linear_max']:.3e}")
    print(f"nonlinear (KFL sweep vs full LM step): max rel. deviation {report['nonlinear_max']:.3e}")
    return {"artifacts": ["equivalence.json"], "report": report}


def _cell_settings(settings: RunSettings, axis: str, value: float, algorithm: str) -> RunSettings:
    cfg = settings.scenario
    if axis == "sigma":
        cfg = replace(cfg, sigma=value, algorithm=algorithm)
    else:
        cfg = replace(cfg, schedule=RegularizationSchedule("constant", value, cfg.schedule.rho),
                      algorithm=algorithm)
    return replace(settings, scenario=cfg, sweep=None)


def _run_cell(args):
    settings, out, axis, value, algorithm = args
    cell = _cell_settings(settings, axis, value, algorithm)
    started = _now()
    try:
        extras = run_reconstruct(cell, out)
        status = "FAILED" if "error" in extras else "OK"
    except Exception as exc:  # one bad cell must not abort the sweep
        extras = {"error": f"{type(exc).__name__}: {exc}"}
        status = "FAILED"
    write_manifest(out / "manifest.json", _manifest(cell, "reconstruct", status, started, **extras))
    errors = []
    mse_path = out / "mse.csv"
    if mse_path.exists():
        with open(mse_path, newline="") as fh:
            errors = [float(r["mse"]) for r in csv.DictReader(fh)]
    return axis, value, algorithm, status, errors


def run_sweep(settings: RunSettings, out: Path, workers: int = 1) -> dict:
    spec = settings.sweep
    if spec is None:
        raise ConfigError("sweep needs [sweep] axis and values", key="values")
    jobs = []
    for value in spec.values:
        for algorithm in spec.algorithms:
            cell_dir = out / f"{spec.axis}_{value:g}" / algorithm
            cell_dir.mkdir(parents=True, exist_ok=True)
            jobs.append((settings, cell_dir, spec.axis, value, algorithm))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(job) for job in jobs]

    failed = 0
    with open(out / "sweep_summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([spec.axis, "algorithm", "status", "final_mse", "min_mse", "min_iteration"])
        for axis, value, algorithm, status, errors in results:
            failed += status != "OK"
            if errors:
                best = int(np.argmin(errors))
                row = [format(value, "g"), algorithm, status, format(errors[-1], ".17g"),
                       format(errors[best], ".17g"), best]
            else:
                row = [format(value, "g"), algorithm, status, "", "", ""]
            writer.writerow(row)
    extras = {"artifacts": ["sweep_summary.csv"], "cells": len(results), "failed_cells": failed}
    if failed:
        extras["error"] = f"{failed} of {len(results)} sweep cells failed"
    return extras


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scatter-kalman", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="scenario file (INI style)")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--workers", type=int, default=1)
        if name == "equivalence":
            p.add_argument("--scale", choices=("tiny", "full"), default="tiny")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = _now()
    try:
        settings = load_settings(args.config, args.overrides)
        out = _prepare_out(args.out)
    except (ConfigError, ArtifactError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    status, extras = "OK", {}
    try:
        if args.command == "forward":
            extras = run_forward(settings, out)
        elif args.command == "synth":
            extras = run_synth(settings, out)
        elif args.command == "reconstruct":
            extras = run_reconstruct(settings, out)
        elif args.command == "equivalence":
            extras = run_equivalence(settings, out, args.scale)
        else:
            extras = run_sweep(settings, out, max(1, args.workers))
        if "error" in extras:
            status = "FAILED"
    except Exception as exc:
        status = "FAILED"
        extras = {"error": f"{type(exc).__name__}: {exc}"}

    try:
        write_manifest(out / "manifest.json", _manifest(settings, args.command, status, started, **extras))
    except OSError as exc:
        print(f"error: ArtifactError: could not write manifest: {exc}", file=sys.stderr)
        return 1
    if status != "OK":
        print(f"error: {extras.get('error')}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
