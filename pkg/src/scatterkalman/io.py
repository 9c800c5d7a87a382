"""Plain-text artifacts: field CSV and PGM images, MSE tables and run manifests.

Field CSV layout: one row per ``m2`` (ascending); each row holds the real
parts for ``m1`` ascending followed by the imaginary parts in the same order,
so a row has ``4M`` columns. Numbers are written with 17 significant digits,
which round-trips float64 exactly and keeps repeated runs byte-identical.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .grid import Grid, MediumField


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field_csv(path, field: MediumField) -> None:
    img = field.grid.to_image(field.values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in img:
            writer.writerow([_fmt(v) for v in row.real] + [_fmt(v) for v in row.imag])


def read_field_csv(path, grid: Grid) -> MediumField:
    rows = np.loadtxt(path, delimiter=",", ndmin=2)
    n = grid.side
    if rows.shape != (n, 2 * n):
        raise ValueError(f"{path}: expected {n} rows of {2 * n} columns, got {rows.shape}")
    return MediumField(grid, (rows[:, :n] + 1j * rows[:, n:]).ravel())


def write_pgm(path, field: MediumField, maxval: int = 255) -> None:
    """ASCII (P2) grayscale image of the real part, scaled linearly to ``[min, max]``.

    The top image row is the largest ``m2`` so the picture has ``y`` pointing up.
    """
    img = field.grid.to_image(field.values.real)[::-1]
    lo, hi = float(img.min()), float(img.max())
    if hi > lo:
        levels = np.rint((img - lo) / (hi - lo) * maxval).astype(int)
    else:
        levels = np.zeros(img.shape, dtype=int)
    lines = ["P2", f"{img.shape[1]} {img.shape[0]}", str(maxval)]
    lines += [" ".join(str(v) for v in row) for row in levels]
    Path(path).write_text("\n".join(lines) + "\n")


def read_pgm(path) -> np.ndarray:
    tokens = [t for line in Path(path).read_text().splitlines()
              if not line.startswith("#") for t in line.split()]
    if tokens[0] != "P2":
        raise ValueError(f"{path}: not an ASCII PGM file")
    width, height = int(tokens[1]), int(tokens[2])
    return np.array(tokens[4:], dtype=int).reshape(height, width)


def write_complex_table(path, table: np.ndarray, header_prefix: str = "col") -> None:
    """Write a 2-D complex array as CSV with a real block then an imaginary block."""
    table = np.atleast_2d(table)
    cols = table.shape[1]
    header = [f"re_{header_prefix}{j}" for j in range(cols)] + [f"im_{header_prefix}{j}" for j in range(cols)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in table:
            writer.writerow([_fmt(v) for v in row.real] + [_fmt(v) for v in row.imag])


def read_complex_table(path) -> np.ndarray:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    half = rows.shape[1] // 2
    return rows[:, :half] + 1j * rows[:, half:]


def write_mse_csv(path, errors, wall_ms=None) -> None:
    """``iteration,mse,wall_ms``; ``wall_ms`` is left empty when timings are not recorded."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "mse", "wall_ms"])
        for i, e in enumerate(errors):
            wall = "" if wall_ms is None else format(wall_ms[i], ".3f")
            writer.writerow([i, _fmt(e), wall])


def read_mse_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["mse"]) for r in rows]


def write_manifest(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
