"""Sampling grid, medium fields, direction sets, phantoms and error metrics.

Cells are indexed row-major over ``(m1, m2)`` with ``m1`` fastest, i.e. the
flat index of cell ``(m1, m2)`` is ``(m2 + M) * 2M + (m1 + M)`` for
``-M <= m1, m2 <= M - 1``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GridError(ValueError):
    """Invalid grid construction or mismatched grids."""


@dataclass(frozen=True)
class Grid:
    """Square domain ``[-S, S]^2`` split into ``(2M)^2`` square cells.

    Parameters
    ----------
    half_width : float
        ``S``, half the side length of the sampling domain.
    half_divisions : int
        ``M``, number of cells along ``[0, S]``.
    """

    half_width: float
    half_divisions: int

    def __post_init__(self):
        S, M = self.half_width, self.half_divisions
        if not (np.isfinite(S) and S > 0):
            raise GridError(f"half width S must be positive, got {S!r}")
        if int(M) != M or M < 1:
            raise GridError(f"half divisions M must be a positive integer, got {M!r}")
        object.__setattr__(self, "half_divisions", int(M))

    @property
    def side(self) -> int:
        return 2 * self.half_divisions

    @property
    def size(self) -> int:
        """Total number of cells ``D = (2M)^2``."""
        return self.side**2

    @property
    def cell_width(self) -> float:
        return self.half_width / self.half_divisions

    @property
    def cell_area(self) -> float:
        return self.cell_width**2

    @cached_property
    def indices(self) -> np.ndarray:
        """``(D, 2)`` integer array of ``(m1, m2)`` in storage order."""
        M = self.half_divisions
        m = np.arange(-M, M)
        m1, m2 = np.meshgrid(m, m, indexing="xy")
        return np.column_stack([m1.ravel(), m2.ravel()])

    @cached_property
    def centers(self) -> np.ndarray:
        """``(D, 2)`` array of cell centres ``((2m1+1)S/2M, (2m2+1)S/2M)``."""
        S, M = self.half_width, self.half_divisions
        return (2 * self.indices + 1) * S / (2 * M)

    def flat_index(self, m1: int, m2: int) -> int:
        M = self.half_divisions
        if not (-M <= m1 < M and -M <= m2 < M):
            raise IndexError(f"cell ({m1}, {m2}) outside grid with M={M}")
        return (m2 + M) * self.side + (m1 + M)

    def to_image(self, values: np.ndarray) -> np.ndarray:
        """Reshape a flat field to ``(2M, 2M)`` with rows indexed by ``m2``."""
        return np.asarray(values).reshape(self.side, self.side)


def make_grid(S: float = 3.0, M: int = 6) -> Grid:
    return Grid(S, M)


@dataclass(frozen=True, eq=False)
class MediumField:
    """Piecewise-constant complex contrast on a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).ravel()
        if vals.size != self.grid.size:
            raise GridError(f"field has {vals.size} values, grid has {self.grid.size} cells")
        if not np.all(np.isfinite(vals)):
            raise GridError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "MediumField":
        return cls(grid, np.zeros(grid.size, dtype=complex))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _check_same_grid(a: MediumField, b: MediumField):
    if a.grid != b.grid:
        raise GridError(f"fields live on different grids: {a.grid} vs {b.grid}")


def unit_directions(count: int) -> np.ndarray:
    """Unit vectors ``(cos(2 pi n / count), sin(2 pi n / count))``, ``n = 1..count``."""
    if int(count) != count or count < 1:
        raise ValueError(f"direction count must be a positive integer, got {count!r}")
    angles = 2.0 * np.pi * (np.arange(1, count + 1) / count)
    return np.column_stack([np.cos(angles), np.sin(angles)])


# Incident directions and observation directions share the same construction.
incident_directions = unit_directions
observation_directions = unit_directions


def _disk_support(centers):
    return np.hypot(centers[:, 0], centers[:, 1]) < 1.0


def _nine_disk_support(centers):
    inside = np.zeros(len(centers), dtype=bool)
    for a in (-1.5, 0.0, 1.5):
        for b in (-1.5, 0.0, 1.5):
            inside |= (centers[:, 0] - a) ** 2 + (centers[:, 1] - b) ** 2 < 0.25
    return inside


PHANTOMS = {"disk": _disk_support, "nine_disks": _nine_disk_support}


def phantom(grid: Grid, kind: str = "disk") -> MediumField:
    """Characteristic function of a test support, sampled at cell centres.

    ``disk`` is the open unit disk; ``nine_disks`` is the union of nine open
    disks of radius 0.5 centred at ``(a, b)`` with ``a, b`` in ``{-1.5, 0, 1.5}``.
    """
    try:
        support = PHANTOMS[kind]
    except KeyError:
        raise ValueError(f"unknown phantom {kind!r}; expected one of {sorted(PHANTOMS)}") from None
    return MediumField(grid, support(grid.centers).astype(float))


def mse(a: MediumField, b: MediumField) -> float:
    """Unweighted squared Euclidean distance between coefficient vectors."""
    _check_same_grid(a, b)
    diff = a.values - b.values
    return float(np.vdot(diff, diff).real)


def inner_product_X(a: MediumField, b: MediumField) -> complex:
    """Discrete L2 inner product ``h^2 * sum(conj(a) * b)``."""
    _check_same_grid(a, b)
    return complex(a.grid.cell_area * np.vdot(a.values, b.values))
