"""Finite dyadic geometry over [0,1)^n and exact integration of
piecewise-constant functions.

Cells are the level-``L`` dyadic cubes.  A :class:`GridFunction` stores one
value per cell in lexicographic order of the integer cell coordinates
(first axis slowest), i.e. C order of an array of shape ``(2**L,) * n``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np


class DomainError(ValueError):
    """A cube or level does not belong to the grid."""


@dataclass(frozen=True, order=True)
class DyadicCube:
    level: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if self.level < 0:
            raise DomainError(f"negative level {self.level}")
        side = 1 << self.level
        for c in self.coords:
            if not 0 <= c < side:
                raise DomainError(f"coordinate {c} outside [0, {side}) at level {self.level}")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def side(self) -> float:
        return 2.0 ** -self.level

    @property
    def measure(self) -> float:
        return 2.0 ** (-self.level * self.n)

    @property
    def index(self) -> int:
        """Flat position of the cube among the cubes of its level."""
        idx = 0
        for c in self.coords:
            idx = (idx << self.level) | c
        return idx

    @classmethod
    def root(cls, n: int) -> "DyadicCube":
        return cls(0, (0,) * n)

    @classmethod
    def from_index(cls, level: int, index: int, n: int) -> "DyadicCube":
        mask = (1 << level) - 1
        coords = []
        for _ in range(n):
            coords.append(index & mask)
            index >>= level
        return cls(level, tuple(reversed(coords)))

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise DomainError("the root cube has no parent")
        return DyadicCube(self.level - 1, tuple(c >> 1 for c in self.coords))

    def ancestor(self, level: int) -> "DyadicCube":
        if not 0 <= level <= self.level:
            raise DomainError(f"no ancestor at level {level} for {self}")
        shift = self.level - level
        return DyadicCube(level, tuple(c >> shift for c in self.coords))

    def children(self) -> list["DyadicCube"]:
        return self.descendants(self.level + 1)

    def descendants(self, level: int) -> list["DyadicCube"]:
        """All dyadic subcubes of ``self`` at ``level``, in lexicographic order."""
        if level < self.level:
            raise DomainError(f"level {level} is coarser than {self.level}")
        shift = level - self.level
        ranges = [range(c << shift, (c + 1) << shift) for c in self.coords]
        return [DyadicCube(level, tuple(cs)) for cs in _product(ranges)]

    def contains(self, other: "DyadicCube") -> bool:
        if other.level < self.level:
            return False
        return other.ancestor(self.level) == self

    def bounds(self) -> list[tuple[float, float]]:
        h = self.side
        return [(c * h, (c + 1) * h) for c in self.coords]

    def __str__(self) -> str:
        return f"L{self.level}:" + ",".join(map(str, self.coords))


def _product(ranges: Sequence[range]) -> Iterator[tuple[int, ...]]:
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for tail in _product(ranges[1:]):
            yield (head,) + tail


@dataclass(frozen=True)
class DyadicGrid:
    n: int
    L: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.n}")
        if self.L < 0:
            raise DomainError(f"max level must be nonnegative, got {self.L}")

    @property
    def side_cells(self) -> int:
        return 1 << self.L

    @property
    def num_cells(self) -> int:
        return 1 << (self.n * self.L)

    @property
    def cell_measure(self) -> float:
        return 2.0 ** (-self.n * self.L)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side_cells,) * self.n

    def cubes_at(self, level: int) -> list[DyadicCube]:
        self.check_level(level)
        return [DyadicCube.from_index(level, i, self.n) for i in range(1 << (self.n * level))]

    def all_cubes(self) -> Iterator[DyadicCube]:
        for j in range(self.L + 1):
            yield from self.cubes_at(j)

    def check_level(self, level: int) -> None:
        if not 0 <= level <= self.L:
            raise DomainError(f"level {level} outside [0, {self.L}]")

    def check_cube(self, Q: DyadicCube) -> None:
        if Q.n != self.n:
            raise DomainError(f"cube {Q} has dimension {Q.n}, grid has {self.n}")
        self.check_level(Q.level)

    def cell_coords(self) -> np.ndarray:
        """Integer coordinates of every cell, shape ``(num_cells, n)``."""
        idx = np.indices(self.shape).reshape(self.n, -1).T
        return idx

    def cell_centers(self) -> np.ndarray:
        return (self.cell_coords() + 0.5) / self.side_cells

    def cell_of(self, index: int) -> DyadicCube:
        return DyadicCube.from_index(self.L, index, self.n)

    def cells_in(self, Q: DyadicCube) -> np.ndarray:
        """Flat cell indices of ``Q``, in the same order as :func:`cube_rows` rows."""
        self.check_cube(Q)
        m = 1 << (self.L - Q.level)
        axes = [np.arange(c * m, (c + 1) * m) for c in Q.coords]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.ravel_multi_index([g.ravel() for g in grids], self.shape)

    def level_index_of_cells(self, level: int) -> np.ndarray:
        """For every cell, the flat index of its ancestor at ``level``."""
        self.check_level(level)
        coords = self.cell_coords() >> (self.L - level)
        idx = np.zeros(self.num_cells, dtype=np.int64)
        for d in range(self.n):
            idx = (idx << level) | coords[:, d]
        return idx

    def parent_index(self, level: int) -> np.ndarray:
        """For every cube of ``level`` >= 1, the flat index of its parent."""
        self.check_level(level)
        if level == 0:
            raise DomainError("the root cube has no parent")
        side = 1 << level
        coords = np.unravel_index(np.arange(side ** self.n), (side,) * self.n)
        return np.ravel_multi_index([c >> 1 for c in coords], (side >> 1,) * self.n)


def cube_rows(values: np.ndarray, grid: DyadicGrid, level: int) -> np.ndarray:
    """Arrange flat cell data as one row per level-``level`` cube.

    Row ``i`` holds the cells of the cube with flat index ``i``; within a row
    the cells follow lexicographic order.  The result is C-contiguous.
    """
    grid.check_level(level)
    side = 1 << level
    m = 1 << (grid.L - level)
    if grid.n == 1:
        return np.ascontiguousarray(values.reshape(side, m))
    blocks = values.reshape(side, m, side, m).transpose(0, 2, 1, 3)
    return np.ascontiguousarray(blocks.reshape(side * side, m * m))


def expand_to_cells(level_values: np.ndarray, grid: DyadicGrid, level: int) -> np.ndarray:
    """Broadcast one value per level-``level`` cube back to the flat cell array."""
    return level_values[grid.level_index_of_cells(level)]


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: DyadicGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size != self.grid.num_cells:
            raise ValueError(f"expected {self.grid.num_cells} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        if np.any(vals < 0):
            raise ValueError("grid function values must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, grid: DyadicGrid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.num_cells, float(c)))

    @classmethod
    def indicator(cls, grid: DyadicGrid, cells: np.ndarray) -> "GridFunction":
        vals = np.zeros(grid.num_cells)
        vals[np.asarray(cells)] = 1.0
        return cls(grid, vals)

    @property
    def nd(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def _like(self, vals) -> "GridFunction":
        return GridFunction(self.grid, vals)

    def _other(self, other) -> np.ndarray | float:
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ValueError("grid functions live on different grids")
            return other.values
        return float(other)

    def __mul__(self, other) -> "GridFunction":
        return self._like(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "GridFunction":
        return self._like(self.values / self._other(other))

    def __add__(self, other) -> "GridFunction":
        return self._like(self.values + self._other(other))

    __radd__ = __add__

    def __pow__(self, p: float) -> "GridFunction":
        with np.errstate(divide="ignore"):
            return self._like(self.values ** float(p))

    def map(self, fn) -> "GridFunction":
        return self._like(fn(self.values))

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())

    @cached_property
    def level_integrals(self) -> list[np.ndarray]:
        """Integral over every dyadic cube, one flat array per level."""
        out = []
        cell = self.grid.cell_measure
        for j in range(self.grid.L + 1):
            out.append(cube_rows(self.values, self.grid, j).sum(axis=1) * cell)
        return out

    def level_averages(self) -> list[np.ndarray]:
        n = self.grid.n
        return [I * 2.0 ** (j * n) for j, I in enumerate(self.level_integrals)]


def integrate(F: GridFunction, Q: DyadicCube) -> float:
    F.grid.check_cube(Q)
    return float(F.values[F.grid.cells_in(Q)].sum() * F.grid.cell_measure)


def average(F: GridFunction, Q: DyadicCube) -> float:
    return integrate(F, Q) / Q.measure


def weighted_measure(F: GridFunction, E) -> float:
    """``F``-measure of a set of cells given as a boolean mask or index array."""
    E = np.asarray(E)
    if E.dtype == bool:
        if E.size != F.grid.num_cells:
            raise ValueError("mask length does not match the grid")
        return float(F.values[E].sum() * F.grid.cell_measure)
    if E.size == 0:
        return 0.0
    return float(F.values[np.unique(E)].sum() * F.grid.cell_measure)


def descendants(Q: DyadicCube, level: int) -> list[DyadicCube]:
    return Q.descendants(level)


def parent(Q: DyadicCube) -> DyadicCube:
    return Q.parent()


def write_csv(F: GridFunction, path: str | Path) -> None:
    """One row per cell: ``cell_index,value`` (lexicographic cell order)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell_index", "value"])
        for i, v in enumerate(F.values):
            w.writerow([i, repr(float(v))])


def read_csv(path: str | Path, grid: DyadicGrid) -> GridFunction:
    vals = np.full(grid.num_cells, np.nan)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals[int(row["cell_index"])] = float(row["value"])
    if np.isnan(vals).any():
        raise ValueError(f"{path}: missing cells")
    return GridFunction(grid, vals)
