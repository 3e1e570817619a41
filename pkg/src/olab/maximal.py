"""Dyadic Orlicz and fractional maximal operators and the Sawyer-type quotients."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import DyadicCube, DyadicGrid, GridFunction, expand_to_cells
from .orlicz import LuxemburgQuery, luxemburg_norm, luxemburg_rows, norm_pyramid
from .young import ParameterError, YoungFunction


@dataclass(frozen=True, eq=False)
class MaximalResult:
    output: GridFunction
    argmax_level: np.ndarray
    descriptor: dict = field(default_factory=dict)

    def argmax_cube(self, cell: int) -> DyadicCube:
        grid = self.output.grid
        return grid.cell_of(cell).ancestor(int(self.argmax_level[cell]))

    @property
    def values(self) -> np.ndarray:
        return self.output.values


def _scale(level: int, n: int, gamma: float | None) -> float:
    if gamma is None:
        return 1.0
    return (2.0 ** (-level * n)) ** (gamma / n)


def sweep(grid: DyadicGrid, pyramid: list[np.ndarray], gamma: float | None = None):
    """Root-to-leaf max over the ancestors of each cell.

    Ties keep the coarser cube.  Returns (values, argmax level per cell).
    """
    out = np.full(grid.num_cells, -np.inf)
    lvl = np.zeros(grid.num_cells, dtype=np.int64)
    for j, norms in enumerate(pyramid):
        cand = expand_to_cells(norms * _scale(j, grid.n, gamma), grid, j)
        better = cand > out
        out = np.where(better, cand, out)
        lvl = np.where(better, j, lvl)
    return out, lvl


def m_phi_dyadic(f: GridFunction, phi: YoungFunction, pyramid=None) -> MaximalResult:
    pyramid = norm_pyramid(f, phi) if pyramid is None else pyramid
    vals, lvl = sweep(f.grid, pyramid)
    return MaximalResult(GridFunction(f.grid, vals), lvl, {"operator": "M_phi", "phi": phi.name})


def m_gamma_phi(f: GridFunction, phi: YoungFunction, gamma: float, pyramid=None) -> MaximalResult:
    n = f.grid.n
    if not 0 < gamma < n:
        raise ParameterError(f"need 0 < gamma < n, got {gamma}")
    pyramid = norm_pyramid(f, phi) if pyramid is None else pyramid
    vals, lvl = sweep(f.grid, pyramid, gamma)
    return MaximalResult(GridFunction(f.grid, vals), lvl,
                         {"operator": "M_gamma_phi", "phi": phi.name, "gamma": gamma})


def naive_maximal(f: GridFunction, phi: YoungFunction, gamma: float | None = None):
    """All-cubes oracle: an independent norm evaluation for every (cell, containing
    cube) pair, with no sharing between cells.

    The evaluations for one level are batched (one row per cell, holding that
    cell's ancestor cube), which changes nothing per row.
    """
    grid = f.grid
    out = np.full(grid.num_cells, -np.inf)
    lvl = np.zeros(grid.num_cells, dtype=np.int64)
    for j in range(grid.L + 1):
        rows = np.stack([grid.cells_in(grid.cell_of(c).ancestor(j))
                         for c in range(grid.num_cells)])
        vals = np.ascontiguousarray(f.values[rows])
        cand = luxemburg_rows(vals, np.ones_like(vals), phi)
        if gamma is not None:
            cand = cand * DyadicCube.root(grid.n).descendants(j)[0].measure ** (gamma / grid.n)
        better = cand > out
        out = np.where(better, cand, out)
        lvl = np.where(better, j, lvl)
    return out, lvl


def naive_maximal_scalar(f: GridFunction, phi: YoungFunction, gamma: float | None = None):
    """Same oracle with one scalar :func:`luxemburg_norm` call per pair (slow)."""
    grid = f.grid
    out = np.empty(grid.num_cells)
    lvl = np.zeros(grid.num_cells, dtype=np.int64)
    for c in range(grid.num_cells):
        cell = grid.cell_of(c)
        best, arg = -np.inf, 0
        for j in range(grid.L + 1):
            Q = cell.ancestor(j)
            val = luxemburg_norm(LuxemburgQuery(f, Q, phi))
            if gamma is not None:
                val = val * Q.measure ** (gamma / grid.n)
            if val > best:
                best, arg = val, j
        out[c], lvl[c] = best, arg
    return out, lvl


def sawyer_quotients(f: GridFunction, u: GridFunction | None, v: GridFunction,
                     phi: YoungFunction) -> tuple[GridFunction, GridFunction]:
    """S = M_phi(|f| v) / v and T = M_phi(|f| v) / M_phi(v).

    ``u`` only travels with the instance; the quotients do not depend on it.
    """
    if (v.values <= 0).any():
        raise ParameterError("v must be positive")
    num = m_phi_dyadic(f * v, phi).values
    den = m_phi_dyadic(v, phi).values
    return GridFunction(f.grid, num / v.values), GridFunction(f.grid, num / den)
