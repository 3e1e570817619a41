"""Weight constructors and dyadic Muckenhoupt / reverse Hölder constants.

All constants are maxima over the finite dyadic family of the grid; on
piecewise-constant data ess sup / ess inf over a cube are the max / min of
its cell values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import DyadicCube, DyadicGrid, GridFunction, cube_rows, read_csv
from .young import ParameterError

Q_LADDER = (1.25, 1.5, 2.0, 4.0, 8.0)
EPS1_LADDER = tuple(2.0 ** -i for i in range(0, 13))


class WeightDomainError(ValueError):
    pass


def tau_n(n: int) -> float:
    """Dimensional constant of the reverse Hölder lemma."""
    return 2.0 ** (11 + n)


def _level_means(values: np.ndarray, grid: DyadicGrid) -> list[np.ndarray]:
    return [cube_rows(values, grid, j).mean(axis=1) for j in range(grid.L + 1)]


def _argmax_over_levels(levels: list[np.ndarray], n: int) -> tuple[float, DyadicCube]:
    best, where = -math.inf, (0, 0)
    for j, arr in enumerate(levels):
        i = int(np.argmax(arr))
        if arr[i] > best:
            best, where = float(arr[i]), (j, i)
    # every constant is >= 1 by Jensen; anything below is round-off
    return max(best, 1.0), DyadicCube.from_index(where[0], where[1], n)


def _positive(w: GridFunction) -> np.ndarray:
    vals = w.values
    if (vals <= 0).any():
        raise WeightDomainError("weight must be strictly positive on every cell")
    return vals


def a_infty_constant(w: GridFunction) -> tuple[float, DyadicCube]:
    """max over dyadic Q of avg_Q(w) * exp(avg_Q(log 1/w))."""
    vals = _positive(w)
    means = _level_means(vals, w.grid)
    logs = _level_means(np.log(vals), w.grid)
    return _argmax_over_levels([m * np.exp(-lg) for m, lg in zip(means, logs)], w.grid.n)


def a_q_constant(w: GridFunction, q: float) -> tuple[float, DyadicCube]:
    if q <= 1:
        raise ParameterError(f"A_q needs q > 1, got {q}")
    vals = _positive(w)
    qp = q / (q - 1.0)
    means = _level_means(vals, w.grid)
    duals = _level_means(vals ** (1.0 - qp), w.grid)
    return _argmax_over_levels([m * d ** (q - 1.0) for m, d in zip(means, duals)], w.grid.n)


def a1_constant(w: GridFunction) -> tuple[float, DyadicCube]:
    vals = _positive(w)
    grid = w.grid
    levels = [cube_rows(vals, grid, j).mean(axis=1) / cube_rows(vals, grid, j).min(axis=1)
              for j in range(grid.L + 1)]
    return _argmax_over_levels(levels, grid.n)


def rh_constant(w: GridFunction, s: float) -> tuple[float, DyadicCube]:
    """max over dyadic Q of (avg w**s)**(1/s) / avg w."""
    if s <= 1:
        raise ParameterError(f"RH_s needs s > 1, got {s}")
    vals = _positive(w)
    means = _level_means(vals, w.grid)
    powers = _level_means(vals ** s, w.grid)
    return _argmax_over_levels([p ** (1.0 / s) / m for p, m in zip(powers, means)], w.grid.n)


@dataclass
class WeightProfile:
    weight: GridFunction
    A1: tuple[float, DyadicCube]
    Ainf: tuple[float, DyadicCube]
    Aq: dict[float, tuple[float, DyadicCube]] = field(default_factory=dict)
    RH: dict[float, tuple[float, DyadicCube]] = field(default_factory=dict)

    @property
    def tau_n(self) -> float:
        return tau_n(self.weight.grid.n)

    @property
    def r_w(self) -> float:
        return 1.0 + 1.0 / (self.tau_n * self.Ainf[0])

    @property
    def eps_w(self) -> float:
        return 1.0 / (1.0 + self.tau_n * self.Ainf[0])

    def summary(self) -> dict:
        return {
            "A1": self.A1[0], "A1_witness": str(self.A1[1]),
            "Ainf": self.Ainf[0], "Ainf_witness": str(self.Ainf[1]),
            "Aq": {f"{q:g}": c for q, (c, _) in self.Aq.items()},
            "RH": {f"{s:g}": c for s, (c, _) in self.RH.items()},
            "r_w": self.r_w, "eps_w": self.eps_w, "tau_n": self.tau_n,
        }


def profile(w: GridFunction, qs=Q_LADDER, ss=()) -> WeightProfile:
    return WeightProfile(w, a1_constant(w), a_infty_constant(w),
                         {q: a_q_constant(w, q) for q in qs},
                         {s: rh_constant(w, s) for s in ss})


def certify_q(w: GridFunction, ladder=Q_LADDER, budget: float = 100.0) -> tuple[float, float]:
    """Smallest q on the ladder whose A_q constant is at most ``budget``."""
    for q in sorted(ladder):
        c, _ = a_q_constant(w, q)
        if c <= budget:
            return q, c
    raise ParameterError(f"no q in {ladder} certifies the weight within budget {budget}")


def eps1_candidate(v: GridFunction, r: float, ladder=EPS1_LADDER, factor: float = 2.0) -> float:
    """Largest eps on the ladder with [v^(r+eps)]_Ainf <= factor * [v^r]_Ainf."""
    base, _ = a_infty_constant(v ** r)
    for eps in sorted(ladder, reverse=True):
        c, _ = a_infty_constant(v ** (r + eps))
        if c <= factor * base:
            return eps
    return min(ladder) / 2.0


# ------------------------------------------------------------ constructors

def _power_1d(grid: DyadicGrid, alpha: float, center: float) -> np.ndarray:
    """Exact cell averages of |x - center|**(-alpha) via the antiderivative."""
    edges = np.linspace(0.0, 1.0, grid.side_cells + 1)
    d = edges - center
    F = np.sign(d) * np.abs(d) ** (1.0 - alpha) / (1.0 - alpha)
    return np.diff(F) / np.diff(edges)


def _power_centroid(grid: DyadicGrid, alpha: float, center) -> np.ndarray:
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.n,))
    dist = np.linalg.norm(grid.cell_centers() - c, axis=1)
    if (dist == 0).any():
        raise WeightDomainError("power weight centre coincides with a cell centroid")
    return dist ** (-alpha)


def make_weight(kind: str, params: dict, grid: DyadicGrid) -> GridFunction:
    """Weight corpus constructor.

    kinds: constant(c), step(values for the 2**n children of the root),
    power(alpha, center), max_powers(alphas, centers), product(factors),
    pow(base, exponent), from_csv(path).
    """
    if kind == "constant":
        c = float(params.get("c", 1.0))
        if c <= 0:
            raise WeightDomainError("constant weight must be positive")
        return GridFunction.constant(grid, c)
    if kind == "step":
        vals = np.asarray(params["values"], dtype=float)
        if vals.size != 2 ** grid.n:
            raise ParameterError(f"step weight needs {2 ** grid.n} values")
        return GridFunction(grid, vals[grid.level_index_of_cells(1)] if grid.L >= 1
                            else [vals.mean()])
    if kind == "power":
        alpha = float(params.get("alpha", 0.0))
        if alpha >= grid.n:
            raise WeightDomainError(f"|x|^-alpha with alpha={alpha} >= n is not locally integrable")
        center = params.get("center", 0.0)
        if alpha == 0:
            return GridFunction.constant(grid, 1.0)
        if grid.n == 1:
            c = float(center[0] if isinstance(center, (list, tuple)) else center)
            return GridFunction(grid, _power_1d(grid, alpha, c))
        return GridFunction(grid, _power_centroid(grid, alpha, center))
    if kind == "max_powers":
        parts = [make_weight("power", {"alpha": a, "center": c}, grid).values
                 for a, c in zip(params["alphas"], params["centers"])]
        return GridFunction(grid, np.max(parts, axis=0))
    if kind == "product":
        out = np.ones(grid.num_cells)
        for spec in params["factors"]:
            out = out * weight_from_spec(spec, grid).values
        return GridFunction(grid, out)
    if kind == "pow":
        return weight_from_spec(params["base"], grid) ** float(params["exponent"])
    if kind == "from_csv":
        return read_csv(Path(params["path"]), grid)
    raise ParameterError(f"unknown weight kind {kind!r}")


def weight_from_spec(spec: dict, grid: DyadicGrid) -> GridFunction:
    spec = dict(spec)
    kind = spec.pop("kind")
    return make_weight(kind, spec, grid)
