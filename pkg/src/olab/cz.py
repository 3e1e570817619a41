"""Level-a^k Calderón-Zygmund decomposition of g = |f| v, the Lambda / Gamma
classification, the secondary decomposition of v^r and principal cubes."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import DyadicCube, DyadicGrid, GridFunction, cube_rows
from .maximal import MaximalResult, sweep
from .orlicz import norm_pyramid
from .young import ParameterError, YoungFunction

SANDWICH_SLACK = 1e-9
# computed norms carry a few ulps of bisection error; a threshold counts as
# crossed only beyond this relative margin
CROSS_TOL = 1e-12


def crossed(values, thr: float):
    return np.asarray(values) > thr * (1.0 + CROSS_TOL)


def maximal_crossings(grid: DyadicGrid, values: list[np.ndarray], thr: float,
                      roots: list[DyadicCube] | None = None) -> list[DyadicCube]:
    """Inclusion-maximal cubes with ``values[level][index] > thr`` inside ``roots``.

    ``values`` holds one array per level (flat cube order).  The search runs
    root-down and stops at the first crossing on every branch.
    """
    if roots is None:
        roots = [DyadicCube.root(grid.n)]
    inside = np.zeros(1, dtype=bool)
    covered = np.zeros(1, dtype=bool)
    by_level: dict[int, list[int]] = {}
    for Q in roots:
        by_level.setdefault(Q.level, []).append(Q.index)
    out = []
    for j in range(grid.L + 1):
        if j > 0:
            par = grid.parent_index(j)
            inside, covered = inside[par], covered[par]
        if j in by_level:
            inside = inside.copy()
            inside[by_level[j]] = True
        hit = inside & ~covered & crossed(values[j], thr)
        for i in np.flatnonzero(hit):
            out.append(DyadicCube.from_index(j, int(i), grid.n))
        covered = covered | hit
    return out


def _level_of(avg: float, k: int, a: float, r: float) -> int:
    """The unique l >= 0 with a^((k+l)r) <= avg < a^((k+l+1)r), or -1."""
    if avg < a ** (k * r):
        return -1
    ell = max(int(math.floor(math.log(avg) / (r * math.log(a)) - k)), 0)
    while ell > 0 and avg < a ** ((k + ell) * r):
        ell -= 1
    while avg >= a ** ((k + ell + 1) * r):
        ell += 1
    return ell


@dataclass
class CZLevel:
    k: int
    threshold: float
    cubes: list[DyadicCube] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    skipped: bool = False
    ell: list[int] = field(default_factory=list)
    avg_vr: list[float] = field(default_factory=list)
    gamma: list[bool] = field(default_factory=list)
    secondary: dict[int, list[DyadicCube]] = field(default_factory=dict)
    secondary_avg: dict[int, list[float]] = field(default_factory=dict)
    secondary_gamma: dict[int, list[bool]] = field(default_factory=dict)

    def family(self, ell: int) -> list[int]:
        return [i for i, e in enumerate(self.ell) if e == ell]


@dataclass
class CZDecomposition:
    grid: DyadicGrid
    g: GridFunction
    phi: YoungFunction
    a: float
    maximal: MaximalResult
    pyramid: list[np.ndarray]
    levels: dict[int, CZLevel]
    flags: list[str] = field(default_factory=list)
    v: GridFunction | None = None
    r: float | None = None

    @property
    def ks(self) -> list[int]:
        return sorted(self.levels)

    def omega(self, k: int) -> np.ndarray:
        return crossed(self.maximal.values, self.a ** k)

    def band(self, k: int) -> np.ndarray:
        v = self._need_v()
        return (v.values > self.a ** k) & (v.values <= self.a ** (k + 1))

    def level_set(self, k: int) -> np.ndarray:
        """E_k = {M g > v} intersected with {a^k < v <= a^(k+1)}."""
        v = self._need_v()
        return (self.maximal.values > v.values) & self.band(k)

    def covered(self, k: int) -> np.ndarray:
        mask = np.zeros(self.grid.num_cells, dtype=bool)
        for Q in self.levels[k].cubes:
            mask[self.grid.cells_in(Q)] = True
        return mask

    def _need_v(self) -> GridFunction:
        if self.v is None:
            raise ParameterError("decomposition is not classified (no v)")
        return self.v

    def to_json(self, principal: dict[str, "PrincipalCubes"] | None = None) -> dict:
        gen = {}
        for pc in (principal or {}).values():
            for m, members in enumerate(pc.generations):
                for Q, k in members:
                    gen[(str(Q), k)] = m
        out = {"a": self.a, "phi": self.phi.name, "flags": self.flags, "levels": []}
        for k in self.ks:
            lv = self.levels[k]
            cubes = []
            for i, Q in enumerate(lv.cubes):
                cubes.append({
                    "level": Q.level, "coords": list(Q.coords), "norm": lv.norms[i],
                    "ell": lv.ell[i] if lv.ell else None,
                    "gamma": lv.gamma[i] if lv.gamma else None,
                    "principal_generation": gen.get((str(Q), k)),
                    "secondary": [{"level": S.level, "coords": list(S.coords),
                                   "gamma": lv.secondary_gamma[i][m],
                                   "principal_generation": gen.get((str(S), k))}
                                  for m, S in enumerate(lv.secondary.get(i, []))],
                })
            out["levels"].append({"k": k, "threshold": lv.threshold, "skipped": lv.skipped,
                                  "cubes": cubes})
        return out

    def dumps(self, **kw) -> str:
        return json.dumps(self.to_json(**kw), indent=1)


def default_a(n: int) -> float:
    return float(2 ** (n + 1))


def k_bounds(maximal_values: np.ndarray, a: float) -> tuple[int, int] | None:
    """(N, K_max) with a^N below the smallest positive M g and a^K_max >= max M g."""
    pos = maximal_values[maximal_values > 0]
    if pos.size == 0:
        return None
    la = math.log(a)
    kmax = math.ceil(math.log(pos.max()) / la)
    while a ** kmax < pos.max():
        kmax += 1
    N = math.floor(math.log(pos.min()) / la)
    while a ** N >= pos.min():
        N -= 1
    return N, kmax


def decompose(g: GridFunction, phi: YoungFunction, a: float | None = None,
              k_range: tuple[int, int] | None = None,
              pyramid: list[np.ndarray] | None = None) -> CZDecomposition:
    """Maximal dyadic cubes with ||g||_{phi,Q} > a^k for every k in ``k_range``
    (inclusive).  Levels whose root norm already exceeds a^k are skipped."""
    grid = g.grid
    a = default_a(grid.n) if a is None else float(a)
    if a <= 2 ** grid.n:
        raise ParameterError(f"need a > 2^n = {2 ** grid.n}, got {a}")
    pyramid = norm_pyramid(g, phi) if pyramid is None else pyramid
    vals, lvl = sweep(grid, pyramid)
    M = MaximalResult(GridFunction(grid, vals), lvl, {"operator": "M_phi", "phi": phi.name})
    d = CZDecomposition(grid, g, phi, a, M, pyramid, {})
    if k_range is None:
        kb = k_bounds(vals, a)
        if kb is None:
            return d
        k_range = kb
    root = pyramid[0][0]
    for k in range(k_range[0], k_range[1] + 1):
        thr = a ** k
        lv = CZLevel(k, thr)
        d.levels[k] = lv
        if crossed(root, thr):
            lv.skipped = True
            d.flags.append(f"k={k}: root norm {root:.6g} exceeds a^k, level skipped")
            continue
        lv.cubes = maximal_crossings(grid, pyramid, thr)
        lv.norms = [float(pyramid[Q.level][Q.index]) for Q in lv.cubes]
    check_sandwich(d)
    return d


def check_sandwich(d: CZDecomposition) -> list[str]:
    """Assert a^k < ||g||_Q <= 2^n a^k and Omega_k = union of the cubes."""
    bad = []
    cap = 2 ** d.grid.n
    for k, lv in d.levels.items():
        if lv.skipped:
            continue
        for Q, nrm in zip(lv.cubes, lv.norms):
            if not (nrm > lv.threshold and nrm <= cap * lv.threshold * (1 + SANDWICH_SLACK)):
                bad.append(f"k={k} {Q}: norm {nrm!r} outside ({lv.threshold!r}, {cap}a^k]")
        if not np.array_equal(d.covered(k), d.omega(k)):
            bad.append(f"k={k}: cubes do not tile Omega_k")
    if bad:
        raise AssertionError("CZ sandwich violated: " + "; ".join(bad[:5]))
    return bad


def classify(d: CZDecomposition, v: GridFunction, r: float) -> CZDecomposition:
    """Fill l (Lambda class), avg v^r and the Gamma flag of every cube."""
    grid = d.grid
    d.v, d.r = v, float(r)
    vr_avg = (v ** r).level_averages()
    for k, lv in d.levels.items():
        band = d.band(k).astype(float)
        counts = [cube_rows(band, grid, j).sum(axis=1) for j in range(grid.L + 1)]
        lv.avg_vr = [float(vr_avg[Q.level][Q.index]) for Q in lv.cubes]
        lv.ell = [_level_of(m, k, d.a, r) for m in lv.avg_vr]
        lv.gamma = [bool(counts[Q.level][Q.index] > 0) for Q in lv.cubes]
    return d


def secondary_decompose(d: CZDecomposition) -> CZDecomposition:
    """Maximal subcubes with avg v^r > a^(kr) inside every Lambda_{-1,k} cube."""
    grid = d.grid
    v, r = d.v, d.r
    if v is None:
        raise ParameterError("classify before the secondary decomposition")
    vr_avg = (v ** r).level_averages()
    cap = 2 ** grid.n
    for k, lv in d.levels.items():
        band = d.band(k).astype(float)
        counts = None
        thr = d.a ** (k * r)
        for i in lv.family(-1):
            Q = lv.cubes[i]
            sub = maximal_crossings(grid, vr_avg, thr, [Q])
            lv.secondary[i] = sub
            lv.secondary_avg[i] = [float(vr_avg[S.level][S.index]) for S in sub]
            if not sub:
                d.flags.append(f"k={k} {Q}: empty secondary family")
            for S, m in zip(sub, lv.secondary_avg[i]):
                if not (m > thr and m <= cap * thr * (1 + SANDWICH_SLACK)):
                    raise AssertionError(f"secondary sandwich violated at k={k} {S}: {m!r}")
            if counts is None:
                counts = [cube_rows(band, grid, j).sum(axis=1) for j in range(grid.L + 1)]
            lv.secondary_gamma[i] = [bool(counts[S.level][S.index] > 0) for S in sub]
    return d


def build(g: GridFunction, phi: YoungFunction, v: GridFunction, r: float,
          a: float | None = None, k_range=None, pyramid=None) -> CZDecomposition:
    d = decompose(g, phi, a, k_range, pyramid)
    classify(d, v, r)
    return secondary_decompose(d)


# ------------------------------------------------------------ principal cubes

Member = tuple[DyadicCube, int]


@dataclass
class PrincipalCubes:
    mode: str
    generations: list[list[Member]]
    assignment: dict[Member, Member]

    @property
    def cubes(self) -> list[Member]:
        return [m for gen in self.generations for m in gen]


def gamma_family(d: CZDecomposition, ell: int, N: int | None = None) -> list[Member]:
    """Delta_l: the union over k >= N of Gamma_{l,k} (secondary cubes for l = -1)."""
    out = []
    for k in d.ks:
        if N is not None and k < N:
            continue
        lv = d.levels[k]
        if ell >= 0:
            out += [(Q, k) for i, Q in enumerate(lv.cubes) if lv.ell[i] == ell and lv.gamma[i]]
        else:
            for i in lv.family(-1):
                out += [(S, k) for S, gm in zip(lv.secondary[i], lv.secondary_gamma[i]) if gm]
    return out


def build_principal(family: list[Member], u: GridFunction, mode: str = "ell",
                    beta: float | None = None, a: float | None = None,
                    r: float | None = None) -> PrincipalCubes:
    """Principal cubes of ``family`` (pairs of cube and level k).

    A member precedes another when its cube strictly contains the other's, or
    the cubes coincide and its k is smaller.  Members are visited in that order,
    so the nearest principal ancestor is already final when a member is seen.
    """
    if mode not in ("ell", "minus_one"):
        raise ParameterError(f"unknown principal mode {mode!r}")
    if mode == "minus_one" and None in (beta, a, r):
        raise ParameterError("minus_one mode needs beta, a and r")
    avg = u.level_averages()
    members = sorted(set(family), key=lambda m: (m[0].level, m[1], m[0].index))
    principal_at: dict[tuple[int, int], list[tuple[int, Member, int]]] = {}
    generations: list[list[Member]] = []
    assignment: dict[Member, Member] = {}

    def nearest(Q: DyadicCube, k: int):
        for j in range(Q.level, -1, -1):
            A = Q.ancestor(j)
            best = None
            for kk, mem, m in principal_at.get((j, A.index), ()):
                if j == Q.level and kk >= k:
                    continue
                if best is None or kk > best[0]:
                    best = (kk, mem, m)
            if best is not None:
                return best
        return None

    for Q, k in members:
        near = nearest(Q, k)
        if near is None:
            gen = 0
        else:
            kP, P, m = near
            factor = 2.0 if mode == "ell" else a ** ((k - kP) * beta * r)
            if avg[Q.level][Q.index] > factor * avg[P[0].level][P[0].index]:
                gen = m + 1
            else:
                assignment[(Q, k)] = P
                continue
        while len(generations) <= gen:
            generations.append([])
        generations[gen].append((Q, k))
        principal_at.setdefault((Q.level, Q.index), []).append((k, (Q, k), gen))
        assignment[(Q, k)] = (Q, k)
    return PrincipalCubes(mode, generations, assignment)


def principal_sum(P: PrincipalCubes, u: GridFunction) -> tuple[GridFunction, float]:
    """h = sum over principal cubes of avg_P(u) chi_P, and min C with h <= C u."""
    grid = u.grid
    avg = u.level_averages()
    h = np.zeros(grid.num_cells)
    for Q, _ in P.cubes:
        h[grid.cells_in(Q)] += avg[Q.level][Q.index]
    C = float(np.max(h / u.values)) if h.any() else 0.0
    return GridFunction(grid, h), C
