"""Experiment configuration and corpus generation.

A config is a JSON object::

    {
      "name": "classical",
      "grid": {"n": 1, "L": 10},
      "seed": 0,
      "young": {"r": 1, "delta": 0},
      "u": [{"name": "u_pow", "kind": "power", "alpha": 0.5, "center": 0.3}],
      "v": [{"name": "one", "kind": "constant"}],
      "functions": [{"name": "ind", "kind": "indicator", "lo": 0.0, "hi": 0.25, "scale": 4}],
      "a": [4.0],
      "eps": null,
      "gamma": [0.5],
      "p": [1.5],
      "t_grid": {"lo": 1e-3, "hi": 1e3, "num": 25},
      "suites": ["theorem1"],
      "budgets": {"theorem1": 10.0},
      "psi_equiv": {"kind": "scaled", "base": {"kind": "canonical"}, "c": 2.0},
      "output": "out/classical"
    }

Weight entries take the keyword arguments of ``weights.make_weight``.  Function
kinds are ``indicator`` (lo, hi, scale), ``spike`` (center, width, height) and
``random`` (level, density, scale, count), the last one drawn from the single
seeded PCG64 generator; ``count`` > 1 expands into replicas ``name#00``,
``name#01``, ...  ``trace`` selects which functions get the full level
decomposition trace in theorem1: ``all``, ``deterministic`` or ``none``.
``eps = null`` means the admissible ladder of each instance.

``budgets`` caps the empirical constant per suite.  It is either an inline
object of positive values or the path of a file written by
``scripts/record_budgets.py``, read under the config's ``name``.  Relative
paths resolve against the config file.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .grid import DyadicGrid, GridFunction, write_csv
from .weights import WeightDomainError, profile, weight_from_spec
from .young import ParameterError

SUITES = ("cz_sandwich", "reverse_holder", "level_set", "claim1", "claim3", "claim1_literal",
          "claim3_literal", "theorem1", "corollaries", "exponents", "fractional_mid",
          "fractional_diag")
FUNCTION_KINDS = ("indicator", "spike", "random")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass
class TGrid:
    lo: float = 1e-3
    hi: float = 1e3
    num: int = 25

    def values(self) -> tuple[float, ...]:
        return tuple(float(t) for t in np.geomspace(self.lo, self.hi, self.num))


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    n: int = 1
    L: int = 10
    seed: int = 0
    r: float = 1.0
    delta: float = 0.0
    u: list[dict] = field(default_factory=lambda: [{"name": "one", "kind": "constant"}])
    v: list[dict] = field(default_factory=lambda: [{"name": "one", "kind": "constant"}])
    functions: list[dict] = field(default_factory=list)
    a: list[float] = field(default_factory=list)
    eps: list[float] | None = None
    gamma: list[float] = field(default_factory=list)
    p: list[float] = field(default_factory=list)
    t_grid: TGrid = field(default_factory=TGrid)
    suites: list[str] = field(default_factory=list)
    budgets: dict | str = field(default_factory=dict)
    psi_equiv: dict | None = None
    output: str = "out"
    trace_every: int = 4
    trace: str = "all"
    q_budget: float = 100.0
    base_dir: str = "."
    log_budgets: dict[str, float] = field(default_factory=dict)

    # ---------------------------------------------------------------- io
    @classmethod
    def from_dict(cls, raw: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw = dict(raw)
        known = {f for f in cls.__dataclass_fields__} - {"base_dir", "log_budgets"} | {"grid", "young"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        grid = raw.pop("grid", {})
        young = raw.pop("young", {})
        tg = raw.pop("t_grid", {})
        try:
            cfg = cls(**raw, n=int(grid.get("n", 1)), L=int(grid.get("L", 10)),
                      r=float(young.get("r", 1.0)), delta=float(young.get("delta", 0.0)),
                      t_grid=TGrid(**tg), base_dir=str(base_dir))
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        cfg.log_budgets = cfg._load_budgets(cfg.budgets)
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(raw, path.parent)

    def _load_budgets(self, budgets) -> dict[str, float]:
        """Log budgets per suite."""
        if isinstance(budgets, str):
            path = self.resolve(budgets)
            try:
                data = json.loads(path.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read budgets file {path}: {exc}") from exc
            entries = data.get("configs", {}).get(self.name, {})
            return {s: float(e["log_budget"]) for s, e in entries.items()}
        if not isinstance(budgets, dict):
            raise ConfigError("budgets must be an object or a file path")
        return {str(k): math.log(float(v)) for k, v in budgets.items()}

    def resolve(self, p: str | Path) -> Path:
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p

    @property
    def out_dir(self) -> Path:
        return self.resolve(self.output)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        d.pop("log_budgets")
        d["grid"] = {"n": d.pop("n"), "L": d.pop("L")}
        d["young"] = {"r": d.pop("r"), "delta": d.pop("delta")}
        return d

    # ---------------------------------------------------------- checking
    def validate(self) -> None:
        errs = []
        if self.n not in (1, 2) or self.L < 0:
            errs.append(f"grid needs n in (1, 2) and L >= 0, got n={self.n}, L={self.L}")
        if self.n * self.L > 24:
            errs.append(f"grid too large: n*L = {self.n * self.L} > 24")
        if not self.r >= 1:
            errs.append(f"r must be >= 1, got {self.r}")
        if not self.delta >= 0:
            errs.append(f"delta must be >= 0, got {self.delta}")
        for a in self.a:
            if not a > 2 ** self.n:
                errs.append(f"a must exceed 2^n = {2 ** self.n}, got {a}")
        if self.eps is not None:
            for e in self.eps:
                if not e > 0:
                    errs.append(f"eps must be > 0, got {e}")
        for g in self.gamma:
            if not 0 < g < self.n / self.r:
                errs.append(f"need 0 < gamma < n/r = {self.n / self.r:g}, got {g}")
                continue
            for p in self.p:
                if not self.r < p < self.n / g:
                    errs.append(f"need r < p < n/gamma for gamma={g}, got p={p}")
        if not (0 < self.t_grid.lo <= self.t_grid.hi and self.t_grid.num >= 1):
            errs.append("t_grid needs 0 < lo <= hi and num >= 1")
        for s in self.suites:
            if s not in SUITES:
                errs.append(f"unknown suite {s!r}; known: {', '.join(SUITES)}")
        if isinstance(self.budgets, dict):
            for s, b in self.budgets.items():
                if not (isinstance(b, (int, float)) and b > 0):
                    errs.append(f"budget for {s} must be > 0")
        if any(s.startswith("fractional") for s in self.suites) and not self.gamma:
            errs.append("fractional suites need a gamma ladder")
        if "fractional_mid" in self.suites and not self.p:
            errs.append("fractional_mid needs a p ladder")
        names = {}
        for role in ("u", "v", "functions"):
            for spec in getattr(self, role):
                if "name" not in spec or "kind" not in spec:
                    errs.append(f"{role} entries need 'name' and 'kind': {spec}")
                    continue
                if spec["name"] in names.get(role, set()):
                    errs.append(f"duplicate {role} name {spec['name']!r}")
                names.setdefault(role, set()).add(spec["name"])
                if role == "functions" and spec["kind"] not in FUNCTION_KINDS:
                    errs.append(f"unknown function kind {spec['kind']!r}")
                if spec["kind"] == "power" and float(spec.get("alpha", 0)) >= self.n:
                    errs.append(f"power weight {spec['name']!r}: alpha >= n is not locally integrable")
        if self.trace not in ("all", "deterministic", "none"):
            errs.append(f"trace must be all, deterministic or none, got {self.trace!r}")
        for spec in self.functions:
            cnt = spec.get("count", 1)
            if not (isinstance(cnt, int) and cnt >= 1):
                errs.append(f"function {spec.get('name')!r}: count must be a positive integer")
        if errs:
            raise ConfigError("; ".join(errs))

    @property
    def grid(self) -> DyadicGrid:
        return DyadicGrid(self.n, self.L)

    @property
    def a_values(self) -> list[float]:
        return list(self.a) if self.a else [float(2 ** (self.n + 1))]


# ------------------------------------------------------------------ corpus

@dataclass
class Corpus:
    grid: DyadicGrid
    u: dict[str, GridFunction]
    v: dict[str, GridFunction]
    f: dict[str, GridFunction]
    f_specs: dict[str, dict] = field(default_factory=dict)

    def traced(self, name: str, mode: str) -> bool:
        return mode == "all" or (mode == "deterministic" and self.f_specs[name]["kind"] != "random")


def _weight(spec: dict, grid: DyadicGrid, base: Path) -> GridFunction:
    spec = {k: v for k, v in spec.items() if k != "name"}
    if spec["kind"] == "from_csv":
        spec["path"] = str(base / spec["path"])
    try:
        w = weight_from_spec(spec, grid)
    except (WeightDomainError, ParameterError, KeyError) as exc:
        raise ConfigError(f"bad weight spec {spec}: {exc}") from exc
    if not (np.all(np.isfinite(w.values)) and np.all(w.values > 0)):
        raise ConfigError(f"weight {spec} is not finite and positive")
    return w


def _function(spec: dict, grid: DyadicGrid, rng: np.random.Generator) -> GridFunction:
    kind = spec["kind"]
    x = grid.cell_centers()
    if kind == "indicator":
        lo = np.broadcast_to(np.asarray(spec.get("lo", 0.0), float), (grid.n,))
        hi = np.broadcast_to(np.asarray(spec.get("hi", 0.5), float), (grid.n,))
        inside = np.all((x >= lo) & (x < hi), axis=1)
        return GridFunction(grid, float(spec.get("scale", 1.0)) * inside)
    if kind == "spike":
        c = np.broadcast_to(np.asarray(spec.get("center", 0.5), float), (grid.n,))
        width = float(spec.get("width", 0.05))
        dist = np.linalg.norm(x - c, axis=1)
        return GridFunction(grid, float(spec.get("height", 4.0)) * np.maximum(0.0, 1 - dist / width))
    # random piecewise constant on the cubes of one level
    level = int(spec.get("level", min(grid.L, 5)))
    if not 0 <= level <= grid.L:
        raise ConfigError(f"random function level {level} outside [0, {grid.L}]")
    m = 2 ** (grid.n * level)
    vals = float(spec.get("scale", 4.0)) * rng.random(m) * (rng.random(m) < float(spec.get("density", 0.5)))
    return GridFunction(grid, vals[grid.level_index_of_cells(level)])


def build_corpus(cfg: ExperimentConfig) -> Corpus:
    """All weights and test functions; random draws come from one PCG64 stream
    seeded by ``cfg.seed`` and consumed in config order."""
    grid = cfg.grid
    base = Path(cfg.base_dir)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    u = {s["name"]: _weight(s, grid, base) for s in cfg.u}
    v = {s["name"]: _weight(s, grid, base) for s in cfg.v}
    f, specs = {}, {}
    for s in cfg.functions:
        cnt = int(s.get("count", 1))
        names = [s["name"]] if cnt == 1 else [f"{s['name']}#{i:02d}" for i in range(cnt)]
        for nm in names:
            f[nm] = _function(s, grid, rng)
            specs[nm] = s
    return Corpus(grid, u, v, f, specs)


def write_corpus(cfg: ExperimentConfig, corpus: Corpus, out: Path) -> dict:
    """Weights and functions to CSV plus a manifest with certified constants."""
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"grid": {"n": cfg.n, "L": cfg.L}, "seed": cfg.seed, "rng": "PCG64",
                "weights": {}, "functions": {}}
    for role in ("u", "v"):
        for name, w in getattr(corpus, role).items():
            key = f"{role}_{name}"
            write_csv(w, out / f"{key}.csv")
            prof = profile(w)
            manifest["weights"][key] = {
                "file": f"{key}.csv", "spec": next(s for s in getattr(cfg, role) if s["name"] == name),
                "A1": prof.A1[0], "Ainf": prof.Ainf[0],
                "Aq": {repr(q): c for q, (c, _) in prof.Aq.items()},
                "tau_n": prof.tau_n, "r_w": prof.r_w, "eps_w": prof.eps_w,
            }
    for name, fn in corpus.f.items():
        fname = "f_" + name.replace("#", "_") + ".csv"
        write_csv(fn, out / fname)
        manifest["functions"][name] = {"file": fname, "spec": corpus.f_specs[name],
                                       "max": fn.max(), "integral": float(fn.values.sum() * fn.grid.cell_measure)}
    (out / "manifest.json").write_text(json.dumps(_finite(manifest), indent=1, sort_keys=True) + "\n")
    return manifest


def _finite(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    return obj
