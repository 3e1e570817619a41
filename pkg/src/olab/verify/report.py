"""Verification records and per-suite reports.

Every check is stored in log space (``log_lhs``, ``log_rhs``) because several
constants are far outside the float range.  ``lhs``/``rhs`` are the clamped
exponentials kept for the CSV.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..young import LOG_SATURATION

SLACK = 1e-9
CSV_COLUMNS = ("suite", "instance_id", "k", "l", "cube", "lhs", "rhs", "ratio", "pass",
               "t", "step", "log_ratio")


def safe_log(x: float) -> float:
    if x > 0:
        return math.log(x)
    if x == 0:
        return -math.inf
    raise ValueError(f"log of negative value {x}")


def _clamp_exp(lx: float) -> float:
    return math.exp(min(lx, LOG_SATURATION))


@dataclass
class Record:
    suite: str
    instance_id: str
    step: str
    log_lhs: float
    log_rhs: float
    passed: bool
    exact: bool = True
    degenerate: bool = False
    k: int | None = None
    l: int | None = None
    cube: str = ""
    t: float | None = None

    @property
    def log_ratio(self) -> float:
        if self.degenerate:
            return math.nan
        if self.log_lhs == -math.inf:
            return -math.inf
        if self.log_rhs == -math.inf:
            return math.inf
        return self.log_lhs - self.log_rhs

    @property
    def lhs(self) -> float:
        return _clamp_exp(self.log_lhs)

    @property
    def rhs(self) -> float:
        return _clamp_exp(self.log_rhs)

    @property
    def ratio(self) -> float:
        lr = self.log_ratio
        return lr if math.isnan(lr) else _clamp_exp(lr)

    def row(self) -> dict:
        return {
            "suite": self.suite, "instance_id": self.instance_id,
            "k": "" if self.k is None else self.k, "l": "" if self.l is None else self.l,
            "cube": self.cube, "lhs": repr(self.lhs), "rhs": repr(self.rhs),
            "ratio": repr(self.ratio), "pass": int(self.passed),
            "t": "" if self.t is None else repr(self.t), "step": self.step,
            "log_ratio": repr(self.log_ratio),
        }

    def witness(self) -> dict:
        return {"instance_id": self.instance_id, "step": self.step, "k": self.k, "l": self.l,
                "cube": self.cube, "t": self.t, "ratio": self.ratio, "log_ratio": self.log_ratio}


def check(suite: str, instance_id: str, step: str, log_lhs: float, log_rhs: float,
          exact: bool = True, slack: float = SLACK, **where) -> Record:
    """Record ``lhs <= rhs`` given both sides as logs.

    Exact checks pass within the relative ``slack``.  Empirical checks only
    need a finite ratio.  ``rhs = 0`` with ``lhs > 0`` always fails; ``0 <= 0``
    is flagged degenerate and passes.
    """
    log_lhs, log_rhs = float(log_lhs), float(log_rhs)
    if math.isnan(log_lhs) or math.isnan(log_rhs):
        return Record(suite, instance_id, step, log_lhs, log_rhs, False, exact, True, **where)
    if log_rhs == -math.inf:
        deg = log_lhs == -math.inf
        return Record(suite, instance_id, step, log_lhs, log_rhs, deg, exact, deg, **where)
    if exact:
        ok = log_lhs <= log_rhs + math.log1p(slack)
    else:
        ok = log_lhs < math.inf
    return Record(suite, instance_id, step, log_lhs, log_rhs, ok, exact, **where)


def check_values(suite: str, instance_id: str, step: str, lhs: float, rhs: float,
                 exact: bool = True, slack: float = SLACK, **where) -> Record:
    return check(suite, instance_id, step, safe_log(lhs), safe_log(rhs), exact, slack, **where)


@dataclass
class VerificationReport:
    suite: str
    descriptor: dict = field(default_factory=dict)
    records: list[Record] = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    constant_steps: tuple[str, ...] | None = None
    budget: float | None = None
    flags: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    log_budget: float | None = None

    def __post_init__(self):
        if self.log_budget is None and self.budget is not None:
            self.log_budget = safe_log(self.budget)

    def add(self, rec: Record) -> Record:
        self.records.append(rec)
        return rec

    def extend(self, recs) -> None:
        self.records.extend(recs)

    def _constant_records(self) -> list[Record]:
        recs = [r for r in self.records if not r.degenerate]
        if self.constant_steps is not None:
            recs = [r for r in recs if r.step in self.constant_steps]
        return recs

    @property
    def witness_record(self) -> Record | None:
        recs = self._constant_records()
        if not recs:
            return None
        return max(recs, key=lambda r: r.log_ratio)

    @property
    def log_empirical_constant(self) -> float:
        w = self.witness_record
        return -math.inf if w is None else w.log_ratio

    @property
    def empirical_constant(self) -> float:
        return _clamp_exp(self.log_empirical_constant)

    @property
    def violations(self) -> list[Record]:
        return [r for r in self.records if not r.passed]

    @property
    def within_budget(self) -> bool:
        if self.log_budget is None:
            return True
        return self.log_empirical_constant <= self.log_budget + math.log1p(SLACK)

    @property
    def passed(self) -> bool:
        return not self.violations and self.within_budget

    def merge(self, other: "VerificationReport") -> None:
        self.records.extend(other.records)
        self.flags.extend(other.flags)
        # verifiers key extras by instance id, so plain updates do not collide
        self.extras.update(other.extras)
        self.constants.update(other.constants)

    def step_summary(self) -> dict:
        out: dict[str, dict] = {}
        for r in self.records:
            s = out.setdefault(r.step, {"count": 0, "violations": 0, "max_log_ratio": -math.inf,
                                        "exact": r.exact})
            s["count"] += 1
            s["violations"] += int(not r.passed)
            if not r.degenerate and r.log_ratio > s["max_log_ratio"]:
                s["max_log_ratio"] = r.log_ratio
        return out

    def summary(self) -> dict:
        w = self.witness_record
        return {
            "suite": self.suite,
            "passed": self.passed,
            "records": len(self.records),
            "violations": len(self.violations),
            "empirical_constant": self.empirical_constant,
            "log_empirical_constant": self.log_empirical_constant,
            "witness": None if w is None else w.witness(),
            "budget": None if self.log_budget is None else _clamp_exp(self.log_budget),
            "log_budget": self.log_budget,
            "within_budget": self.within_budget,
            "constants": self.constants,
            "descriptor": self.descriptor,
            "steps": self.step_summary(),
            "first_violations": [r.witness() for r in self.violations[:10]],
            "flags": self.flags[:50],
            "extras": self.extras,
        }

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
            w.writeheader()
            for r in self.records:
                w.writerow(r.row())
