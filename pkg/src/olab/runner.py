"""Suite execution: expands a config into independent instances, runs them
(optionally on a thread pool capped by OLAB_THREADS) and merges the reports in
instance order."""
from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .config import Corpus, ExperimentConfig, _finite, build_corpus
from .cz import build
from .verify import (InternalConsistencyError, VerificationReport, admissible,
                     exponent_identities, linf_contraction, verify_claim1, verify_claim3,
                     verify_corollaries, verify_cz_sandwich, verify_fractional_diag,
                     verify_fractional_mid, verify_level_set_lemma, verify_reverse_holder,
                     verify_theorem1)
from .verify.lemmas import level_set_constants
from .verify.report import check
from .weights import certify_q
from .young import ParameterError, from_spec, make_canonical

LITERAL = {"claim1_literal": "claim1", "claim3_literal": "claim3"}


def thread_cap() -> int:
    raw = os.environ.get("OLAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class Task:
    key: str
    fn: Callable[[], list[VerificationReport]]


@dataclass
class RunResult:
    config: ExperimentConfig
    reports: dict[str, VerificationReport] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports.values())

    def summary(self) -> dict:
        return _finite({
            "name": self.config.name,
            "seed": self.config.seed,
            "passed": self.passed,
            "suites": {s: r.summary() for s, r in self.reports.items()},
        })

    def budget_diff(self) -> dict:
        out = {}
        for s, rep in self.reports.items():
            lb = rep.log_budget
            emp = rep.log_empirical_constant
            out[s] = {"log_budget": lb, "log_empirical_constant": emp,
                      "empirical_constant": rep.empirical_constant,
                      "log_ratio_to_budget": None if lb is None else emp - lb,
                      "regression": bool(lb is not None and not rep.within_budget)}
        return _finite(out)

    def write(self, out: Path) -> None:
        out.mkdir(parents=True, exist_ok=True)
        for s, rep in self.reports.items():
            rep.write_csv(out / f"{s}.csv")
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=1, sort_keys=True) + "\n")
        (out / "budget_diff.json").write_text(
            json.dumps(self.budget_diff(), indent=1, sort_keys=True) + "\n")


class Runner:
    def __init__(self, cfg: ExperimentConfig, corpus: Corpus | None = None):
        self.cfg = cfg
        self.corpus = build_corpus(cfg) if corpus is None else corpus
        self.phi = make_canonical(cfg.r, cfg.delta)
        self.t_grid = cfg.t_grid.values()
        self._adm: dict = {}

    # ------------------------------------------------------------ helpers
    def rng(self, *key: int) -> np.random.Generator:
        # per-task PCG64 streams keyed by (seed, task), so results do not
        # depend on scheduling
        seq = np.random.SeedSequence([self.cfg.seed, 1, *key])
        return np.random.Generator(np.random.PCG64(seq))

    def adm(self, un: str, vn: str, r: float | None = None):
        r = self.cfg.r if r is None else r
        k = (un, vn, r)
        if k not in self._adm:
            self._adm[k] = admissible(self.corpus.u[un], self.corpus.v[vn], r, self.cfg.q_budget)
        return self._adm[k]

    def eps_for(self, vn: str) -> list[float]:
        """Configured eps, or the ladder of the most restrictive u for this v."""
        if self.cfg.eps is not None:
            return list(self.cfg.eps)
        best = min((self.adm(un, vn) for un in self.corpus.u), key=lambda a: a.eps0)
        return list(best.ladder)

    def _skip(self, suite: str, key: str, exc: Exception) -> list[VerificationReport]:
        rep = VerificationReport(suite)
        rep.flags.append(f"{key}: skipped ({type(exc).__name__}: {exc})")
        return [rep]

    # -------------------------------------------------------------- tasks
    def tasks(self, suite: str) -> list[Task]:
        c, cfg = self.corpus, self.cfg
        U, V, F = sorted(c.u), sorted(c.v), sorted(c.f)
        out: list[Task] = []
        if suite == "cz_sandwich":
            for vn, fn, a in itertools.product(V, F, cfg.a_values):
                key = f"v={vn}|f={fn}|a={a:g}"
                out.append(Task(key, lambda vn=vn, fn=fn, a=a, key=key: self._sandwich(vn, fn, a, key)))
        elif suite == "reverse_holder":
            ws = [(f"u={n}", c.u[n]) for n in U] + [(f"v={n}", c.v[n]) for n in V]
            if cfg.r != 1:
                ws += [(f"v={n}^r", c.v[n] ** cfg.r) for n in V]
            for i, (key, w) in enumerate(ws):
                out.append(Task(key, lambda w=w, key=key, i=i: [
                    verify_reverse_holder(w, key, rng=self.rng(0, i))]))
        elif suite == "level_set":
            for un, vn, fn, a in itertools.product(U, V, F, cfg.a_values):
                key = f"u={un}|v={vn}|f={fn}|a={a:g}"
                out.append(Task(key, lambda un=un, vn=vn, fn=fn, a=a, key=key:
                                self._level_set(un, vn, fn, a, key)))
        elif suite in ("claim1", "claim3", "claim1_literal", "claim3_literal"):
            mode = LITERAL.get(suite, suite)
            for vn, fn, a in itertools.product(V, F, cfg.a_values):
                key = f"v={vn}|f={fn}|a={a:g}"
                out.append(Task(key, lambda vn=vn, fn=fn, a=a, key=key:
                                self._claim(mode, suite, vn, fn, a, key)))
        elif suite == "theorem1":
            for un, vn, fn in itertools.product(U, V, F):
                key = f"u={un}|v={vn}|f={fn}"
                out.append(Task(key, lambda un=un, vn=vn, fn=fn, key=key: [verify_theorem1(
                    c.u[un], c.v[vn], c.f[fn], self.phi, cfg.r, cfg.delta, cfg.eps,
                    cfg.a_values[0], self.t_grid, key, trace=c.traced(fn, cfg.trace),
                    trace_every=cfg.trace_every, adm=self.adm(un, vn))]))
        elif suite == "corollaries":
            psi = self._psi_equiv()
            for un, vn, fn in itertools.product(U, V, F):
                key = f"u={un}|v={vn}|f={fn}"
                out.append(Task(key, lambda un=un, vn=vn, fn=fn, key=key: [verify_corollaries(
                    c.u[un], c.v[vn], c.f[fn], self.phi, psi, cfg.r, cfg.delta, cfg.eps,
                    self.t_grid, key, adm=self.adm(un, vn))]))
            for i, vn in enumerate(V):
                key = f"v={vn}|linf"
                out.append(Task(key, lambda vn=vn, key=key, i=i: [linf_contraction(
                    c.v[vn], self.phi, self.rng(1, i), name=key)]))
        elif suite == "exponents":
            out.append(Task("draws", lambda: [exponent_identities(self.rng(2))]))
        elif suite == "fractional_mid":
            for un, vn, fn, g, p in itertools.product(U, V, F, cfg.gamma, cfg.p):
                key = f"u={un}|v={vn}|f={fn}|gamma={g:g}|p={p:g}"
                out.append(Task(key, lambda un=un, vn=vn, fn=fn, g=g, p=p, key=key:
                                self._frac_mid(un, vn, fn, g, p, key)))
        elif suite == "fractional_diag":
            for un, vn, fn, g in itertools.product(U, V, F, cfg.gamma):
                key = f"u={un}|v={vn}|f={fn}|gamma={g:g}"
                out.append(Task(key, lambda un=un, vn=vn, fn=fn, g=g, key=key:
                                self._frac_diag(un, vn, fn, g, key)))
        else:
            raise ParameterError(f"unknown suite {suite!r}")
        return out

    def _psi_equiv(self):
        spec = self.cfg.psi_equiv
        if spec is None:
            return self.phi
        spec = dict(spec)
        base = {"kind": "canonical", "r": self.cfg.r, "delta": self.cfg.delta}
        if spec.get("kind") == "scaled":
            spec["base"] = {**base, **spec.get("base", {})}
        elif spec.get("kind", "canonical") == "canonical":
            spec = {**base, **spec}
        return from_spec(spec)

    def _decomposition(self, vn, fn, a):
        c = self.corpus
        return build(c.f[fn] * c.v[vn], self.phi, c.v[vn], self.cfg.r, a)

    def _sandwich(self, vn, fn, a, key):
        try:
            d = self._decomposition(vn, fn, a)
        except AssertionError as exc:
            rep = VerificationReport("cz_sandwich")
            rep.add(check(rep.suite, key, "build", math.inf, 0.0, cube=str(exc)[:200]))
            return [rep]
        rep = verify_cz_sandwich(d, key)
        rep.flags.extend(f"{key}: {m}" for m in d.flags)
        return [rep]

    def _level_set(self, un, vn, fn, a, key):
        c, cfg = self.corpus, self.cfg
        try:
            q, _ = certify_q(c.v[vn] ** cfg.r, budget=cfg.q_budget)
            consts = level_set_constants(c.u[un], c.v[vn], cfg.r, q, a, cfg.q_budget)
        except ParameterError as exc:
            return self._skip("level_set", key, exc)
        d = self._decomposition(vn, fn, a)
        return [verify_level_set_lemma(c.u[un], c.v[vn], cfg.r, q, a, d, key, consts)]

    def _claim(self, mode, suite, vn, fn, a, key):
        c, cfg = self.corpus, self.cfg
        try:
            eps_list = self.eps_for(vn)
        except ParameterError as exc:
            return self._skip(suite, key, exc)
        d = self._decomposition(vn, fn, a)
        verify = verify_claim1 if mode == "claim1" else verify_claim3
        reps = []
        for e in eps_list:
            main, literal = verify(c.f[fn], c.v[vn], self.phi, cfg.r, cfg.delta, e, d, a,
                                   f"{key}|eps={e:.6g}")
            reps.append(literal if suite in LITERAL else main)
        return reps

    def _frac_mid(self, un, vn, fn, g, p, key):
        c, cfg = self.corpus, self.cfg
        try:
            return [verify_fractional_mid(c.u[un], c.v[vn], c.f[fn], cfg.r, cfg.delta, g, p,
                                          self.t_grid, key)]
        except InternalConsistencyError as exc:
            rep = VerificationReport("fractional_mid")
            rep.add(check(rep.suite, key, "beta_gt_1", math.inf, 0.0, cube=str(exc)))
            return [rep]
        except ParameterError as exc:
            return self._skip("fractional_mid", key, exc)

    def _frac_diag(self, un, vn, fn, g, key):
        c, cfg = self.corpus, self.cfg
        reps = []
        try:
            if cfg.eps is None:
                q = 1.0 / (1.0 / cfg.r - g / cfg.n)
                eps_list = [self.adm(un, vn, q).ladder[0]]
            else:
                eps_list = list(cfg.eps)
            for e in eps_list:
                reps.append(verify_fractional_diag(c.u[un], c.v[vn], c.f[fn], cfg.r, cfg.delta,
                                                   g, e, self.t_grid, f"{key}|eps={e:.6g}"))
        except ParameterError as exc:
            return self._skip("fractional_diag", key, exc)
        return reps

    # ---------------------------------------------------------------- run
    def run_suite(self, suite: str) -> VerificationReport:
        tasks = self.tasks(suite)
        threads = min(thread_cap(), max(1, len(tasks)))
        if threads > 1:
            with ThreadPoolExecutor(threads) as ex:
                results = list(ex.map(lambda t: t.fn(), tasks))
        else:
            results = [t.fn() for t in tasks]
        merged = VerificationReport(suite, {"config": self.cfg.name, "instances": len(tasks)},
                                    log_budget=self.cfg.log_budgets.get(suite))
        for reps in results:
            for rep in reps:
                if merged.constant_steps is None and rep.constant_steps is not None:
                    merged.constant_steps = rep.constant_steps
                merged.merge(rep)
        return merged

    def run(self, suites=None) -> RunResult:
        res = RunResult(self.cfg)
        for s in (self.cfg.suites if suites is None else suites):
            res.reports[s] = self.run_suite(s)
        return res
