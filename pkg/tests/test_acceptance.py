"""The ten acceptance criteria, each at its stated tolerance.

Every criterion prints one ``criterion N: PASS|FAIL`` line (also repeated in
the terminal summary).  The printed claim displays that do not hold as
stated are reported by a separate FAIL line and a strict xfail.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from olab.config import ExperimentConfig
from olab.grid import DyadicCube, DyadicGrid, GridFunction
from olab.maximal import m_gamma_phi, m_phi_dyadic, naive_maximal
from olab.orlicz import LuxemburgQuery, luxemburg_norm
from olab.runner import Runner
from olab.weights import tau_n
from olab.young import make_canonical

from .conftest import ACCEPTANCE
from .oracles import luxemburg_indicator, luxemburg_power

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SEEDS = (0, 1, 2)
TOL = 0.10


def report(k: int, ok: bool, detail: str, key=None) -> None:
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE[key if key is not None else k] = line
    print(line)


def load(name: str, **over) -> ExperimentConfig:
    cfg = ExperimentConfig.load(CONFIGS / f"{name}.json")
    for k, v in over.items():
        setattr(cfg, k, v)
    return cfg


def recorded(name: str, suite: str) -> float:
    data = json.loads((CONFIGS / "budgets.json").read_text())
    return data["configs"][name][suite]["log_recorded"]


def rel_dev(log_a: float, log_b: float) -> float:
    return abs(math.expm1(log_a - log_b))


def steps_of(rep, *names):
    return [r for r in rep.records if r.step in names]


@pytest.fixture(scope="module")
def lemmas():
    t0 = time.perf_counter()
    runner = Runner(load("lemmas"))
    res = {}
    for s in ("cz_sandwich", "level_set"):
        res[s] = runner.run_suite(s)
    t1 = time.perf_counter()
    res["reverse_holder"] = runner.run_suite("reverse_holder")
    res["rh_seconds"] = time.perf_counter() - t1
    res["seconds"] = time.perf_counter() - t0
    return res


@pytest.fixture(scope="module")
def claims():
    out = {}
    for seed in SEEDS:
        out[seed] = Runner(load("claims", seed=seed)).run()
    return out


# ---------------------------------------------------------------- 1
def test_criterion1_luxemburg_closed_forms():
    rng = np.random.Generator(np.random.PCG64(101))
    t0 = time.perf_counter()
    worst_pow = worst_ind = 0.0
    count = 0
    for i in range(120):
        n = int(rng.integers(1, 3))
        grid = DyadicGrid(n, 8 // n)
        g = GridFunction(grid, rng.random(grid.num_cells) * 10 ** rng.uniform(-3, 3))
        level = int(rng.integers(0, grid.L + 1))
        Q = DyadicCube.from_index(level, int(rng.integers(0, 2 ** (n * level))), n)
        r = float(rng.uniform(1.0, 4.0))
        got = luxemburg_norm(LuxemburgQuery(g, Q, make_canonical(r, 0.0)))
        ref = luxemburg_power(g.values[grid.cells_in(Q)].tolist(), r)
        worst_pow = max(worst_pow, abs(got / ref - 1))
        count += 1

        # chi_E with E a random nonempty union of cells of Q
        cells = grid.cells_in(Q)
        m = int(rng.integers(1, cells.size + 1))
        chi = np.zeros(grid.num_cells)
        chi[rng.choice(cells, m, replace=False)] = 1.0
        delta = float(rng.uniform(0.0, 3.0))
        got = luxemburg_norm(LuxemburgQuery(GridFunction(grid, chi), Q, make_canonical(r, delta)))
        ref = luxemburg_indicator(1.0, m / cells.size, r, delta)
        worst_ind = max(worst_ind, abs(got / ref - 1))
    secs = time.perf_counter() - t0
    ok = worst_pow <= 1e-10 and worst_ind <= 1e-8 and secs < 5 and count >= 100
    report(1, ok, f"({count} instances, max rel err power {worst_pow:.2e}, "
                  f"indicator {worst_ind:.2e}, {secs:.2f} s)")
    assert ok


# ---------------------------------------------------------------- 2
def test_criterion2_maximal_oracle():
    rng = np.random.Generator(np.random.PCG64(202))
    phis = [make_canonical(1.0, 0.0), make_canonical(1.0, 1.0), make_canonical(2.5, 2.0)]
    grids = [DyadicGrid(1, L) for L in range(9)] + [DyadicGrid(2, L) for L in range(5)]
    checked = mismatches = 0
    for grid in grids:
        fs = [rng.random(grid.num_cells) * 10,
              np.where(rng.random(grid.num_cells) < 0.2, 50.0, 0.0),
              np.exp(rng.normal(0, 3, grid.num_cells))]
        for vals in fs:
            f = GridFunction(grid, vals)
            for phi in phis:
                fast = m_phi_dyadic(f, phi)
                ov, ol = naive_maximal(f, phi)
                mismatches += int(not (np.array_equal(fast.values, ov)
                                       and np.array_equal(fast.argmax_level, ol)))
                for gamma in (0.25 * grid.n, 0.75 * grid.n):
                    fg = m_gamma_phi(f, phi, gamma)
                    gv, gl = naive_maximal(f, phi, gamma)
                    mismatches += int(not (np.array_equal(fg.values, gv)
                                           and np.array_equal(fg.argmax_level, gl)))
                checked += 3
    ok = mismatches == 0
    report(2, ok, f"({checked} operator evaluations on {len(grids)} grids with n*L <= 8, "
                  f"{mismatches} mismatches)")
    assert ok


# ---------------------------------------------------------------- 3
def test_criterion3_cz_sandwich(lemmas):
    rep = lemmas["cz_sandwich"]
    prim = steps_of(rep, "lower", "upper")
    sec = steps_of(rep, "secondary_lower", "secondary_upper")
    cov = steps_of(rep, "covering")
    ok = not rep.violations and prim and sec and cov
    report(3, bool(ok), f"({len(prim) // 2} cubes, {len(sec) // 2} secondary cubes, "
                        f"{len(cov)} coverings, {len(rep.violations)} violations)")
    assert ok


# ---------------------------------------------------------------- 4
def test_criterion4_reverse_holder(lemmas):
    rep = lemmas["reverse_holder"]
    secs = lemmas["rh_seconds"]
    n = load("lemmas").n
    ok = (not rep.violations and len(rep.records) > 0 and tau_n(1) == 2.0 ** 12
          and tau_n(2) == 2.0 ** 13 and secs < 60)
    report(4, ok, f"({rep.descriptor['instances']} weights, {len(rep.records)} records, "
                  f"{len(rep.violations)} violations, {secs:.1f} s at n={n}, L=10)")
    assert ok


# ---------------------------------------------------------------- 5
def test_criterion5_level_set(lemmas):
    rep = lemmas["level_set"]
    ok = not rep.violations and len(rep.records) > 0
    report(5, ok, f"({len(rep.records)} records, {len(rep.violations)} violations)")
    assert ok


# ---------------------------------------------------------------- 6
CHAIN = ("holder_certified", "rh_step", "wk_norm", "wk_luxemburg", "tau_step",
         "tau_step_assembled", "tau_bound", "tau_bound_ell")


def test_criterion6_claims(claims):
    lines, ok = [], True
    for suite in ("claim1", "claim3"):
        reps = {s: claims[s].reports[suite] for s in SEEDS}
        base = reps[0]
        chain = steps_of(base, *CHAIN)
        final = steps_of(base, "final")
        viol = sum(len(r.violations) for r in reps.values())
        logs = [reps[s].log_empirical_constant for s in SEEDS]
        dev = max(rel_dev(lc, recorded("claims", suite)) for lc in logs)
        good = viol == 0 and bool(chain) and bool(final) and dev <= TOL
        ok &= good
        lines.append(f"{suite}: {len(chain)} chain + {len(final)} final checks, {viol} violations, "
                     f"constant {math.exp(logs[0]):.4g}, max dev {dev:.1%}")
    report(6, ok, "(" + "; ".join(lines) + ")")
    assert ok


@pytest.fixture(scope="module")
def literal():
    return Runner(load("claims")).run(["claim1_literal", "claim3_literal"])


def test_criterion6_printed_displays_reported(literal):
    bad = {s: len(r.violations) for s, r in literal.reports.items()}
    steps = sorted({r.step for rep in literal.reports.values() for r in rep.violations})
    report(6, not any(bad.values()),
           f"[printed displays as stated] ({', '.join(f'{s}: {v} violations' for s, v in bad.items())}"
           f" in {', '.join(steps)}; see decisions ledger)", key=6.5)
    assert all(r.records for r in literal.reports.values())


@pytest.mark.xfail(strict=True, reason="the printed generalized Hölder display (constant 1) "
                                       "fails; it needs the factor 2 kappa")
def test_criterion6_printed_displays_hold(literal):
    assert all(r.passed for r in literal.reports.values())


# ---------------------------------------------------------------- 7
def test_criterion7_theorem1():
    logs, secs, finite, worst_inst = [], [], True, 0
    for seed in SEEDS:
        t0 = time.perf_counter()
        rep = Runner(load("theorem1", seed=seed)).run_suite("theorem1")
        secs.append(time.perf_counter() - t0)
        logs.append(rep.log_empirical_constant)
        per: dict[str, float] = {}
        for r in rep.records:
            if r.step == "weak" and not r.degenerate:
                per[r.instance_id] = max(per.get(r.instance_id, -math.inf), r.log_ratio)
        finite &= bool(per) and all(v < math.inf for v in per.values()) and not rep.violations
        worst_inst = max(worst_inst, len(per))
    dev = max(rel_dev(lc, recorded("theorem1", "theorem1")) for lc in logs)

    classical = Runner(load("classical")).run_suite("theorem1")
    ts = sorted({r.t for r in classical.records if r.t is not None})
    cl_ok = (classical.passed and math.isfinite(classical.log_empirical_constant)
             and ts[0] <= 1e-3 * (1 + 1e-9) and ts[-1] >= 1e3 * (1 - 1e-9))
    ok = finite and dev <= TOL and cl_ok and max(secs) < 300
    report(7, ok, f"({worst_inst} instances finite={finite}, constants "
                  f"{', '.join(f'{math.exp(x):.4g}' for x in logs)} vs recorded "
                  f"{math.exp(recorded('theorem1', 'theorem1')):.4g} (max dev {dev:.1%}), "
                  f"classical constant {classical.empirical_constant:.4g} over t in "
                  f"[{ts[0]:g}, {ts[-1]:g}], slowest run {max(secs):.1f} s)")
    assert ok


# ---------------------------------------------------------------- 8
def test_criterion8_corollaries():
    reps = [Runner(load(name)).run_suite("corollaries") for name in ("classical", "claims")]
    contraction = [r for rep in reps for r in steps_of(rep, "contraction")]
    per_v: dict[str, int] = {}
    for r in contraction:
        per_v[r.instance_id] = per_v.get(r.instance_id, 0) + 1
    ge = [r for rep in reps for r in steps_of(rep, "mv_ge_v")]
    const_v = [r for r in ge if "v=one" in r.instance_id]
    pos = [r for rep in reps for r in steps_of(rep, "c_positive")]
    c_min = min(math.exp(r.log_rhs) for r in pos)
    ok = (all(r.passed for r in contraction) and min(per_v.values()) >= 100
          and const_v and all(r.passed for r in const_v)
          and all(r.passed and r.log_rhs > -math.inf for r in pos)
          and all(rep.passed for rep in reps))
    report(8, bool(ok), f"({len(contraction)} contraction draws over {len(per_v)} weights, "
                        f"c >= 1 on {len(const_v)} constant-v instances, "
                        f"min recorded c {c_min:.6g} over {len(pos)} instances)")
    assert ok


# ---------------------------------------------------------------- 9
def test_criterion9_fractional():
    parts, ok = [], True
    for name in ("fractional", "fractional_classical"):
        res = Runner(load(name)).run()
        ex = res.reports["exponents"]
        ids = {r.instance_id for r in ex.records}
        pw = steps_of(res.reports["fractional_mid"], "pointwise_xi_phi")
        C = max(r.log_lhs for r in pw) if pw else math.inf
        mid, diag = res.reports["fractional_mid"], res.reports["fractional_diag"]
        tol_ok = all(r.log_rhs == math.log(1e-12) for r in ex.records if r.step != "beta_gt_1")
        good = (ex.passed and len(ids) >= 50 and tol_ok
                and pw and all(r.passed for r in pw) and math.isfinite(C)
                and mid.passed and diag.passed
                and math.isfinite(mid.log_empirical_constant)
                and math.isfinite(diag.log_empirical_constant))
        ok &= bool(good)
        parts.append(f"{name}: {len(ids)} draws, pointwise C {math.exp(C):.4g}, "
                     f"log constants mid {mid.log_empirical_constant:.4g} "
                     f"diag {diag.log_empirical_constant:.4g}")
    report(9, ok, "(" + "; ".join(parts) + ")")
    assert ok


# ---------------------------------------------------------------- 10
def test_criterion10_determinism(tmp_path, monkeypatch):
    compared = differ = 0
    for name in ("classical", "fractional"):
        for i, threads in enumerate(("1", "4")):
            monkeypatch.setenv("OLAB_THREADS", threads)
            Runner(load(name)).run().write(tmp_path / f"{name}{i}")
        for p in sorted((tmp_path / f"{name}0").glob("*.csv")):
            compared += 1
            differ += int(p.read_bytes() != (tmp_path / f"{name}1" / p.name).read_bytes())
    ok = compared > 0 and differ == 0
    report(10, ok, f"({compared} CSVs compared across two runs, {differ} differ)")
    assert ok
