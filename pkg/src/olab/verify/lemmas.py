"""Reverse Hölder lemma with explicit tau_n and the level-set lemma for u."""
from __future__ import annotations

import math

import numpy as np

from ..cz import CZDecomposition
from ..grid import DyadicCube, GridFunction, cube_rows
from ..weights import a1_constant, a_infty_constant, a_q_constant, tau_n
from ..young import ParameterError
from .report import SLACK, Record, VerificationReport, check

RH_DRAWS = 200


def rh_exponents(w: GridFunction) -> dict:
    """[w]_Ainf, tau_n, r_w = 1 + 1/(tau_n [w]) and eps_w = 1/(1 + tau_n [w])."""
    ainf, _ = a_infty_constant(w)
    tn = tau_n(w.grid.n)
    return {"Ainf": ainf, "tau_n": tn, "r_w": 1.0 + 1.0 / (tn * ainf),
            "eps_w": 1.0 / (1.0 + tn * ainf)}


def _rows_to_records(suite, iid, step, j, n, log_lhs, log_rhs) -> list[Record]:
    out = []
    ok = log_lhs <= log_rhs + math.log1p(SLACK)
    for i in range(log_lhs.size):
        out.append(Record(suite, iid, step, float(log_lhs[i]), float(log_rhs[i]), bool(ok[i]),
                          cube=str(DyadicCube.from_index(j, i, n))))
    return out


def verify_reverse_holder(w: GridFunction, name: str = "w", draws: int = RH_DRAWS,
                          rng: np.random.Generator | None = None) -> VerificationReport:
    """Both reverse Hölder displays on every dyadic cube.

    The subset form is checked on the extremal subsets (the m largest cells,
    which maximise w(E) for |E| fixed, so this covers every union of cells)
    and on ``draws`` random cell subsets per cube.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    ex = rh_exponents(w)
    rw, ew = ex["r_w"], ex["eps_w"]
    grid = w.grid
    rep = VerificationReport("reverse_holder", {"weight": name, "n": grid.n, "L": grid.L},
                             constants={name: {**ex, "C": 2.0}})
    vals = w.values
    for j in range(grid.L + 1):
        rows = cube_rows(vals, grid, j)
        m = rows.shape[1]
        mean = rows.mean(axis=1)
        lhs = np.log((rows ** rw).mean(axis=1)) / rw
        rep.extend(_rows_to_records(rep.suite, name, "rh", j, grid.n, lhs,
                                    math.log(2.0) + np.log(mean)))

        total = rows.sum(axis=1)
        top = np.cumsum(-np.sort(-rows, axis=1), axis=1) / total[:, None]
        frac = np.arange(1, m + 1) / m
        gap = np.log(top) - (math.log(2.0) + ew * np.log(frac))[None, :]
        arg = np.argmax(gap, axis=1)
        idx = np.arange(rows.shape[0])
        rep.extend(_rows_to_records(rep.suite, name, "subset_extremal", j, grid.n,
                                    np.log(top[idx, arg]),
                                    math.log(2.0) + ew * np.log(frac[arg])))

        p = rng.random((rows.shape[0], draws, 1))
        mask = rng.random((rows.shape[0], draws, m)) < p
        size = mask.sum(axis=2)
        wE = (mask * rows[:, None, :]).sum(axis=2) / total[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            llhs = np.log(wE)
            lrhs = math.log(2.0) + ew * np.log(size / m)
            gap = np.where(size > 0, llhs - lrhs, -np.inf)
        arg = np.argmax(gap, axis=1)
        rep.extend(_rows_to_records(rep.suite, name, "subset_random", j, grid.n,
                                    llhs[idx, arg], lrhs[idx, arg]))
    return rep


def level_set_constants(u: GridFunction, v: GridFunction, r: float, q: float, a: float,
                        aq_budget: float = 100.0) -> dict:
    """c1, c2 of the level-set lemma with the certified constants they use."""
    if q <= 1:
        raise ParameterError(f"q must be > 1, got {q}")
    aq, _ = a_q_constant(v ** r, q)
    if aq > aq_budget:
        raise ParameterError(f"v^r is not certified in A_{q:g}: constant {aq:.6g} > {aq_budget}")
    ainf_u, _ = a_infty_constant(u)
    a1_u, _ = a1_constant(u)
    tn = tau_n(u.grid.n)
    expo = 1.0 / ((q - 1.0) * (1.0 + tn * ainf_u))
    return {"q": q, "Aq_vr": aq, "Ainf_u": ainf_u, "A1_u": a1_u, "tau_n": tn,
            "c1": 2.0 * (aq * a ** r) ** expo, "log_c1": math.log(2.0) + expo * math.log(aq * a ** r),
            "c2": math.log(a) * expo, "a": a, "r": r}


def verify_level_set_lemma(u: GridFunction, v: GridFunction, r: float, q: float, a: float,
                           d: CZDecomposition, name: str = "instance",
                           constants: dict | None = None) -> VerificationReport:
    """u(E_k n Q) <= c1 exp(-c2 r l) u(Q) on every Gamma_{l,k} cube with l >= 0,
    and the A_q step (|E_k n Q|/|Q|)^(q-1) <= [v^r]_Aq a^((1-l) r)."""
    if d.v is None:
        raise ParameterError("the decomposition must be classified")
    c = level_set_constants(u, v, r, q, a) if constants is None else constants
    grid = d.grid
    rep = VerificationReport("level_set", {"instance": name, "r": r, "q": q, "a": a},
                             constants={name: c})
    uv = u.values
    for k in d.ks:
        lv = d.levels[k]
        if lv.skipped:
            continue
        E = d.level_set(k)
        for i, Q in enumerate(lv.cubes):
            ell = lv.ell[i]
            if ell < 0 or not lv.gamma[i]:
                continue
            cells = grid.cells_in(Q)
            inE = E[cells]
            uE = float(uv[cells][inE].sum())
            uQ = float(uv[cells].sum())
            where = {"k": k, "l": ell, "cube": str(Q)}
            lhs = math.log(uE) if uE > 0 else -math.inf
            rep.add(check(rep.suite, name, "lemma", lhs,
                          c["log_c1"] - c["c2"] * r * ell + math.log(uQ), **where))
            frac = inE.mean()
            lhs2 = (q - 1.0) * math.log(frac) if frac > 0 else -math.inf
            rep.add(check(rep.suite, name, "aq_step", lhs2,
                          math.log(c["Aq_vr"]) + (1 - ell) * r * math.log(a), **where))
    return rep

