"""Mixed weak-type estimate for M_Phi, its A_N / B_N decomposition, and the
corollaries (quotient by M_Phi v, equivalent Young functions, L^inf bound)."""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from ..cz import (PrincipalCubes, build_principal, classify, decompose, gamma_family,
                  principal_sum, secondary_decompose)
from ..grid import GridFunction
from ..maximal import m_phi_dyadic
from ..orlicz import norm_pyramid
from ..young import YoungFunction, eta_eps
from .claims import _lse
from .lemmas import level_set_constants
from .params import T_GRID, Admissible, admissible
from .report import VerificationReport, check


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def log_integral(log_integrand: np.ndarray, cell_measure: float) -> float:
    return _lse(log_integrand) + math.log(cell_measure)


def log_psi_integral(psi: YoungFunction, f: np.ndarray, log_weight: np.ndarray, t: float,
                     cell_measure: float) -> float:
    """log of the integral of psi(|f|/t) * exp(log_weight)."""
    pos = f > 0
    if not pos.any():
        return -math.inf
    lz = np.log(f[pos]) - math.log(t)
    return log_integral(psi.log_rule(lz) + log_weight[pos], cell_measure)


# ------------------------------------------------------------ A_N / B_N trace

def _decomposition_trace(rep: VerificationReport, name: str, t: float, u: GridFunction,
                         v: GridFunction, f: GridFunction, phi: YoungFunction, r: float,
                         a: float, pyramid: list[np.ndarray], adm: Admissible,
                         lemma: dict, lhs_total: float) -> dict:
    grid = u.grid
    g = f * v / t
    d = decompose(g, phi, a, pyramid=[p / t for p in pyramid])
    classify(d, v, r)
    secondary_decompose(d)
    uvals = u.values
    vr = v ** r
    vr_int = vr.level_integrals
    u_int = u.level_integrals
    uvr = uvals * vr.values * grid.cell_measure
    cm = grid.cell_measure
    la = math.log(a)
    per_k = {}
    covered_mass = 0.0
    skipped = []
    for k in d.ks:
        lv = d.levels[k]
        if lv.skipped:
            skipped.append(k)
            continue
        E = d.level_set(k)
        Ek = float(uvr[E].sum())
        covered_mass += Ek
        A = S1 = S2 = 0.0
        for i, Q in enumerate(lv.cubes):
            ell = lv.ell[i]
            if ell < 0 or not lv.gamma[i]:
                continue
            cells = grid.cells_in(Q)
            uE = float(uvals[cells][E[cells]].sum()) * cm
            uQ = float(u_int[Q.level][Q.index])
            A += a ** ((k + 1) * r) * uE
            coef = lemma["c1"] * math.exp(-lemma["c2"] * ell * r)
            S1 += coef * a ** ((k + 1) * r) * uQ
            S2 += coef * a ** (r * (1 - ell)) * lv.avg_vr[i] * uQ
        B = B1 = 0.0
        for i in lv.family(-1):
            for S, m, gm in zip(lv.secondary[i], lv.secondary_avg[i], lv.secondary_gamma[i]):
                if not gm:
                    continue
                uS = float(u_int[S.level][S.index])
                B += a ** ((k + 1) * r) * uS
                B1 += a ** r * m * uS
        per_k[k] = (Ek, A, B, S1, S2, B1)

    where = {"t": t}
    ks = sorted(per_k)
    stab = []
    accE = accA = accB = 0.0
    for N in reversed(ks):
        Ek, A, B = per_k[N][:3]
        accE, accA, accB = accE + Ek, accA + A, accB + B
        rep.add(check(rep.suite, name, "decomp", _log(accE), _log(accA + accB), k=N, **where))
        stab.append({"N": N, "sum_uvr_E": accE, "A_N": accA, "B_N": accB})
    tot = [sum(per_k[k][i] for k in ks) for i in range(6)]
    _, A_N, B_N, S1, S2, B1 = tot
    rep.add(check(rep.suite, name, "A_lemma", _log(A_N), _log(S1), **where))
    rep.add(check(rep.suite, name, "A_average", _log(S1), _log(S2), **where))
    rep.add(check(rep.suite, name, "B_average", _log(B_N), _log(B1), **where))
    uncovered = lhs_total - covered_mass
    rep.add(check(rep.suite, name, "coverage", _log(max(uncovered, 0.0)),
                  _log(lhs_total), exact=False, **where))

    # principal cubes for every l >= 0 present and for l = -1
    ells = sorted({e for k in ks for e, gm in zip(d.levels[k].ell, d.levels[k].gamma)
                   if e >= 0 and gm})
    h_consts = {}
    avg_u = u.level_averages()
    for ell in ells:
        fam = gamma_family(d, ell)
        P = build_principal(fam, u, "ell")
        T = sum(vr_int[Q.level][Q.index] / Q.measure * u_int[Q.level][Q.index] for Q, _ in fam)
        grouped = _group(P)
        rhs = 0.0
        for Pm, members in grouped.items():
            Pq = Pm[0]
            s = sum(vr_int[Q.level][Q.index] for Q, _ in members)
            rhs += 2.0 * avg_u[Pq.level][Pq.index] * s
            rep.add(check(rep.suite, name, "A_overlap", _log(s), _log(vr_int[Pq.level][Pq.index]),
                          exact=False, k=Pm[1], l=ell, cube=str(Pq), **where))
            kP = Pm[1]
            rep.add(check(rep.suite, name, "A_principal_level",
                          -ell * r * la + _log(vr_int[Pq.level][Pq.index] / Pq.measure),
                          (kP + 1) * r * la, k=kP, l=ell, cube=str(Pq), **where))
        rep.add(check(rep.suite, name, "A_principal", _log(T), _log(rhs), l=ell, **where))
        _, C = principal_sum(P, u)
        h_consts[ell] = C
        rep.add(check(rep.suite, name, "h1", _log(C), 0.0, exact=False, l=ell, **where))

    fam = gamma_family(d, -1)
    if fam:
        P = build_principal(fam, u, "minus_one", beta=adm.beta, a=a, r=r)
        T = sum(vr_int[Q.level][Q.index] / Q.measure * u_int[Q.level][Q.index] for Q, _ in fam)
        rhs = 0.0
        theta = adm.theta
        for Pm, members in _group(P).items():
            Pq, kP = Pm
            by_k = defaultdict(list)
            for Q, k in members:
                by_k[k].append(Q)
            vrP = vr_int[Pq.level][Pq.index]
            for k, cubes in by_k.items():
                s_vr = sum(vr_int[Q.level][Q.index] for Q in cubes)
                s_m = sum(Q.measure for Q in cubes)
                rhs += avg_u[Pq.level][Pq.index] * a ** ((k - kP) * adm.beta * r) * s_vr
                wk = {"k": k, "l": -1, "cube": str(Pq), **where}
                rep.add(check(rep.suite, name, "B_measure", _log(s_m), -k * r * la + _log(s_vr),
                              **wk))
                rep.add(check(rep.suite, name, "B_cap", -k * r * la + _log(s_vr),
                              grid.n * math.log(2) + (kP - k) * r * la + _log(Pq.measure), **wk))
                rep.add(check(rep.suite, name, "B_ainf", _log(s_vr),
                              math.log(2.0) + _log(vrP) + theta * (_log(s_m) - _log(Pq.measure)),
                              **wk))
        rep.add(check(rep.suite, name, "B_principal", _log(T), _log(rhs), l=-1, **where))
        _, C = principal_sum(P, u)
        h_consts[-1] = C
        rep.add(check(rep.suite, name, "h2", _log(C), 0.0, exact=False, l=-1, **where))
    return {"t": t, "A_N": A_N, "B_N": B_N, "uncovered_mass": uncovered,
            "skipped_levels": skipped, "stabilization": stab,
            "N_stable": min(ks) if ks else None, "h_constants": h_consts}


def _group(P: PrincipalCubes) -> dict:
    out = defaultdict(list)
    for member, principal in P.assignment.items():
        out[principal].append(member)
    return dict(sorted(out.items(), key=lambda kv: (kv[0][0].level, kv[0][1], kv[0][0].index)))


# ------------------------------------------------------------ theorem 1

def verify_theorem1(u: GridFunction, v: GridFunction, f: GridFunction, phi: YoungFunction,
                    r: float, delta: float, eps_list=None, a: float | None = None,
                    t_grid=T_GRID, name: str = "instance", trace: bool = True,
                    trace_every: int = 1, adm: Admissible | None = None,
                    budget: float | None = None) -> VerificationReport:
    """uv^r({M_Phi(fv)/v > t}) against the integral of Psi_eps(|f|/t) u v^r.

    The empirical constant is the sup over (eps, t) of lhs/rhs.  With ``trace``
    the level decomposition of g/t is rebuilt every ``trace_every`` grid
    points and the A_N / B_N pieces and their bounds are checked.
    """
    grid = u.grid
    a = float(2 ** (grid.n + 1)) if a is None else float(a)
    adm = admissible(u, v, r) if adm is None else adm
    eps_list = list(adm.ladder) if eps_list is None else list(eps_list)
    g = f * v
    pyramid = norm_pyramid(g, phi)
    M = m_phi_dyadic(g, phi, pyramid).values
    with np.errstate(divide="ignore"):
        log_uvr = np.log(u.values) + r * np.log(v.values)
    uvr = u.values * v.values ** r
    cm = grid.cell_measure
    desc = {"instance": name, "phi": phi.name, "r": r, "delta": delta, "eps": eps_list, "a": a,
            "t_grid": [float(t) for t in t_grid]}
    rep = VerificationReport("theorem1", desc, constant_steps=("weak",), budget=budget)
    consts = {"admissible": adm.as_dict(), "log_constant_by_eps": {}}
    lemma = level_set_constants(u, v, r, adm.q, a) if trace else None
    lhs_by_t = []
    for t in t_grid:
        lhs_by_t.append(float(uvr[M > t * v.values].sum() * cm))
    for eps in eps_list:
        psi = eta_eps(delta, eps).compose(phi)
        worst = -math.inf
        for t, lhs in zip(t_grid, lhs_by_t):
            lr = log_psi_integral(psi, f.values, log_uvr, t, cm)
            rec = rep.add(check(rep.suite, name, "weak", _log(lhs), lr, exact=False, t=t,
                                cube=f"eps={eps:.6g}"))
            if not rec.degenerate:
                worst = max(worst, rec.log_ratio)
            lphi = log_psi_integral(phi, f.values, log_uvr, t, cm)
            rep.add(check(rep.suite, name, "psi_ge_phi", lphi, lr, t=t, cube=f"eps={eps:.6g}"))
        consts["log_constant_by_eps"][f"{eps:.6g}"] = worst
    traces = []
    if trace:
        for i, (t, lhs) in enumerate(zip(t_grid, lhs_by_t)):
            if i % trace_every:
                continue
            if lhs <= 0:
                continue
            tr = _decomposition_trace(rep, name, float(t), u, v, f, phi, r, a, pyramid, adm,
                                      lemma, lhs)
            for eps in eps_list:
                psi = eta_eps(delta, eps).compose(phi)
                lr = log_psi_integral(psi, f.values, log_uvr, t, cm)
                for piece in ("A_N", "B_N"):
                    rep.add(check(rep.suite, name, piece + "_final", _log(tr[piece]), lr,
                                  exact=False, t=t, cube=f"eps={eps:.6g}"))
            if tr["skipped_levels"]:
                rep.flags.append(f"{name} t={t:.6g}: levels {tr['skipped_levels']} skipped "
                                 "(root norm above a^k)")
            traces.append(tr)
    rep.constants[name] = consts
    rep.extras[name] = {"traces": traces}
    return rep


# ------------------------------------------------------------ corollaries

def norm_equivalence(phi: YoungFunction, psi: YoungFunction, gs: list[GridFunction]) -> dict:
    """min and max over all cubes and all g of ||g||_psi / ||g||_phi."""
    lo, hi = math.inf, 0.0
    for g in gs:
        for a_, b_ in zip(norm_pyramid(g, psi), norm_pyramid(g, phi)):
            ok = b_ > 0
            if ok.any():
                ratio = a_[ok] / b_[ok]
                lo, hi = min(lo, float(ratio.min())), max(hi, float(ratio.max()))
    return {"A": lo, "B": hi}


def linf_contraction(v: GridFunction, phi: YoungFunction, rng: np.random.Generator,
                     draws: int = 100, name: str = "instance") -> VerificationReport:
    """||M_Phi(fv)/M_Phi v||_inf <= ||f||_inf on random f."""
    rep = VerificationReport("linf_contraction", {"instance": name, "draws": draws})
    Mv = m_phi_dyadic(v, phi).values
    for i in range(draws):
        f = GridFunction(v.grid, rng.random(v.grid.num_cells) * rng.uniform(0.1, 10.0))
        T = m_phi_dyadic(f * v, phi).values / Mv
        rep.add(check(rep.suite, name, "contraction", _log(float(T.max())),
                      _log(float(f.values.max())), cube=f"draw={i}"))
    return rep


def verify_corollaries(u: GridFunction, v: GridFunction, f: GridFunction, phi: YoungFunction,
                       psi_equiv: YoungFunction, r: float, delta: float, eps_list=None,
                       t_grid=T_GRID, name: str = "instance", adm: Admissible | None = None,
                       extra_gs: list[GridFunction] = (),
                       budget: float | None = None) -> VerificationReport:
    """(i) M_Phi v >= c v; (ii) the quotient estimate over the t-grid; (iii) the
    norm-equivalence constants A, B of psi_equiv against Phi; (iv) the estimate
    for psi_equiv with C2 = 2B/A and the measured C1."""
    grid = u.grid
    adm = admissible(u, v, r) if adm is None else adm
    eps_list = list(adm.ladder) if eps_list is None else list(eps_list)
    cm = grid.cell_measure
    with np.errstate(divide="ignore"):
        log_uvr = np.log(u.values) + r * np.log(v.values)
    uvr = u.values * v.values ** r
    rep = VerificationReport("corollaries", {"instance": name, "phi": phi.name,
                                             "psi_equiv": psi_equiv.name, "eps": eps_list},
                             constant_steps=("corollary1", "corollary3"), budget=budget)
    Mv = m_phi_dyadic(v, phi).values
    c = float((Mv / v.values).min())
    phi1 = float(phi(1.0))
    # with Phi(1) = 1 the single-cell norm of v is v itself, so c >= 1
    rep.add(check(rep.suite, name, "mv_ge_v", 0.0, _log(c), exact=(phi1 == 1.0)))
    rep.add(check(rep.suite, name, "c_positive", 0.0, _log(c), exact=False))

    Mfv = m_phi_dyadic(f * v, phi).values
    Tphi = Mfv / Mv
    S = Mfv / v.values
    gs = [f * v, v, *extra_gs]
    eq = norm_equivalence(phi, psi_equiv, gs)
    A, B = eq["A"], eq["B"]
    c1 = B / A
    C2 = 2.0 * c1
    Mv_psi = m_phi_dyadic(v, psi_equiv).values
    Tpsi = m_phi_dyadic(f * v, psi_equiv).values / Mv_psi
    pos = Tphi > 0
    worst = float((Tpsi[pos] / Tphi[pos]).max()) if pos.any() else 0.0
    rep.add(check(rep.suite, name, "quotient_equivalence", _log(worst), _log(c1)))
    for eps in eps_list:
        psi_e = eta_eps(delta, eps).compose(phi)
        eta_psi = eta_eps(delta, eps).compose(psi_equiv)
        for t in t_grid:
            where = {"t": t, "cube": f"eps={eps:.6g}"}
            lhs1 = float(uvr[Tphi > t].sum() * cm)
            lhs_s = float(uvr[S > t].sum() * cm)
            rhs1 = log_psi_integral(psi_e, f.values, log_uvr, t, cm)
            rep.add(check(rep.suite, name, "corollary1", _log(lhs1), rhs1, exact=False, **where))
            if c >= 1.0:
                rep.add(check(rep.suite, name, "quotient_subset", _log(lhs1), _log(lhs_s), **where))
            lhs3 = float(uvr[Tpsi > t].sum() * cm)
            rep.add(check(rep.suite, name, "quotient_psi_subset", _log(lhs3),
                          _log(float(uvr[Tphi > t / c1].sum() * cm)), **where))
            rhs3 = log_psi_integral(eta_psi, f.values, log_uvr, t / C2, cm)
            rep.add(check(rep.suite, name, "corollary3", _log(lhs3), rhs3, exact=False, **where))
            big = f.values > t / 2
            restricted = log_psi_integral(psi_e, np.where(big, f.values, 0.0), log_uvr,
                                          t / (2.0 * c1), cm)
            rep.add(check(rep.suite, name, "restricted", _log(lhs3), restricted, exact=False,
                          **where))
    rep.constants[name] = {"c": c, "A": A, "B": B, "c1": c1, "C2": C2,
                           "admissible": adm.as_dict()}
    return rep
