"""Per-cube chain of the two a^{kr} claims.

For a cube Q of the level-k decomposition (Gamma_{l,k} with l >= 0 for the
first claim, Lambda_{-1,k} for the third) the norm of g/a^k = |f| v/a^k is
split along A = {v <= t* a^k} and B = Q \\ A.  Every step below is a genuine
inequality and is checked exactly; the final displays are checked with the
constant assembled from those steps.  Displays whose printed form is not a
valid inequality go to a separate ``*_literal`` report.

All quantities are handled as logs: eps is small, so delta/eps and the
assembled constants are far outside the float range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..cz import CZDecomposition
from ..grid import DyadicCube, GridFunction
from ..orlicz import check_generalized_holder, log_holder_kappa, luxemburg_rows
from ..weights import rh_constant
from ..young import (LOG_SATURATION, ParameterError, YoungFunction, certify_family, eta_eps,
                     eta_tilde_eps)
from .report import VerificationReport, check


@lru_cache(maxsize=64)
def cached_log_kappa(delta: float, eps: float) -> float:
    return log_holder_kappa(eta_eps(delta, eps), eta_tilde_eps(delta, eps))


def _lse(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    m = x.max() if x.size else -math.inf
    if m == -math.inf:
        return -math.inf
    return float(m + math.log(np.exp(x - m).sum()))


def _logaddexp(*xs: float) -> float:
    return _lse(np.array(xs))


@dataclass
class ClaimConstants:
    """Logs of the constants used by the chain (see :func:`claim_constants`)."""
    r: float
    delta: float
    eps: float
    a: float
    C0: float
    t_star: float
    s: float
    RH: float
    log_Kp: float
    log_kappa: float
    log_phi2: float
    log_K2: float
    log_C_I: float
    log_C_II: float
    log_C3_II: float
    log_C_tau: float

    @property
    def log_C1(self) -> float:
        return max(self.log_C_I, self.log_C_II)

    @property
    def log_C3(self) -> float:
        return max(self.log_C_I, self.log_C3_II)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["log_C1"], d["log_C3"] = self.log_C1, self.log_C3
        return d


def claim_constants(phi: YoungFunction, v: GridFunction, r: float, delta: float, eps: float,
                    a: float) -> ClaimConstants:
    """Assemble the chain constants.

    K' = exp(e^{1/(1-eps)}) + [v^r]_{RH_s}^s bounds the eta_tilde norm of w_k,
    kappa is the Hölder factor, K'' = K' Phi(2) C0 2 kappa.  With
    tau' = 1/(2 a^{(l+1)(r+eps)} K'') the II-branch gives
    a^{kr} <= 2 K'' a^eps (1 + log 1/tau')^{delta/eps} a^{l eps} avg(Psi v^r)
    and 1 + log 1/tau' <= 2 max(l,1) (log 2K'' + 2 (r+eps) log a).
    """
    C0, t_star = phi.C0, phi.t_star
    if C0 is None or t_star is None:
        cert = certify_family(phi, r, delta)
        C0, t_star = cert.C0, cert.t_star
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    s = 1.0 + eps / r
    RH, _ = rh_constant(v ** r, s)
    log_Kp = math.log(math.exp(math.exp(1.0 / (1.0 - eps))) + RH ** s)
    la = math.log(a)
    log_phi2 = float(phi.log_eval(2.0))
    log_C_I = r * math.log(2.0) + math.log(C0) + delta * math.log(math.log(2.0 * t_star))
    if delta == 0:
        # w_k = chi_B, bounded by 1 in sup norm: no Hölder factor
        log_kappa = 0.0
        log_K2 = log_phi2 + math.log(C0)
        log_C_II = log_C3_II = log_K2
        log_C_tau = 0.0
    else:
        log_kappa = cached_log_kappa(float(delta), float(eps))
        log_K2 = log_Kp + log_phi2 + math.log(C0) + math.log(2.0) + log_kappa
        b = delta / eps
        L2K2 = math.log(2.0) + log_K2
        log_C_II = (math.log(2.0) + log_K2 + eps * la + b * math.log(2.0)
                    + b * math.log(L2K2 + 2.0 * (r + eps) * la))
        log_C3_II = math.log(2.0) + log_K2 + b * math.log1p(L2K2)
        log_C_tau = b * math.log(2.0) + b * math.log(math.log(2.0) + log_Kp + 2 * (r + eps) * la)
    return ClaimConstants(r, delta, eps, a, C0, t_star, s, RH, log_Kp, log_kappa, log_phi2,
                          log_K2, log_C_I, log_C_II, log_C3_II, log_C_tau)


@dataclass
class _Instance:
    name: str
    f: GridFunction
    v: GridFunction
    vr: GridFunction
    phi: YoungFunction
    psi: YoungFunction
    eta: YoungFunction
    eta_tilde: YoungFunction | None
    c: ClaimConstants
    F: GridFunction          # Phi(|f|), clamped at saturation
    log_F: np.ndarray
    log_psi_f: np.ndarray
    log_vr: np.ndarray


def _log_avg(grid, cells, logs: np.ndarray, Q: DyadicCube) -> float:
    """log of (1/|Q|) * integral over Q of exp(logs)."""
    return _lse(logs[cells]) + math.log(grid.cell_measure) - math.log(Q.measure)


def _local_avg(grid, logs: np.ndarray, Q: DyadicCube) -> float:
    """Same as :func:`_log_avg` for values already restricted to the cells of Q."""
    return _lse(logs) + math.log(grid.cell_measure) - math.log(Q.measure)


def _chain(inst: _Instance, d: CZDecomposition, k: int, Q: DyadicCube, ell: int, mode: str,
           main: VerificationReport, literal: VerificationReport, empirical: list) -> None:
    c = inst.c
    r, delta, eps, a = c.r, c.delta, c.eps, c.a
    la = math.log(a)
    grid = d.grid
    cells = grid.cells_in(Q)
    fQ, vQ = inst.f.values[cells], inst.v.values[cells]
    where = {"k": k, "l": ell, "cube": str(Q)}
    iid = inst.name
    S, Lt = main.suite, literal.suite

    def add(step, lhs, rhs):
        main.add(check(S, iid, step, lhs, rhs, **where))

    thr = a ** k
    A = vQ <= c.t_star * thr
    gQ = fQ * vQ / thr
    rows = np.stack([np.where(A, gQ, 0.0), np.where(A, 0.0, gQ)])
    nI, nII = luxemburg_rows(rows, np.ones_like(rows), inst.phi)
    full = d.pyramid[Q.level][Q.index] / thr
    add("split", math.log(full), math.log(nI + nII))
    add("branch", math.log(0.5), math.log(max(nI, nII)))

    log_akr = k * r * la
    log_avg_psi = _log_avg(grid, cells, inst.log_psi_f + inst.log_vr, Q)
    log_avg_Fvr = _log_avg(grid, cells, inst.log_F + inst.log_vr, Q)
    log_avg_vr = _log_avg(grid, cells, inst.log_vr, Q)
    m = max(ell, 1)
    b = delta / eps if delta else 0.0
    if mode == "claim1":
        log_factor = b * math.log(m) + ell * eps * la
        log_C = c.log_C1
    else:
        log_factor = 0.0
        log_C = c.log_C3

    # every cube: final display with the assembled constant, and the ratio
    # defining the empirical constant
    add("final", log_akr, log_C + log_factor + log_avg_psi)
    empirical.append(check(S, iid, "empirical", log_akr, log_factor + log_avg_psi, exact=False,
                           **where))

    with np.errstate(divide="ignore"):
        log_phi_2g = inst.phi.log_eval(2.0 * rows)
    if nI > 0.5:
        mean_I = _lse(log_phi_2g[0]) - math.log(cells.size)
        add("I_mean", 0.0, mean_I)
        log_avg_FvrA = _local_avg(grid, (inst.log_F + inst.log_vr)[cells][A], Q)
        add("I_bound", log_akr, c.log_C_I + log_avg_FvrA)
        add("I_psi", log_avg_Fvr, log_avg_psi)
        if mode == "claim3":
            # printed constant lacks the 2^r coming from Phi(2 v/a^k)
            lit = c.log_C_I - r * math.log(2.0)
            literal.add(check(Lt, iid, "I_bound_printed", log_akr, lit + log_avg_FvrA, **where))

    if nII <= 0.5:
        return
    B = ~A
    logv_rel = np.log(vQ[B]) - k * la        # log(v/a^k) > log t* >= 0 on B
    mean_II = _lse(log_phi_2g[1]) - math.log(cells.size)
    add("II_mean", 0.0, mean_II)
    log_w = delta * np.log(logv_rel) if delta else np.zeros(logv_rel.size)
    log_int_FWvr = _local_avg(grid, (inst.log_F + inst.log_vr)[cells][B] + log_w, Q)
    add("II_bound", mean_II, c.log_phi2 + math.log(c.C0) - log_akr + log_int_FWvr)
    add("II_akr", log_akr, c.log_phi2 + math.log(c.C0) + log_int_FWvr)

    if delta == 0:
        # sup norm of chi_B is 1; Hölder is trivial
        add("II_final", log_akr, c.log_C_II + log_avg_psi)
        return

    w = np.zeros(grid.num_cells)
    w[cells[B]] = np.exp(log_w)
    hr = check_generalized_holder(inst.F, GridFunction(grid, w), Q, inst.eta, inst.eta_tilde,
                                  inst.vr, log_kappa=c.log_kappa)
    main.add(check(S, iid, "holder_certified", hr.log_lhs, hr.log_rhs + hr.log_factor, **where))
    literal.add(check(Lt, iid, "holder_printed", hr.log_lhs, hr.log_rhs, **where))
    lnF, lnW = hr.log_norm_f, hr.log_norm_w

    # eta_tilde mean of w_k, split at log(v/a^k) = eps^{1/(eps-1)}
    cut = eps ** (1.0 / (eps - 1.0))
    log_et_w = inst.eta_tilde.log_rule(log_w)
    log_mu_Q = _lse(inst.log_vr[cells])
    log_mean_et = _lse(log_et_w + inst.log_vr[cells][B]) - log_mu_Q
    log_et_c = float(inst.eta_tilde.log_rule(np.array(delta / (eps - 1.0) * math.log(eps))))
    big = logv_rel > cut
    log_tail = _lse(((r + eps) * np.log(vQ[B]) - k * eps * la)[big]) - log_mu_Q
    rhsA = _logaddexp(log_et_c, log_tail)
    add("stepA", log_mean_et, rhsA)
    add("stepB", log_et_c, math.exp(1.0 / (1.0 - eps)))
    add("wk_luxemburg", lnW, max(rhsA, 0.0))
    log_avg_vrs = _local_avg(grid, (r + eps) * np.log(vQ), Q)
    add("rh_step", log_avg_vrs, c.s * math.log(c.RH) + c.s * log_avg_vr)
    lam_bound = (k + ell + 1) * eps * la if mode == "claim1" else k * eps * la
    add("lambda_step", (c.s - 1.0) * log_avg_vr, lam_bound)
    log_w_bound = c.log_Kp + ((ell + 1) * eps * la if mode == "claim1" else 0.0)
    add("wk_norm", lnW, log_w_bound)

    # tau-step: ||F|| <= tau + tau eta(1/tau) mean eta(F), then the two terms
    if mode == "claim1":
        log_tau = -(math.log(2.0) + (ell + 1) * (r + eps) * la + c.log_Kp)
    else:
        log_tau = -(math.log(2.0) + c.log_Kp)
    eta_rule = inst.eta.log_rule
    fpos = np.isfinite(inst.log_F[cells])
    lF = inst.log_F[cells][fpos]
    lmu = inst.log_vr[cells][fpos]
    log_mean_eta_F_tau = _lse(eta_rule(lF - log_tau) + lmu) - log_mu_Q
    log_mean_eta_F = _lse(eta_rule(lF) + lmu) - log_mu_Q
    log_tau_eta = float(eta_rule(np.array(-log_tau))) + log_tau     # tau * eta(1/tau)
    add("inf_form", lnF, log_tau + math.log1p(math.exp(min(log_mean_eta_F_tau, LOG_SATURATION))))
    add("submult", log_tau + _logaddexp(0.0, log_mean_eta_F_tau),
        _logaddexp(log_tau, log_tau_eta + log_mean_eta_F))
    lhs_tau = log_avg_vr + lnF + lnW
    half = log_akr - math.log(2.0)
    add("tau_step", lhs_tau, _logaddexp(half, log_w_bound + log_tau_eta + log_avg_psi))
    if mode == "claim3":
        literal.add(check(Lt, iid, "tau_step_printed", lhs_tau,
                          _logaddexp(half, log_tau_eta + log_avg_psi), **where))
    else:
        rhs1 = b * (math.log(2.0) + math.log(math.log(2.0) + c.log_Kp + (ell + 1) * (r + eps) * la))
        add("tau_bound", log_tau_eta, rhs1)
        add("tau_bound_ell", rhs1, c.log_C_tau + b * math.log(m))

    # the same step with tau' absorbing the Hölder factor
    hold = c.log_phi2 + math.log(c.C0) + math.log(2.0) + c.log_kappa
    extra = (ell + 1) * (r + eps) * la if mode == "claim1" else 0.0
    log_tau2 = -(math.log(2.0) + extra + c.log_K2)
    log_tau2_eta = float(eta_rule(np.array(-log_tau2))) + log_tau2
    k2_term = c.log_K2 + ((ell + 1) * eps * la if mode == "claim1" else 0.0)
    add("tau_step_assembled", hold + lhs_tau,
        _logaddexp(half, k2_term + log_tau2_eta + log_avg_psi))
    II_C = c.log_C_II + log_factor if mode == "claim1" else c.log_C3_II
    add("II_final", log_akr, II_C + log_avg_psi)


def _instance(name, f, v, phi, r, delta, eps, a) -> tuple[_Instance, list[str]]:
    flags = []
    c = claim_constants(phi, v, r, delta, eps, a)
    psi = eta_eps(delta, eps).compose(phi)
    log_F = phi.log_eval(f.values)
    if (log_F > LOG_SATURATION).any():
        flags.append(f"{name}: Phi(|f|) saturated")
    F = GridFunction(f.grid, np.exp(np.minimum(log_F, LOG_SATURATION)))
    vr = v ** r
    with np.errstate(divide="ignore"):
        log_vr = r * np.log(v.values)
    inst = _Instance(name, f, v, vr, phi, psi, eta_eps(delta, eps),
                     eta_tilde_eps(delta, eps) if delta else None, c, F, log_F,
                     psi.log_eval(f.values), log_vr)
    return inst, flags


def _verify(mode, f, v, phi, r, delta, eps, d, a, name):
    if d.v is None:
        raise ParameterError("the decomposition must be classified")
    a = d.a if a is None else a
    inst, flags = _instance(name, f, v, phi, r, delta, eps, a)
    desc = {"instance": name, "phi": phi.name, "r": r, "delta": delta, "eps": eps, "a": a}
    main = VerificationReport(mode, desc, constants={name: inst.c.as_dict()},
                              constant_steps=("empirical",), flags=flags)
    literal = VerificationReport(mode + "_literal", desc)
    empirical: list = []
    for k in d.ks:
        lv = d.levels[k]
        if lv.skipped:
            continue
        for i, Q in enumerate(lv.cubes):
            ell = lv.ell[i]
            if mode == "claim1" and (ell < 0 or not lv.gamma[i]):
                continue
            if mode == "claim3" and ell != -1:
                continue
            _chain(inst, d, k, Q, ell, mode, main, literal, empirical)
    main.extend(empirical)
    return main, literal


def verify_claim1(f: GridFunction, v: GridFunction, phi: YoungFunction, r: float, delta: float,
                  eps: float, d: CZDecomposition, a: float | None = None,
                  name: str = "instance") -> tuple[VerificationReport, VerificationReport]:
    """Chain and final display on every Gamma_{l,k} cube with l >= 0.

    Returns the main report and the report of printed displays that are not
    valid as stated."""
    return _verify("claim1", f, v, phi, r, delta, eps, d, a, name)


def verify_claim3(f: GridFunction, v: GridFunction, phi: YoungFunction, r: float, delta: float,
                  eps: float, d: CZDecomposition, a: float | None = None,
                  name: str = "instance") -> tuple[VerificationReport, VerificationReport]:
    """Same chain over the Lambda_{-1,k} cubes with the l-free bounds."""
    return _verify("claim3", f, v, phi, r, delta, eps, d, a, name)
