"""Mixed estimates for the fractional Orlicz maximal operator, off-diagonal
(r < p < n/gamma) and diagonal (p = r)."""
from __future__ import annotations

import math

import numpy as np

from ..grid import GridFunction
from ..maximal import m_gamma_phi, m_phi_dyadic
from ..young import (ParameterError, YoungFunction, fractional_exponents, inverse,
                     make_canonical, phi_gamma_eps, phi_small, psi_eps_fractional,
                     varphi_eps, xi)
from .claims import _lse
from .params import T_GRID, admissible
from .report import VerificationReport, check

Z_LATTICE = np.geomspace(1e-6, 1e6, 241)


class InternalConsistencyError(ArithmeticError):
    """A quantity the argument proves (e.g. beta > 1) does not hold numerically."""


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def mid_exponents(n: int, r: float, delta: float, gamma: float, p: float) -> dict:
    e = fractional_exponents(n, r, gamma, p)
    e["nu"] = n * delta / (n - r * gamma)
    if not e["beta"] > 1:
        raise InternalConsistencyError(f"beta = {e['beta']!r} is not > 1")
    return e


def exponent_identities(rng: np.random.Generator, n: int | None = None, draws: int = 50,
                        tol: float = 1e-12) -> VerificationReport:
    """sigma beta = q (1/p + 1/r'), 1/q = 1/p - gamma/n, the v-exponent identity
    sigma beta + (p - q)(1/p + 1/r') = 1 + p/r', and beta > 1, on random draws
    of (n, r, gamma, p) in the admissible range."""
    rep = VerificationReport("exponents", {"draws": draws, "tol": tol})
    for i in range(draws):
        nn = int(rng.integers(1, 3)) if n is None else n
        r = float(rng.uniform(1.0, 3.0))
        gamma = float(rng.uniform(0.05, 0.95)) * nn / r
        p = r + float(rng.uniform(0.05, 0.95)) * (nn / gamma - r)
        e = fractional_exponents(nn, r, gamma, p)
        q, s, b, irp = e["q"], e["sigma"], e["beta"], e["inv_r_prime"]
        tag = f"n={nn},r={r:.6g},gamma={gamma:.6g},p={p:.6g}"
        checks = {
            "sigma_beta": abs(s * b - q * (1 / p + irp)) / (q * (1 / p + irp)),
            "q_relation": abs(1 / q - (1 / p - gamma / nn)) / (1 / q),
            "v_exponent": abs(s * b + (p - q) * (1 / p + irp) - (1 + p * irp)) / (1 + p * irp),
        }
        for step, err in checks.items():
            rep.add(check(rep.suite, f"draw{i}", step, _log(err) if err > 0 else -math.inf,
                          math.log(tol), slack=0.0, cube=tag))
        rep.add(check(rep.suite, f"draw{i}", "beta_gt_1", 0.0, math.log(b), slack=0.0, cube=tag))
    return rep


def _lattice_constant(log_lhs: np.ndarray, log_rhs: np.ndarray) -> float:
    return float(np.max(log_lhs - log_rhs))


def verify_fractional_mid(u: GridFunction, v: GridFunction, f: GridFunction, r: float,
                          delta: float, gamma: float, p: float, t_grid=T_GRID,
                          name: str = "instance", budget: float | None = None,
                          ainf_budget: float = 100.0) -> VerificationReport:
    """(u v^{beta sigma}({M_{gamma,Phi}(fv)/M_phi v > t}))^{1/q} against
    [int (|f|/t)^p u^{p/q} v^{1+p/r'}]^{1/p}, plus the auxiliary bounds."""
    grid = u.grid
    n = grid.n
    e = mid_exponents(n, r, delta, gamma, p)
    q, sigma, beta, irp, nu = e["q"], e["sigma"], e["beta"], e["inv_r_prime"], e["nu"]
    from ..weights import a_infty_constant
    ainf, _ = a_infty_constant(v ** (beta * sigma))
    if ainf > ainf_budget:
        raise ParameterError(f"v^(beta sigma) not certified in A_inf: {ainf:.6g}")
    Phi = make_canonical(r, delta)
    phi = phi_small(n, r, delta, gamma, p)
    xi_f = xi(q, nu, sigma, beta)
    desc = {"instance": name, "n": n, "r": r, "delta": delta, "gamma": gamma, "p": p}
    rep = VerificationReport("fractional_mid", desc, constant_steps=("mid",), budget=budget)
    cm = grid.cell_measure

    # xi^{-1}(z) z^{gamma/n} <= C Phi^{-1}(z) for z >= 1
    z = Z_LATTICE[Z_LATTICE >= 1.0]
    lhs = np.log(inverse(xi_f, z)) + gamma / n * np.log(z)
    rhs = np.log(inverse(Phi, z))
    C_inv = _lattice_constant(lhs, rhs)
    rep.add(check(rep.suite, name, "xi_inverse", C_inv, 0.0, exact=False))

    # (M_xi v^beta)^{1/beta} <= C M_phi v cell-wise
    Mxi = m_phi_dyadic(v ** beta, xi_f).values ** (1.0 / beta)
    Mphi_v = m_phi_dyadic(v, phi).values
    C_pw = float(np.max(np.log(Mxi) - np.log(Mphi_v)))
    rep.add(check(rep.suite, name, "pointwise_xi_phi", C_pw, 0.0, exact=False))

    # M_{gamma,Phi}(f0/w) <= C [M_xi(f0^{p beta/q} / w^beta)]^{1/beta} (int f0^p)^{gamma/n}
    w = u ** (1.0 / q) * v ** (1.0 / p + irp - 1.0)
    f0 = f * w * v
    Mg = m_gamma_phi(f * v, Phi, gamma).values
    pos = Mg > 0
    if pos.any():
        inner = m_phi_dyadic(f0 ** (p * beta / q) / (w ** beta), xi_f).values ** (1.0 / beta)
        Ip = float((f0.values ** p).sum() * cm)
        with np.errstate(divide="ignore"):
            gap = np.log(Mg[pos]) - (np.log(inner[pos]) + gamma / n * math.log(Ip))
        rep.add(check(rep.suite, name, "fractional_pointwise", float(gap.max()), 0.0,
                      exact=False))

    weight_lhs = u.values * v.values ** (beta * sigma)
    with np.errstate(divide="ignore"):
        log_w_rhs = (p / q) * np.log(u.values) + (1 + p * irp) * np.log(v.values)
    fpos = f.values > 0
    for t in t_grid:
        lhs_meas = float(weight_lhs[Mg > t * Mphi_v].sum() * cm)
        if fpos.any():
            lr = (_lse(p * (np.log(f.values[fpos]) - math.log(t)) + log_w_rhs[fpos])
                  + math.log(cm)) / p
        else:
            lr = -math.inf
        rep.add(check(rep.suite, name, "mid", _log(lhs_meas) / q, lr, exact=False, t=t))
    rep.constants[name] = {**e, "Ainf_v_beta_sigma": ainf, "log_C_xi_inverse": C_inv,
                           "log_C_pointwise": C_pw}
    return rep


def verify_fractional_diag(u: GridFunction, v: GridFunction, f: GridFunction, r: float,
                           delta: float, gamma: float, eps: float | None = None,
                           t_grid=T_GRID, name: str = "instance",
                           budget: float | None = None) -> VerificationReport:
    """uv^q({M_{gamma,Phi}(fv)/v > t}) against
    varphi_eps(int Phi_{gamma,eps}(|f|/t) Psi_eps(u^{1/q} v)), both variants of
    Phi_{gamma,eps}, with the lattice chain steps."""
    grid = u.grid
    n = grid.n
    q = fractional_exponents(n, r, gamma)["q"]
    nu = delta * q / r
    if eps is None:
        eps = admissible(u, v, q).ladder[0]
    Phi = make_canonical(r, delta)
    variants = {vn: phi_gamma_eps(r, delta, eps, gamma, n, vn) for vn in ("statement", "proof")}
    psi = psi_eps_fractional(r, delta, eps, q)
    vphi = varphi_eps(q, r, delta, eps)
    desc = {"instance": name, "n": n, "r": r, "delta": delta, "gamma": gamma, "eps": eps, "q": q}
    rep = VerificationReport("fractional_diag", desc, constant_steps=("diag",), budget=budget)
    cm = grid.cell_measure

    lz = np.log(Z_LATTICE)
    ls, lt = np.meshgrid(lz, lz, indexing="ij")
    pg = variants["statement"]
    gap = float(np.max(np.abs(variants["statement"].log_rule(lz) - variants["proof"].log_rule(lz))))
    rep.add(check(rep.suite, name, "variants_identical", _log(gap), math.log(1e-9), slack=0.0))
    rep.add(check(rep.suite, name, "submultiplicative",
                  float(np.max(pg.log_rule(ls + lt) - pg.log_rule(ls) - pg.log_rule(lt))), 0.0))
    rep.add(check(rep.suite, name, "psi_bound",
                  float(np.max(pg.log_rule((1 - q / r) * lz) + q * lz - psi.log_rule(lz))), 0.0))
    c = gamma * q / (n * r)
    b = nu * (1 + 1 / eps) if delta else 0.0
    C_fin = _lattice_constant(lz + pg.log_rule(c * lz), vphi.log_rule(lz))
    rep.add(check(rep.suite, name, "varphi_bound", C_fin, b * math.log(max(1.0, c))))
    # xi^{-1}(z) z^{gamma/n} <= C Phi^{-1}(z), z >= 1
    xi_f = xi(q, nu)
    z = Z_LATTICE[Z_LATTICE >= 1.0]
    C_inv = _lattice_constant(np.log(inverse(xi_f, z)) + gamma / n * np.log(z),
                              np.log(inverse(Phi, z)))
    rep.add(check(rep.suite, name, "xi_inverse", C_inv, 0.0, exact=False))

    Mg = m_gamma_phi(f * v, Phi, gamma).values
    wv = u.values ** (1.0 / q) * v.values
    log_wv = np.log(wv)
    log_psi_w = psi.log_rule(log_wv)
    uvq = u.values * v.values ** q
    fpos = f.values > 0
    for t in t_grid:
        lhs = float(uvq[Mg > t * v.values].sum() * cm)
        lf = np.log(f.values[fpos]) - math.log(t) if fpos.any() else np.zeros(0)
        for vn, P in variants.items():
            X = _lse(P.log_rule(lf) + log_psi_w[fpos]) + math.log(cm) if fpos.any() else -math.inf
            rhs = float(vphi.log_rule(np.array(X))) if X > -math.inf else -math.inf
            rep.add(check(rep.suite, name, "diag" if vn == "statement" else "diag_proof_variant",
                          _log(lhs), rhs, exact=False, t=t))
        if fpos.any():
            # split of Phi_{gamma,eps} at the cells: argument uses int (|f|/t)^r (wv)^r,
            # which the larger int Phi_{gamma,eps}(|f|/t) (wv)^r dominates
            Ir = _lse(r * lf + r * log_wv[fpos]) + math.log(cm)
            Ig = _lse(pg.log_rule(lf) + r * log_wv[fpos]) + math.log(cm)
            arg = lf + (1 - q / r) * log_wv[fpos] + c * Ir
            lhs_s = pg.log_rule(arg)
            rhs_s = pg.log_rule(np.array(c * Ig)) + pg.log_rule(lf + (1 - q / r) * log_wv[fpos])
            rep.add(check(rep.suite, name, "split", float(np.max(lhs_s - rhs_s)), 0.0, t=t))
    rep.constants[name] = {"q": q, "nu": nu, "eps": eps, "log_C_varphi": C_fin,
                           "log_C_xi_inverse": C_inv}
    return rep
