"""Young functions of power-log type and the derived functions used by the
verifiers.

Every function is represented by its *log rule*: a vectorised map
``log z -> log Phi(z)`` (``-inf`` encodes ``Phi(z) = 0``).  Working in log
space keeps exponents such as ``delta/eps ~ 1e4`` usable; values above
``SATURATION`` are clamped and reported through :meth:`YoungFunction.evaluate`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SATURATION = 1e300
LOG_SATURATION = math.log(SATURATION)

LogRule = Callable[[np.ndarray], np.ndarray]


class ParameterError(ValueError):
    pass


class EvaluationError(ArithmeticError):
    pass


def _log1p_plus(lz):
    """log(1 + log^+ z) as a function of log z."""
    return np.log1p(np.maximum(lz, 0.0))


def power_log_rule(a: float, b: float) -> LogRule:
    """Rule for z**a * (1 + log^+ z)**b."""
    if b == 0:
        return lambda lz: a * lz
    return lambda lz: a * lz + b * _log1p_plus(lz)


@dataclass(frozen=True, eq=False)
class YoungFunction:
    name: str
    log_rule: LogRule = field(repr=False)
    r: float | None = None
    delta: float | None = None
    C0: float | None = None
    t_star: float | None = None
    tag: str = "custom"
    params: dict = field(default_factory=dict)

    def log_eval(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lz = np.log(z)
            out = np.asarray(self.log_rule(lz), dtype=float)
        out = np.where(z == 0, -np.inf, out)
        if np.isnan(out).any():
            raise EvaluationError(f"{self.name}: non-finite evaluation")
        return out

    def evaluate(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Values and a mask of entries clamped at ``SATURATION``."""
        lv = self.log_eval(z)
        sat = lv > LOG_SATURATION
        return np.exp(np.minimum(lv, LOG_SATURATION)), sat

    def __call__(self, z):
        vals, _ = self.evaluate(z)
        return vals if vals.ndim else float(vals)

    def compose(self, inner: "YoungFunction", name: str | None = None) -> "YoungFunction":
        outer_rule, inner_rule = self.log_rule, inner.log_rule
        return YoungFunction(name or f"{self.name}o{inner.name}",
                             lambda lz: outer_rule(inner_rule(lz)), tag="composition",
                             params={"outer": self.name, "inner": inner.name})

    def describe(self) -> dict:
        return {"name": self.name, "tag": self.tag, **self.params}


def make_canonical(r: float, delta: float) -> YoungFunction:
    """Phi(z) = z**r (1 + log^+ z)**delta with growth witnesses C0 = 2**delta, t* = e."""
    if r < 1:
        raise ParameterError(f"r must be >= 1, got {r}")
    if delta < 0:
        raise ParameterError(f"delta must be >= 0, got {delta}")
    return YoungFunction(f"canonical(r={r:g},delta={delta:g})", power_log_rule(r, delta),
                         r=r, delta=delta, C0=2.0 ** delta, t_star=math.e,
                         tag="canonical", params={"r": r, "delta": delta})


def power_log(a: float, b: float, name: str | None = None, tag: str = "power_log",
              **params) -> YoungFunction:
    return YoungFunction(name or f"z^{a:g}(1+log+z)^{b:g}", power_log_rule(a, b),
                         tag=tag, params={"a": a, "b": b, **params})


# ---------------------------------------------------------------- inverses

def log_inverse(phi: YoungFunction, ly: np.ndarray, max_doublings: int = 64) -> np.ndarray:
    """Solve ``log Phi(t) = ly`` for ``log t`` by bracketing and bisection."""
    ly = np.asarray(ly, dtype=float)
    rule = phi.log_rule
    lo = np.full(ly.shape, -1.0)
    hi = np.full(ly.shape, 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(max_doublings):
            need = rule(lo) >= ly
            if not need.any():
                break
            lo = np.where(need, 2.0 * lo, lo)
        else:
            raise EvaluationError(f"{phi.name}: no lower bracket")
        for _ in range(max_doublings):
            need = rule(hi) < ly
            if not need.any():
                break
            hi = np.where(need, 2.0 * hi, hi)
        else:
            raise EvaluationError(f"{phi.name}: no upper bracket")
        probe = lo[..., None] + (hi - lo)[..., None] * np.linspace(0.0, 1.0, 17)
        vals = rule(probe)
        if np.any(np.diff(vals, axis=-1) < -1e-12 * np.maximum(1.0, np.abs(vals[..., 1:]))):
            raise EvaluationError(f"{phi.name}: non-monotone samples while inverting")
        for _ in range(300):
            mid = 0.5 * (lo + hi)
            up = rule(mid) >= ly
            new_lo = np.where(up, lo, mid)
            new_hi = np.where(up, mid, hi)
            if np.array_equal(new_lo, lo) and np.array_equal(new_hi, hi):
                break
            lo, hi = new_lo, new_hi
    return hi


def inverse(phi: YoungFunction, y):
    """Generalised inverse t with Phi(t) = y (t = 0 for y = 0)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise ParameterError("inverse needs finite y >= 0")
    out = np.zeros(y.shape)
    pos = y > 0
    if pos.any():
        out[pos] = np.exp(log_inverse(phi, np.log(y[pos])))
    return out if out.ndim else float(out)


# ---------------------------------------------------------- derived functions

def fractional_exponents(n: int, r: float, gamma: float, p: float | None = None) -> dict:
    """Exponents for the fractional estimates.

    With ``p`` (the off-diagonal case ``r < p < n/gamma``): q, sigma, nu, beta
    and ``1/r'``.  Without ``p`` (diagonal case ``p = r``): q only.
    """
    if not 0 < gamma < n / r:
        raise ParameterError(f"need 0 < gamma < n/r, got gamma={gamma}")
    inv_rp = 1.0 - 1.0 / r
    if p is None:
        return {"q": 1.0 / (1.0 / r - gamma / n), "inv_r_prime": inv_rp}
    if not r < p < n / gamma:
        raise ParameterError(f"need r < p < n/gamma, got p={p}")
    q = 1.0 / (1.0 / p - gamma / n)
    sigma = n * r / (n - r * gamma)
    beta = q / sigma * (1.0 / p + inv_rp)
    return {"q": q, "sigma": sigma, "beta": beta, "inv_r_prime": inv_rp}


def _eta_exponent(delta: float, eps: float) -> float:
    if delta == 0:
        return 0.0
    if eps <= 0:
        raise ParameterError(f"eps must be > 0 when delta > 0, got {eps}")
    return delta / eps


def eta_eps(delta: float, eps: float) -> YoungFunction:
    b = _eta_exponent(delta, eps)
    return power_log(1.0, b, name=f"eta(b={b:g})", tag="eta_eps", delta=delta, eps=eps)


def psi_eps(r: float, delta: float, eps: float) -> YoungFunction:
    phi = make_canonical(r, delta)
    psi = eta_eps(delta, eps).compose(phi, name=f"psi(r={r:g},delta={delta:g},eps={eps:g})")
    return YoungFunction(psi.name, psi.log_rule, tag="psi_eps",
                         params={"r": r, "delta": delta, "eps": eps})


def eta_tilde_eps(delta: float, eps: float) -> YoungFunction:
    """(exp(z**(eps/delta)) - e) on (1, inf), zero on [0, 1]."""
    if delta <= 0:
        raise ParameterError("eta_tilde needs delta > 0")
    if eps <= 0:
        raise ParameterError(f"eps must be > 0, got {eps}")
    c = eps / delta

    def rule(lz):
        lz = np.asarray(lz, dtype=float)
        x = np.exp(c * np.where(lz > 0, lz, 0.0))
        with np.errstate(divide="ignore"):
            val = x + np.log(-np.expm1(1.0 - x))
        return np.where(lz > 0, val, -np.inf)

    return YoungFunction(f"eta_tilde(c={c:g})", rule, tag="eta_tilde_eps",
                         params={"delta": delta, "eps": eps})


def xi(q: float, nu: float, sigma: float | None = None, beta: float | None = None) -> YoungFunction:
    """z**q (1+log^+ z)**nu, or the two-piece variant when sigma and beta are given:
    z**(q/beta) on [0, 1] and z**sigma (1+log z)**nu above 1."""
    if sigma is None:
        return power_log(q, nu, name=f"xi(q={q:g},nu={nu:g})", tag="xi", q=q, nu=nu)
    if beta is None or beta <= 0:
        raise ParameterError("two-piece xi needs beta > 0")
    low = q / beta

    def rule(lz):
        lz = np.asarray(lz, dtype=float)
        return np.where(lz <= 0, low * lz, sigma * lz + nu * _log1p_plus(lz))

    return YoungFunction(f"xi(q/beta={low:g},sigma={sigma:g},nu={nu:g})", rule, tag="xi",
                         params={"q": q, "nu": nu, "sigma": sigma, "beta": beta})


def phi_small(n: int, r: float, delta: float, gamma: float, p: float) -> YoungFunction:
    e = fractional_exponents(n, r, gamma, p)
    a = e["q"] / p + e["q"] * e["inv_r_prime"]
    b = n * delta / (n - r * gamma)
    return power_log(a, b, name=f"phi(a={a:g},b={b:g})", tag="phi_small",
                     n=n, r=r, delta=delta, gamma=gamma, p=p)


def varphi_eps(q: float, r: float, delta: float, eps: float) -> YoungFunction:
    b = delta * (1.0 + 1.0 / eps) * q / r if delta else 0.0
    return power_log(q / r, b, name=f"varphi(a={q / r:g},b={b:g})", tag="varphi_eps",
                     q=q, r=r, delta=delta, eps=eps)


def phi_gamma_eps(r: float, delta: float, eps: float, gamma: float, n: int,
                  variant: str = "statement") -> YoungFunction:
    """Both published forms: ``statement`` multiplies Phi by
    (1+log^+)^(delta(1+1/eps) q gamma/n + delta/eps); ``proof`` is
    z**r (1+log^+)^(nu(1+1/eps)) with nu = delta q / r."""
    q = fractional_exponents(n, r, gamma)["q"]
    if delta and eps <= 0:
        raise ParameterError("eps must be > 0")
    if variant == "statement":
        b = delta + (delta * (1 + 1 / eps) * q * gamma / n + delta / eps if delta else 0.0)
    elif variant == "proof":
        nu = delta * q / r
        b = nu * (1 + 1 / eps) if delta else 0.0
    else:
        raise ParameterError(f"unknown variant {variant!r}")
    return power_log(r, b, name=f"phi_gamma_eps[{variant}](b={b:g})", tag="phi_gamma_eps",
                     r=r, delta=delta, eps=eps, gamma=gamma, n=n, variant=variant)


def psi_eps_fractional(r: float, delta: float, eps: float, q: float) -> YoungFunction:
    """z**r (1 + log^+(z**(1-q/r)))**(q delta (1+1/eps)/r)."""
    b = q * delta * (1 + 1 / eps) / r if delta else 0.0
    c = 1.0 - q / r

    def rule(lz):
        lz = np.asarray(lz, dtype=float)
        if b == 0:
            return r * lz
        return r * lz + b * np.log1p(np.maximum(c * lz, 0.0))

    return YoungFunction(f"psi_frac(r={r:g},b={b:g})", rule, tag="psi_eps_fractional",
                         params={"r": r, "delta": delta, "eps": eps, "q": q})


_DERIVED = {
    "eta_eps": eta_eps,
    "psi_eps": psi_eps,
    "eta_tilde_eps": eta_tilde_eps,
    "xi": xi,
    "phi_small": phi_small,
    "varphi_eps": varphi_eps,
    "phi_gamma_eps": phi_gamma_eps,
    "psi_eps_fractional": psi_eps_fractional,
}


def derive(tag: str, **params) -> YoungFunction:
    try:
        ctor = _DERIVED[tag]
    except KeyError:
        raise ParameterError(f"unknown derived tag {tag!r}") from None
    return ctor(**params)


def from_spec(spec: dict) -> YoungFunction:
    """Build from a config entry such as ``{"kind": "canonical", "r": 1, "delta": 1}``."""
    spec = dict(spec)
    kind = spec.pop("kind", "canonical")
    if kind == "canonical":
        return make_canonical(float(spec.get("r", 1.0)), float(spec.get("delta", 0.0)))
    if kind == "power_log":
        return power_log(float(spec["a"]), float(spec.get("b", 0.0)))
    if kind == "scaled":
        # Psi(z) = Phi(c z): equivalent to Phi up to constants
        base = from_spec(spec["base"])
        c = float(spec["c"])
        rule = base.log_rule
        return YoungFunction(f"{base.name}(x{c:g})", lambda lz: rule(lz + math.log(c)),
                             tag="scaled", params={"c": c, "base": base.name})
    return derive(kind, **spec)


# ------------------------------------------------------------ certification

@dataclass
class FamilyCertificate:
    r: float
    delta: float
    submultiplicative: bool
    lower_type_r: bool
    growth: bool
    C0: float
    t_star: float
    witnesses: dict

    @property
    def member(self) -> bool:
        return self.submultiplicative and self.lower_type_r and self.growth


def certify_family(phi: YoungFunction, r: float, delta: float, sample_budget: int = 81,
                   lo: float = 1e-6, hi: float = 1e6, slack: float = 1e-12) -> FamilyCertificate:
    """Lattice check of submultiplicativity, lower type ``r`` and the growth bound
    Phi(t)/t**r <= C0 (log t)**delta for t >= t*."""
    lz = np.log(np.geomspace(lo, hi, sample_budget))
    ls, lt = np.meshgrid(lz, lz, indexing="ij")
    lf = phi.log_rule
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = lf(ls + lt)
        rhs_sub = lf(ls) + lf(lt)
        tol = slack * np.maximum(1.0, np.abs(rhs_sub))
        gap_sub = np.where(np.isfinite(lhs), lhs - rhs_sub - tol, -np.inf)
        rhs_low = r * ls + lf(lt)
        gap_low = np.where((ls <= 0) & np.isfinite(lhs),
                           lhs - rhs_low - slack * np.maximum(1.0, np.abs(rhs_low)), -np.inf)
    witnesses = {}
    sub_ok = not (gap_sub > 0).any()
    if not sub_ok:
        i = np.unravel_index(np.argmax(gap_sub), gap_sub.shape)
        witnesses["submultiplicative"] = (float(np.exp(ls[i])), float(np.exp(lt[i])))
    low_ok = not (gap_low > 0).any()
    if not low_ok:
        i = np.unravel_index(np.argmax(gap_low), gap_low.shape)
        witnesses["lower_type"] = (float(np.exp(ls[i])), float(np.exp(lt[i])))

    if phi.C0 is not None and phi.t_star is not None:
        C0, t_star = phi.C0, phi.t_star
    else:
        t_star = math.e
        big = lz[lz >= 1.0]
        with np.errstate(divide="ignore"):
            logratio = lf(big) - r * big - delta * np.log(big)
        C0 = float(np.exp(logratio.max())) if big.size else 1.0
    big = lz[lz >= math.log(t_star)]
    with np.errstate(divide="ignore"):
        gap = lf(big) - r * big - (math.log(C0) + delta * np.log(big))
    growth_ok = not (gap > slack * np.maximum(1.0, np.abs(lf(big)))).any()
    if not growth_ok:
        witnesses["growth"] = float(np.exp(big[np.argmax(gap)]))
    return FamilyCertificate(r, delta, sub_ok, low_ok, growth_ok, float(C0), float(t_star),
                             witnesses)
