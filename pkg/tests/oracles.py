"""Independent reference computations used by the tests.

Nothing here calls into olab's numerical code: values are computed with
plain Python floats and direct formulas.
"""
from __future__ import annotations

import math


def canonical(z: float, r: float, delta: float) -> float:
    return z ** r * (1.0 + max(math.log(z), 0.0)) ** delta if z > 0 else 0.0


def bisect_inverse(fn, y: float, lo: float = 1e-100, hi: float = 1e100, iters: int = 4000) -> float:
    """Smallest t with fn(t) >= y, by bisection on log t."""
    a, b = math.log(lo), math.log(hi)
    for _ in range(iters):
        m = 0.5 * (a + b)
        if fn(math.exp(m)) >= y:
            b = m
        else:
            a = m
        if b - a < 1e-15:
            break
    return math.exp(b)


def luxemburg_power(values, r: float) -> float:
    """Norm for Phi(t) = t^r on a uniform-measure cube: the L^r mean."""
    return (sum(x ** r for x in values) / len(values)) ** (1.0 / r)


def luxemburg_indicator(lam: float, frac: float, r: float, delta: float) -> float:
    """Norm of lam * chi_E with |E| = frac |Q|: lam / Phi^{-1}(1/frac)."""
    return lam / bisect_inverse(lambda t: canonical(t, r, delta), 1.0 / frac)


def luxemburg_bisect(values, weights, phi) -> float:
    """Generic Luxemburg norm by bisection in lambda on mean Phi(g/lambda) <= 1."""
    total = sum(weights)
    if max(values) <= 0:
        return 0.0

    def mean(lam):
        return sum(w * phi(x / lam) for x, w in zip(values, weights)) / total

    a, b = math.log(max(values)) - 60, math.log(max(values)) + 60
    for _ in range(400):
        m = 0.5 * (a + b)
        if mean(math.exp(m)) > 1.0:
            a = m
        else:
            b = m
    return math.exp(b)


def power_cell_average(x0: float, x1: float, alpha: float, c: float, nodes: int = 60) -> float:
    """Cell average of |x - c|^-alpha by Gauss-Legendre on a cell away from c."""
    import numpy as np

    t, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x1 - x0) * t + 0.5 * (x1 + x0)
    return float(0.5 * (w * np.abs(x - c) ** (-alpha)).sum())
