"""Both Calderón-Zygmund sandwiches as per-cube records."""
from __future__ import annotations

import math

import numpy as np

from ..cz import CZDecomposition
from .report import VerificationReport, check


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def verify_cz_sandwich(d: CZDecomposition, name: str = "instance") -> VerificationReport:
    """a^k < ||g||_Q <= 2^n a^k for every principal cube, the covering of
    Omega_k, and a^{kr} < avg_S v^r <= 2^n a^{kr} for every secondary cube."""
    rep = VerificationReport("cz_sandwich", {"instance": name, "a": d.a, "phi": d.phi.name})
    cap = math.log(2 ** d.grid.n)
    for k in d.ks:
        lv = d.levels[k]
        if lv.skipped:
            rep.flags.append(f"{name}: level k={k} skipped (root cube above threshold)")
            continue
        lt = _log(lv.threshold)
        for i, (Q, nrm) in enumerate(zip(lv.cubes, lv.norms)):
            where = {"k": k, "l": lv.ell[i] if lv.ell else None, "cube": str(Q)}
            rec = check(rep.suite, name, "lower", lt, _log(nrm), slack=0.0, **where)
            # the lower side is strict
            rec.passed = rec.passed and nrm > lv.threshold
            rep.add(rec)
            rep.add(check(rep.suite, name, "upper", _log(nrm), cap + lt, **where))
        same = np.array_equal(d.covered(k), d.omega(k))
        rep.add(check(rep.suite, name, "covering", 0.0 if same else math.inf, 0.0, k=k))
        if d.r is None:
            continue
        thr = d.a ** (k * d.r)
        for i, subs in lv.secondary.items():
            for S, m in zip(subs, lv.secondary_avg[i]):
                where = {"k": k, "l": -1, "cube": str(S)}
                rec = check(rep.suite, name, "secondary_lower", _log(thr), _log(m), slack=0.0,
                            **where)
                rec.passed = rec.passed and m > thr
                rep.add(rec)
                rep.add(check(rep.suite, name, "secondary_upper", _log(m), cap + _log(thr),
                              **where))
    return rep
