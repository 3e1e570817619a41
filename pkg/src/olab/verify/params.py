"""Admissible parameters shared by the theorem-level verifiers."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..grid import GridFunction
from ..weights import a1_constant, a_infty_constant, certify_q, eps1_candidate, tau_n

T_GRID = tuple(float(t) for t in np.geomspace(1e-3, 1e3, 25))


@dataclass(frozen=True)
class Admissible:
    q: float
    Aq_vr: float
    A1_u: float
    Ainf_u: float
    Ainf_vr: float
    eps1: float
    eps2: float
    tau_n: float

    @property
    def eps0(self) -> float:
        return min(self.eps1, self.eps2)

    @property
    def ladder(self) -> tuple[float, ...]:
        return (self.eps0 / 2, self.eps0 / 4, self.eps0 / 8)

    @property
    def theta(self) -> float:
        """A_inf exponent of v^r from the reverse Hölder lemma (with C = 2)."""
        return 1.0 / (1.0 + self.tau_n * self.Ainf_vr)

    @property
    def beta(self) -> float:
        return self.theta / 2

    def as_dict(self) -> dict:
        return {**asdict(self), "eps0": self.eps0, "ladder": list(self.ladder),
                "theta": self.theta, "beta": self.beta}


def admissible(u: GridFunction, v: GridFunction, r: float, q_budget: float = 100.0) -> Admissible:
    """q certifying v^r, eps2 = r/((q-1)(1+tau_n [u]_Ainf)) and the eps1 candidate."""
    vr = v ** r
    q, aq = certify_q(vr, budget=q_budget)
    ainf_u, _ = a_infty_constant(u)
    tn = tau_n(u.grid.n)
    eps2 = r / ((q - 1.0) * (1.0 + tn * ainf_u))
    return Admissible(q, aq, a1_constant(u)[0], ainf_u, a_infty_constant(vr)[0],
                      eps1_candidate(v, r), eps2, tn)
