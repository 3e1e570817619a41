#!/usr/bin/env python3
"""Wall time of each verifier on one instance at n = 1, L = 10."""
from __future__ import annotations

import time

import numpy as np

from olab.cz import build
from olab.grid import DyadicGrid, GridFunction
from olab.verify import (exponent_identities, verify_claim1, verify_claim3, verify_corollaries,
                         verify_fractional_diag, verify_fractional_mid, verify_reverse_holder,
                         verify_theorem1)
from olab.weights import weight_from_spec
from olab.young import make_canonical


def timed(label, fn):
    t0 = time.perf_counter()
    out = fn()
    print(f"{label:<22} {time.perf_counter() - t0:8.3f} s")
    return out


def main() -> None:
    grid = DyadicGrid(1, 10)
    rng = np.random.Generator(np.random.PCG64(0))
    u = weight_from_spec({"kind": "power", "alpha": 0.5, "center": 0.3}, grid)
    v = weight_from_spec({"kind": "power", "alpha": 0.9, "center": 0.45}, grid)
    v_frac = weight_from_spec({"kind": "power", "alpha": 0.1, "center": 0.7}, grid)
    f = GridFunction(grid, 0.5 * np.ones(grid.num_cells))
    phi = make_canonical(1.0, 1.0)
    timed("reverse_holder", lambda: verify_reverse_holder(v, rng=rng))
    d = timed("cz build", lambda: build(f * v, phi, v, 1.0, 2.5))
    timed("claim1", lambda: verify_claim1(f, v, phi, 1.0, 1.0, 1e-3, d))
    timed("claim3", lambda: verify_claim3(f, v, phi, 1.0, 1.0, 1e-3, d))
    timed("theorem1", lambda: verify_theorem1(u, v, f, phi, 1.0, 1.0))
    timed("corollaries", lambda: verify_corollaries(u, v, f, phi, phi, 1.0, 1.0))
    timed("exponents", lambda: exponent_identities(rng))
    timed("fractional_mid", lambda: verify_fractional_mid(u, v_frac, f, 1.0, 1.0, 0.5, 1.5))
    timed("fractional_diag", lambda: verify_fractional_diag(u, v_frac, f, 1.0, 1.0, 0.5))


if __name__ == "__main__":
    main()
