import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from olab.grid import DyadicCube, DyadicGrid, GridFunction
from olab.orlicz import (LuxemburgQuery, check_generalized_holder, inf_form_norm,
                         level_norms, log_holder_kappa, luxemburg_norm, orlicz_mean)
from olab.young import eta_eps, eta_tilde_eps, make_canonical

from .oracles import canonical, luxemburg_bisect, luxemburg_indicator, luxemburg_power

GRID = DyadicGrid(1, 4)
vals16 = st.lists(st.floats(0.0, 1e3), min_size=16, max_size=16).filter(lambda v: max(v) > 1e-6)


@given(vals16, st.floats(1.0, 4.0))
def test_power_closed_form(vals, r):
    g = GridFunction(GRID, vals)
    got = luxemburg_norm(LuxemburgQuery(g, DyadicCube.root(1), make_canonical(r, 0.0)))
    assert got == pytest.approx(luxemburg_power(vals, r), rel=1e-10)


@given(st.floats(1e-3, 1e3), st.integers(1, 16), st.floats(1.0, 3.0), st.floats(0.0, 3.0))
def test_indicator_formula(lam, m, r, delta):
    g = GridFunction(GRID, [lam] * m + [0.0] * (16 - m))
    got = luxemburg_norm(LuxemburgQuery(g, DyadicCube.root(1), make_canonical(r, delta)))
    assert got == pytest.approx(luxemburg_indicator(lam, m / 16, r, delta), rel=1e-8)


@given(vals16, st.floats(1.0, 3.0), st.floats(0.0, 2.0))
def test_matches_bisection_oracle(vals, r, delta):
    g = GridFunction(GRID, vals)
    got = luxemburg_norm(LuxemburgQuery(g, DyadicCube.root(1), make_canonical(r, delta)))
    ref = luxemburg_bisect(vals, [1.0] * 16, lambda t: canonical(t, r, delta))
    assert got == pytest.approx(ref, rel=1e-9)


@given(vals16, st.lists(st.floats(0.01, 100), min_size=16, max_size=16), st.floats(0.0, 2.0))
def test_weighted_matches_oracle(vals, w, delta):
    g, wf = GridFunction(GRID, vals), GridFunction(GRID, w)
    got = luxemburg_norm(LuxemburgQuery(g, DyadicCube.root(1), make_canonical(1.0, delta), wf))
    ref = luxemburg_bisect(vals, w, lambda t: canonical(t, 1.0, delta))
    assert got == pytest.approx(ref, rel=1e-9)


@given(vals16, st.floats(1e-3, 1e3), st.floats(0.0, 2.0))
def test_homogeneity(vals, lam, delta):
    phi = make_canonical(1.0, delta)
    Q = DyadicCube.root(1)
    a = luxemburg_norm(LuxemburgQuery(GridFunction(GRID, vals), Q, phi))
    b = luxemburg_norm(LuxemburgQuery(GridFunction(GRID, np.array(vals) * lam), Q, phi))
    assert b == pytest.approx(lam * a, rel=1e-10)


@given(vals16, st.floats(0.0, 2.0))
def test_norm_is_unit_mean(vals, delta):
    phi = make_canonical(1.0, delta)
    q = LuxemburgQuery(GridFunction(GRID, vals), DyadicCube.root(1), phi)
    assert orlicz_mean(q, luxemburg_norm(q)) == pytest.approx(1.0, rel=1e-8)


@given(vals16, st.floats(0.0, 2.0))
def test_inf_form_equivalence(vals, delta):
    q = LuxemburgQuery(GridFunction(GRID, vals), DyadicCube.root(1), make_canonical(1.0, delta))
    nrm = luxemburg_norm(q)
    val, _ = inf_form_norm(q)
    assert nrm * (1 - 1e-8) <= val <= 2 * nrm * (1 + 1e-8)


def test_level_norms_match_scalar(rng):
    g = GridFunction(GRID, rng.random(16) * 5)
    phi = make_canonical(1.0, 1.0)
    for j in range(GRID.L + 1):
        rows = level_norms(g, phi, j)
        for Q in GRID.cubes_at(j):
            assert rows[Q.index] == pytest.approx(luxemburg_norm(LuxemburgQuery(g, Q, phi)),
                                                  rel=1e-12)


def test_constant_function_norm():
    phi = make_canonical(1.0, 1.0)
    g = GridFunction.constant(GRID, 3.0)
    # Phi(3/lam) = 1 at lam = 3
    assert luxemburg_norm(LuxemburgQuery(g, DyadicCube.root(1), phi)) == pytest.approx(3.0)


@settings(max_examples=6)
@given(st.floats(0.2, 2.0), st.floats(0.1, 1.0))
def test_holder_kappa_finite(delta, eps):
    k = log_holder_kappa(eta_eps(delta, eps), eta_tilde_eps(delta, eps))
    assert math.isfinite(k) and k >= 0


KAPPA = log_holder_kappa(eta_eps(1.0, 0.5), eta_tilde_eps(1.0, 0.5))


@given(vals16, st.lists(st.floats(0.0, 50), min_size=16, max_size=16))
def test_certified_holder_holds(f, w):
    rep = check_generalized_holder(GridFunction(GRID, f), GridFunction(GRID, w),
                                   DyadicCube.root(1), eta_eps(1.0, 0.5), eta_tilde_eps(1.0, 0.5),
                                   GridFunction.constant(GRID, 1.0), log_kappa=KAPPA)
    assert rep.certified_passed


def test_holder_sup_limit_exact(rng):
    f = GridFunction(GRID, rng.random(16))
    w = GridFunction(GRID, rng.random(16))
    rep = check_generalized_holder(f, w, DyadicCube.root(1), eta_eps(0.0, 0.0), None,
                                   GridFunction.constant(GRID, 1.0))
    assert rep.passed and rep.certified_passed
