import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from olab.cz import build
from olab.grid import DyadicGrid, GridFunction
from olab.verify import (InternalConsistencyError, admissible, exponent_identities,
                         linf_contraction, verify_claim1, verify_claim3, verify_corollaries,
                         verify_cz_sandwich, verify_fractional_diag, verify_fractional_mid,
                         verify_level_set_lemma, verify_reverse_holder, verify_theorem1)
from olab.verify import fractional as fractional_mod
from olab.verify.lemmas import level_set_constants
from olab.weights import make_weight
from olab.young import ParameterError, make_canonical

G = DyadicGrid(1, 6)
ONE = GridFunction.constant(G, 1.0)
U = make_weight("power", {"alpha": 0.5, "center": 0.3}, G)
V = make_weight("power", {"alpha": 0.5, "center": 0.7}, G)
STEP = make_weight("step", {"values": [1.0, 2.0]}, G)
F_LOW = GridFunction(G, np.r_[np.full(32, 0.6), np.zeros(32)])
F_IND = GridFunction(G, np.r_[np.full(16, 4.0), np.zeros(48)])
T_SMALL = (0.1, 1.0, 10.0)


@pytest.mark.parametrize("w", [ONE, STEP, V])
def test_reverse_holder(w):
    rep = verify_reverse_holder(w, draws=20, rng=np.random.default_rng(0))
    assert rep.passed and rep.records


def test_reverse_holder_constant_weight_tight():
    rep = verify_reverse_holder(ONE, draws=5, rng=np.random.default_rng(0))
    # both sides of the mean form equal 1 for the constant weight
    assert rep.empirical_constant <= 1.0 + 1e-9


def test_level_set_lemma():
    for a in (2.5, 4.0):
        d = build(F_LOW, make_canonical(1.0, 1.0), V, 1.0, a)
        rep = verify_level_set_lemma(U, V, 1.0, 2.0, a, d)
        assert rep.passed


def test_level_set_needs_classified():
    from olab.cz import decompose
    d = decompose(F_LOW, make_canonical(1.0, 1.0), 4.0)
    with pytest.raises(ParameterError):
        verify_level_set_lemma(U, V, 1.0, 2.0, 4.0, d)


def test_level_set_rejects_uncertified():
    bad = GridFunction(G, np.r_[np.full(1, 1e-12), np.ones(63)])
    with pytest.raises(ParameterError):
        level_set_constants(ONE, bad, 1.0, 1.25, 4.0, aq_budget=2.0)


@pytest.mark.parametrize("delta", [0.0, 1.0])
def test_claims(delta):
    phi = make_canonical(1.0, delta)
    adm = admissible(U, V, 1.0)
    eps = adm.ladder[0]
    for a in (2.5, 4.0):
        d = build(F_LOW, phi, V, 1.0, a)
        main1, _ = verify_claim1(F_LOW, V, phi, 1.0, delta, eps, d, a)
        main3, _ = verify_claim3(F_LOW, V, phi, 1.0, delta, eps, d, a)
        assert main1.passed and main3.passed


def test_theorem1_and_zero_function():
    phi = make_canonical(1.0, 1.0)
    rep = verify_theorem1(U, V, F_IND, phi, 1.0, 1.0, t_grid=T_SMALL, trace=True)
    assert rep.passed and math.isfinite(rep.log_empirical_constant)
    zero = verify_theorem1(U, V, GridFunction.constant(G, 0.0), phi, 1.0, 1.0, t_grid=T_SMALL,
                           trace=False)
    assert zero.passed


def test_theorem1_classical_bounded():
    rep = verify_theorem1(U, ONE, F_IND, make_canonical(1.0, 0.0), 1.0, 0.0, t_grid=T_SMALL)
    assert rep.passed and rep.empirical_constant < 100


def test_corollaries():
    phi = make_canonical(1.0, 1.0)
    rep = verify_corollaries(U, V, F_IND, phi, phi, 1.0, 1.0, t_grid=T_SMALL)
    assert rep.passed
    steps = rep.step_summary()
    assert steps["mv_ge_v"]["violations"] == 0
    assert steps["c_positive"]["violations"] == 0


def test_linf_contraction():
    rep = linf_contraction(V, make_canonical(1.0, 1.0), np.random.default_rng(1), draws=25)
    assert rep.passed and len(rep.records) == 25


def test_cz_sandwich_report():
    g = GridFunction(G, np.r_[np.full(2, 300.0), np.random.default_rng(3).random(62)])
    d = build(g, make_canonical(1.0, 1.0), V, 1.0, 4.0)
    rep = verify_cz_sandwich(d)
    assert rep.passed
    assert {"lower", "upper", "covering"} <= set(rep.step_summary())


def test_exponent_identities():
    rep = exponent_identities(np.random.default_rng(7), draws=50)
    assert rep.passed and len(rep.records) == 200


@pytest.mark.parametrize("delta", [0.0, 1.0])
def test_fractional_mid(delta):
    rep = verify_fractional_mid(U, ONE, F_IND, 1.0, delta, 0.5, 1.5, t_grid=T_SMALL)
    assert rep.passed


def test_fractional_mid_rejects_non_ainf():
    v = make_weight("power", {"alpha": 0.5, "center": 0.7}, G)
    with pytest.raises(ParameterError):
        verify_fractional_mid(U, v, F_IND, 1.0, 1.0, 0.5, 1.5, t_grid=T_SMALL)


def test_fractional_mid_beta_guard(monkeypatch):
    def broken(*args, **kw):
        return {"q": 2.0, "sigma": 2.0, "beta": 1.0, "inv_r_prime": 0.0}
    monkeypatch.setattr(fractional_mod, "fractional_exponents", broken)
    with pytest.raises(InternalConsistencyError):
        verify_fractional_mid(U, ONE, F_IND, 1.0, 1.0, 0.5, 1.5, t_grid=T_SMALL)


@pytest.mark.parametrize("delta", [0.0, 1.0])
def test_fractional_diag(delta):
    rep = verify_fractional_diag(U, ONE, F_IND, 1.0, delta, 0.5, t_grid=T_SMALL)
    assert rep.passed
    steps = rep.step_summary()
    assert steps["variants_identical"]["violations"] == 0
    assert steps["split"]["violations"] == 0


def test_fractional_diag_zero_f():
    rep = verify_fractional_diag(U, ONE, GridFunction.constant(G, 0.0), 1.0, 1.0, 0.5,
                                 t_grid=T_SMALL)
    assert rep.passed


@settings(max_examples=10)
@given(st.lists(st.floats(0.0, 10.0), min_size=64, max_size=64))
def test_theorem1_random_f(vals):
    f = GridFunction(G, vals)
    rep = verify_theorem1(U, STEP, f, make_canonical(1.0, 1.0), 1.0, 1.0, t_grid=T_SMALL,
                          trace=False)
    assert not rep.violations
    assert rep.log_empirical_constant < math.inf
