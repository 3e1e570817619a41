import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from olab.young import (ParameterError, certify_family, eta_eps, eta_tilde_eps,
                        fractional_exponents, from_spec, inverse, log_inverse, make_canonical,
                        phi_gamma_eps, psi_eps, psi_eps_fractional, xi)

from .oracles import canonical

rs = st.floats(1.0, 4.0)
deltas = st.floats(0.0, 3.0)
zs = st.floats(1e-8, 1e8)


@given(rs, deltas, zs)
def test_canonical_matches_formula(r, delta, z):
    assert make_canonical(r, delta)(z) == pytest.approx(canonical(z, r, delta), rel=1e-12)


def test_canonical_rejects_bad_params():
    with pytest.raises(ParameterError):
        make_canonical(0.5, 0.0)
    with pytest.raises(ParameterError):
        make_canonical(1.0, -1.0)


def test_canonical_at_zero_and_e():
    phi = make_canonical(2.0, 1.5)
    assert phi(0.0) == 0.0
    assert phi(math.e) == pytest.approx(math.e ** 2 * 2 ** 1.5)


@given(rs, deltas, st.floats(-30, 30))
def test_inverse_roundtrip(r, delta, ly):
    phi = make_canonical(r, delta)
    lt = log_inverse(phi, np.array([ly]))
    assert float(phi.log_rule(lt)[0]) == pytest.approx(ly, abs=1e-9)


@given(rs, deltas)
def test_family_membership(r, delta):
    cert = certify_family(make_canonical(r, delta), r, delta)
    assert cert.member
    assert cert.C0 == pytest.approx(2.0 ** delta)


def test_non_member_detected():
    # t^(1/2) is not of lower type 1
    cert = certify_family(from_spec({"kind": "power_log", "a": 0.5}), 1.0, 0.0)
    assert not cert.lower_type_r and not cert.member
    assert "lower_type" in cert.witnesses


@given(st.floats(0.05, 3.0), st.floats(0.01, 1.0), zs)
def test_psi_dominates_phi(delta, eps, z):
    # eta(z) >= z, so Psi = eta o Phi >= Phi
    assert psi_eps(1.0, delta, eps)(z) >= make_canonical(1.0, delta)(z) * (1 - 1e-12)


def test_eta_requires_positive_eps():
    with pytest.raises(ParameterError):
        eta_eps(1.0, 0.0)
    assert eta_eps(0.0, 0.0)(3.0) == pytest.approx(3.0)


@given(st.floats(0.1, 3.0), st.floats(0.05, 1.0), st.floats(1e-6, 1.0))
def test_eta_tilde_vanishes_on_unit_interval(delta, eps, z):
    assert eta_tilde_eps(delta, eps)(z) == 0.0


def test_eta_tilde_formula():
    f = eta_tilde_eps(2.0, 0.5)
    z = 16.0
    assert f(z) == pytest.approx(math.exp(z ** 0.25) - math.e, rel=1e-12)


def test_fractional_example_values():
    e = fractional_exponents(1, 1.0, 0.5, 1.5)
    assert e["q"] == pytest.approx(6.0)
    assert e["sigma"] == pytest.approx(2.0)
    assert e["beta"] == pytest.approx(2.0)
    # diagonal: q = 2 and nu = delta q / r = 2 for r = delta = 1
    q = fractional_exponents(1, 1.0, 0.5)["q"]
    assert q == pytest.approx(2.0)
    assert 1.0 * q / 1.0 == pytest.approx(2.0)


def test_fractional_range_checked():
    with pytest.raises(ParameterError):
        fractional_exponents(1, 1.0, 1.0)
    with pytest.raises(ParameterError):
        fractional_exponents(1, 1.0, 0.5, 2.5)


@given(st.integers(1, 2), st.floats(1.0, 3.0), st.floats(0.05, 0.95), st.floats(0.0, 3.0),
       st.floats(0.01, 1.0))
def test_phi_gamma_eps_variants_identical(n, r, gfrac, delta, eps):
    gamma = gfrac * n / r
    lz = np.linspace(-10, 10, 41)
    a = phi_gamma_eps(r, delta, eps, gamma, n, "statement").log_rule(lz)
    b = phi_gamma_eps(r, delta, eps, gamma, n, "proof").log_rule(lz)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_phi_gamma_eps_unknown_variant():
    with pytest.raises(ParameterError):
        phi_gamma_eps(1.0, 1.0, 0.5, 0.5, 1, "other")


@given(st.floats(0.0, 2.0), st.floats(0.05, 1.0), st.floats(-12, 12))
def test_phi_gamma_eps_psi_bound(delta, eps, lz):
    # Phi_{gamma,eps}(z^(1-q/r)) z^q <= Psi_eps(z) for n = 1, r = 1, gamma = 1/2
    r, gamma, n = 1.0, 0.5, 1
    q = fractional_exponents(n, r, gamma)["q"]
    pg = phi_gamma_eps(r, delta, eps, gamma, n)
    psi = psi_eps_fractional(r, delta, eps, q)
    lhs = pg.log_rule(np.array((1 - q / r) * lz)) + q * lz
    assert lhs <= psi.log_rule(np.array(lz)) + 1e-9


def test_xi_two_piece():
    f = xi(6.0, 2.0, sigma=2.0, beta=2.0)
    assert f(0.5) == pytest.approx(0.5 ** 3)
    assert f(math.e) == pytest.approx(math.e ** 2 * 4)
    with pytest.raises(ParameterError):
        xi(6.0, 2.0, sigma=2.0)


def test_from_spec_kinds():
    base = {"kind": "canonical", "r": 1.0, "delta": 1.0}
    phi = from_spec(base)
    scaled = from_spec({"kind": "scaled", "base": base, "c": 2.0})
    assert scaled(3.0) == pytest.approx(phi(6.0))
    assert from_spec({"kind": "power_log", "a": 2.0, "b": 1.0})(math.e) == pytest.approx(
        2 * math.e ** 2)
    with pytest.raises(ParameterError):
        from_spec({"kind": "nonsense"})


def test_inverse_vectorised():
    phi = make_canonical(1.0, 1.0)
    y = np.array([0.5, 1.0, 10.0])
    assert np.allclose(phi(inverse(phi, y)), y, rtol=1e-10)
