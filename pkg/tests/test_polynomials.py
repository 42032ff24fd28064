"""Polynomial layer: (it, itau) arithmetic, Hermite values, the sawtooth,
and the moment/cumulant conversion helpers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urnedge.polynomials import (
    ItPolynomial,
    central_to_raw,
    cumulants_to_central,
    cumulants_to_raw,
    hermite_he,
    poly_add,
    poly_diff,
    poly_eval,
    poly_mul,
    raw_to_central,
    sawtooth_s1,
)

coeff = st.floats(min_value=-10, max_value=10, allow_nan=False)
small_poly = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(0, 4)), coeff, max_size=6
).map(ItPolynomial)


def eval_poly(p, t, tau):
    """Numeric value of an ItPolynomial at real (it)=t, (itau)=tau."""
    return sum(c * t**a * tau**b for (a, b), c in p.coeffs.items())


class TestItPolynomial:
    def test_constant_and_term(self):
        assert ItPolynomial.constant(2.5).coefficient(0, 0) == 2.5
        assert ItPolynomial.term(2, 1, -3.0).coefficient(2, 1) == -3.0

    def test_zero_coefficients_dropped(self):
        p = ItPolynomial({(1, 0): 0.0, (0, 1): 1.0})
        assert (1, 0) not in p.coeffs

    def test_immutable(self):
        p = ItPolynomial.constant(1.0)
        with pytest.raises(AttributeError):
            p.coeffs = {}

    def test_mul_adds_exponents(self):
        p = ItPolynomial.term(1, 2, 3.0) * ItPolynomial.term(2, 1, 0.5)
        assert p.coeffs == {(3, 3): 1.5}

    def test_degrees(self):
        p = ItPolynomial({(1, 2): 1.0, (3, 0): 2.0})
        assert p.max_degree() == (3, 2)
        assert p.total_degrees() == (3, 3)
        assert not p.is_univariate()
        assert ItPolynomial({(2, 0): 1.0}).is_univariate()

    @given(small_poly, small_poly, small_poly)
    @settings(max_examples=50, deadline=None)
    def test_ring_axioms(self, p, q, r):
        t, tau = 0.7, -1.3
        lhs = eval_poly((p + q) * r, t, tau)
        rhs = eval_poly(p * r, t, tau) + eval_poly(q * r, t, tau)
        assert lhs == pytest.approx(rhs, abs=1e-9)
        assert eval_poly(p - p, t, tau) == 0.0

    @given(small_poly, coeff)
    @settings(max_examples=50, deadline=None)
    def test_scale(self, p, c):
        assert eval_poly(p.scale(c), 2.0, 3.0) == pytest.approx(
            c * eval_poly(p, 2.0, 3.0), rel=1e-12, abs=1e-12)


class TestHermite:
    def test_explicit_low_orders(self):
        for u in np.linspace(-3, 3, 13):
            assert hermite_he(0, u) == 1.0
            assert hermite_he(1, u) == u
            assert hermite_he(2, u) == pytest.approx(u * u - 1.0)
            assert hermite_he(3, u) == pytest.approx(u**3 - 3 * u)
            assert hermite_he(4, u) == pytest.approx(u**4 - 6 * u**2 + 3)

    def test_recurrence(self):
        for v in range(1, 10):
            for u in (-2.2, 0.0, 0.5, 3.1):
                lhs = hermite_he(v + 1, u)
                rhs = u * hermite_he(v, u) - v * hermite_he(v - 1, u)
                assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            hermite_he(-1, 0.0)


class TestSawtooth:
    def test_integers_and_half_integers(self):
        assert sawtooth_s1(3.0) == 0.5
        assert sawtooth_s1(-2.0) == 0.5
        assert sawtooth_s1(1.5) == 0.0
        assert sawtooth_s1(-0.5) == 0.0

    @given(st.floats(min_value=-100, max_value=100, allow_nan=False))
    @settings(max_examples=100, deadline=None)
    def test_periodic_and_bounded(self, x):
        assert abs(sawtooth_s1(x)) <= 0.5
        # periodicity is only testable away from the jump at integers,
        # where x + 1.0 can round across the discontinuity
        if abs(x - round(x)) > 1e-6:
            assert sawtooth_s1(x + 1.0) == pytest.approx(
                sawtooth_s1(x), abs=1e-6)


class TestMomentConversions:
    def test_poisson_roundtrip(self):
        # Poisson(lam): all cumulants equal lam
        lam = 1.7
        kappa = [0.0] + [lam] * 6
        raw = cumulants_to_raw(kappa)
        central = cumulants_to_central(kappa)
        assert raw[1] == pytest.approx(lam)
        assert central[2] == pytest.approx(lam)
        assert central[3] == pytest.approx(lam)
        assert central[4] == pytest.approx(lam + 3 * lam**2)
        back = raw_to_central(raw)
        for a, b in zip(back, central):
            assert a == pytest.approx(b, rel=1e-12, abs=1e-12)

    @given(st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False),
                    min_size=3, max_size=6))
    @settings(max_examples=50, deadline=None)
    def test_raw_central_roundtrip(self, kappa_tail):
        kappa = [0.0, 0.5] + kappa_tail
        raw = cumulants_to_raw(kappa)
        central = raw_to_central(raw)
        raw_back = central_to_raw(central, raw[1])
        for a, b in zip(raw, raw_back):
            assert a == pytest.approx(b, rel=1e-9, abs=1e-9)

    def test_gaussian_central_moments(self):
        # N(mu, s2): kappa = (mu, s2, 0, 0, ...)
        central = cumulants_to_central([0.0, 3.0, 2.0, 0.0, 0.0, 0.0, 0.0])
        assert central[3] == pytest.approx(0.0)
        assert central[4] == pytest.approx(3 * 2.0**2)
        assert central[6] == pytest.approx(15 * 2.0**3)


class TestDensePolys:
    def test_mul_add_diff_eval(self):
        p = [1.0, 2.0, 3.0]          # 1 + 2x + 3x^2
        q = [0.0, 1.0]               # x
        assert poly_eval(poly_mul(p, q), 2.0) == pytest.approx(
            2.0 * poly_eval(p, 2.0))
        assert poly_eval(poly_add(p, q), 2.0) == pytest.approx(
            poly_eval(p, 2.0) + 2.0)
        assert poly_diff(p) == [2.0, 6.0]
        assert poly_diff([5.0]) == [0.0]
