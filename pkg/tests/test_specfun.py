import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satrelay import specfun as sf

import oracles

# frozen from tests/oracles.py
Q1_1_1 = 0.7328798037968202  # marcum_q1_integral(1, 1)
Q1_2_3 = 0.21436208816264946  # marcum_q1_integral(2, 3)
GAMMA_07_13 = 0.21827755578307012  # upper_gamma_integral(0.7, 1.3)
I0_1 = 1.2660658777520082  # bessel_i0_series(1.0)


def test_frozen_values_match_oracles():
    assert oracles.marcum_q1_integral(1, 1) == pytest.approx(Q1_1_1, abs=1e-13)
    assert oracles.marcum_q1_integral(2, 3) == pytest.approx(Q1_2_3, abs=1e-13)
    assert oracles.upper_gamma_integral(0.7, 1.3) == pytest.approx(GAMMA_07_13, rel=1e-12)
    assert oracles.bessel_i0_series(1.0) == pytest.approx(I0_1, rel=1e-15)


class TestMarcumQ1:
    def test_b_zero_is_one(self):
        assert sf.marcum_q1(2.5, 0.0) == 1.0

    def test_a_zero_is_rayleigh_tail(self):
        assert sf.marcum_q1(0.0, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-14)

    def test_against_integral(self):
        assert sf.marcum_q1(1.0, 1.0) == pytest.approx(Q1_1_1, abs=1e-10)
        assert sf.marcum_q1(2.0, 3.0) == pytest.approx(Q1_2_3, abs=1e-10)

    @pytest.mark.parametrize("a,b", [(0.3, 0.2), (3.0, 1.0), (4.5, 7.0), (10.0, 12.0), (20.0, 5.0)])
    def test_against_integral_spread(self, a, b):
        assert sf.marcum_q1(a, b) == pytest.approx(oracles.marcum_q1_integral(a, b), abs=1e-10)

    def test_vectorized(self):
        out = sf.marcum_q1(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
        assert out.shape == (2,)
        assert out[1] == pytest.approx(Q1_1_1, abs=1e-10)

    @pytest.mark.parametrize("a,b", [(math.nan, 1.0), (1.0, math.inf), (-1.0, 1.0), (1.0, -0.5)])
    def test_domain(self, a, b):
        with pytest.raises(sf.DomainError):
            sf.marcum_q1(a, b)

    def test_monotone_grid(self):
        a = np.linspace(0, 5, 20)
        b = np.linspace(0, 10, 20)
        A, B = np.meshgrid(a, b, indexing="ij")
        Q = sf.marcum_q1(A, B)
        assert np.all(np.diff(Q, axis=1) <= 1e-13)  # non-increasing in b
        assert np.all(np.diff(Q, axis=0) >= -1e-13)  # non-decreasing in a

    @given(st.floats(0, 30), st.floats(0, 40))
    def test_in_unit_interval(self, a, b):
        q = sf.marcum_q1(a, b)
        assert 0.0 <= q <= 1.0


class TestMarcumApprox:
    def test_a_zero(self):
        assert sf.marcum_q1_approx(0.0, 1.0) == pytest.approx(math.exp(-math.exp(-0.840)), abs=1e-15)

    @given(st.floats(0, 10))
    def test_b_zero(self, a):
        assert sf.marcum_q1_approx(a, 0.0) == 1.0

    def test_close_to_exact(self):
        assert abs(sf.marcum_q1_approx(2.0, 3.0) - Q1_2_3) <= 0.02

    def test_gap_up_to_a4(self):
        a = np.arange(1, 4.001, 0.25)
        b = np.arange(0, 10.001, 0.25)
        A, B = np.meshgrid(a, b)
        gap = np.abs(sf.marcum_q1_approx(A, B) - sf.marcum_q1(A, B))
        assert gap.max() <= 0.03

    @pytest.mark.xfail(strict=True, reason="the fitted polynomials drift to a 0.089 gap at a = 5")
    def test_gap_full_range(self):
        a = np.arange(1, 5.001, 0.25)
        b = np.arange(0, 10.001, 0.25)
        A, B = np.meshgrid(a, b)
        gap = np.abs(sf.marcum_q1_approx(A, B) - sf.marcum_q1(A, B))
        assert gap.max() <= 0.03

    @given(st.floats(0, 5), st.floats(0, 10))
    def test_range(self, a, b):
        q = sf.marcum_q1_approx(a, b)
        assert 0.0 < q <= 1.0


class TestKummer:
    def test_m1_is_exp(self):
        assert sf.kummer_1f1_integer(1, 2.7) == pytest.approx(math.exp(2.7), rel=1e-14)

    def test_x_zero(self):
        assert sf.kummer_1f1_integer(3, 0.0) == 1.0

    def test_m2_x1(self):
        assert sf.kummer_1f1_integer(2, 1.0) == pytest.approx(2 * math.e, rel=1e-12)
        assert oracles.kummer_series(2, 1.0) == pytest.approx(2 * math.e, rel=1e-12)

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    @pytest.mark.parametrize("x", [-20.0, -7.5, -1.0, 0.3, 4.0, 12.0, 20.0])
    def test_against_series(self, m, x):
        got = sf.kummer_1f1_integer(m, x)
        want = oracles.kummer_series(m, x)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("m", [0, -1, 1.5, True])
    def test_rejects_non_integer(self, m):
        with pytest.raises(sf.DomainError):
            sf.kummer_1f1_integer(m, 1.0)


class TestUpperGamma:
    def test_a1(self):
        assert sf.upper_inc_gamma(1.0, 2.0) == pytest.approx(math.exp(-2), rel=1e-14)

    def test_x0(self):
        assert sf.upper_inc_gamma(2.5, 0.0) == pytest.approx(math.gamma(2.5), rel=1e-14)

    def test_quadrature(self):
        assert sf.upper_inc_gamma(0.7, 1.3) == pytest.approx(GAMMA_07_13, abs=1e-9, rel=1e-10)

    @pytest.mark.parametrize("a", [0.0, -1.0])
    def test_domain(self, a):
        with pytest.raises(sf.DomainError):
            sf.upper_inc_gamma(a, 1.0)

    @given(st.floats(0.05, 20), st.floats(0, 30))
    def test_against_integral(self, a, x):
        want = oracles.upper_gamma_integral(a, x)
        assert sf.upper_inc_gamma(a, x) == pytest.approx(want, rel=1e-8, abs=1e-300)


class TestBesselI0:
    def test_zero(self):
        assert sf.bessel_i0(0.0) == 1.0

    def test_series(self):
        assert sf.bessel_i0(1.0) == pytest.approx(I0_1, rel=1e-10)

    @pytest.mark.parametrize("x", [0.5, 3.0, 14.9, 15.1, 30.0, 80.0])
    def test_against_series_both_branches(self, x):
        assert sf.bessel_i0(x) == pytest.approx(oracles.bessel_i0_series(x), rel=1e-10)

    @pytest.mark.parametrize("x", [0.0, 2.0, 15.0, 40.0, 1e4])
    def test_scaled(self, x):
        from scipy import special

        assert sf.bessel_i0e(x) == pytest.approx(special.i0e(x), rel=1e-10)

    @given(st.floats(-200, 200))
    def test_even(self, x):
        assert sf.bessel_i0(-x) == sf.bessel_i0(x)


class TestChebyshev:
    def test_order1(self):
        r = sf.chebyshev_rule(1)
        assert r.nodes[0] == pytest.approx(0.0, abs=1e-16)
        assert r.weights[0] == pytest.approx(math.pi)

    def test_order2(self):
        r = sf.chebyshev_rule(2)
        np.testing.assert_allclose(r.nodes, [math.cos(math.pi / 4), math.cos(3 * math.pi / 4)])
        np.testing.assert_allclose(r.weights, [math.pi / 2, math.pi / 2])

    def test_semicircle(self):
        r = sf.chebyshev_rule(50)
        assert r.integrate(lambda x: np.sqrt(1 - x**2), -1, 1) == pytest.approx(math.pi / 2, abs=1e-3)

    def test_domain(self):
        with pytest.raises(sf.DomainError):
            sf.chebyshev_rule(0)

    @given(st.integers(1, 400))
    def test_invariants(self, n):
        r = sf.chebyshev_rule(n)
        assert r.order == len(r.nodes) == len(r.weights) == n
        assert np.all(np.diff(r.nodes) < 0)
        assert np.all(np.abs(r.nodes) < 1)
        assert sum(r.weights) == pytest.approx(math.pi, rel=1e-13)
        i = np.arange(1, n + 1)
        np.testing.assert_allclose(r.nodes, np.cos((2 * i - 1) * np.pi / (2 * n)), atol=1e-15)
