"""Digamma, hypergeometric and bracket-limit tests.

The reference for hyp2f1_special is the defining power series summed to
1e-16 term magnitude, implemented independently here; digamma values are
additionally checked against scipy and against the recurrence and
duplication identities they must satisfy.
"""

import math

import mpmath
import pytest
import scipy.special as sps
from hypothesis import given, strategies as st

from metalog_risk.special import (
    EULER_GAMMA,
    bracket_at_half,
    digamma_half_int,
    euler_gamma,
    hyp2f1_special,
)

LN2 = math.log(2.0)


def series_oracle(k: int, z: float) -> float:
    """2F1(1, k+1; k+2; z) by its power series, truncated at 1e-16 terms."""
    m = k + 1
    total = 0.0
    zj = 1.0
    j = 0
    while True:
        term = m / (m + j) * zj
        total += term
        if abs(term) < 1e-16:
            return total
        zj *= z
        j += 1


class TestEulerGamma:
    def test_value(self):
        assert euler_gamma() == 0.5772156649015329
        assert EULER_GAMMA == euler_gamma()

    def test_against_mpmath(self):
        assert abs(euler_gamma() - float(mpmath.euler)) < 1e-16


class TestDigamma:
    def test_integer_spots(self):
        assert digamma_half_int(2) == -EULER_GAMMA            # psi(1)
        assert abs(digamma_half_int(4) - (1.0 - EULER_GAMMA)) < 1e-16
        assert abs(digamma_half_int(6) - (1.5 - EULER_GAMMA)) < 1e-15

    def test_half_integer_spots(self):
        assert abs(digamma_half_int(1) - (-EULER_GAMMA - 2 * LN2)) < 1e-15
        # psi(3/2) = 2 - gamma - 2 ln 2
        assert abs(digamma_half_int(3) - 0.036489973978576521) < 1e-14

    @pytest.mark.parametrize("twice", range(1, 61))
    def test_recurrence(self, twice):
        # psi(x + 1) = psi(x) + 1/x with x = twice/2
        lhs = digamma_half_int(twice + 2)
        rhs = digamma_half_int(twice) + 2.0 / twice
        assert abs(lhs - rhs) < 1e-13 * (1.0 + abs(lhs))

    @pytest.mark.parametrize("k", range(1, 31))
    def test_duplication(self, k):
        # psi(1 + k) = psi((1+k)/2)/2 + psi((2+k)/2)/2 + ln 2
        lhs = digamma_half_int(2 * k + 2)
        rhs = 0.5 * digamma_half_int(k + 1) + 0.5 * digamma_half_int(k + 2) + LN2
        assert abs(lhs - rhs) < 1e-13 * (1.0 + abs(lhs))

    @pytest.mark.parametrize("twice", [1, 2, 3, 5, 8, 13, 40, 64])
    def test_against_scipy(self, twice):
        assert digamma_half_int(twice) == pytest.approx(
            float(sps.digamma(twice / 2.0)), rel=1e-13, abs=1e-13
        )

    @pytest.mark.parametrize("bad", [0, -1, -7])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            digamma_half_int(bad)

    def test_rejects_non_integer(self):
        with pytest.raises(TypeError):
            digamma_half_int(1.5)


class TestHyp2f1:
    def test_at_zero(self):
        assert hyp2f1_special(3, 0.0) == 1.0

    @pytest.mark.parametrize("z", [1.0, 1.5, -1.0000001, 2.0])
    def test_domain_rejected(self, z):
        with pytest.raises(ValueError):
            hyp2f1_special(2, z)

    def test_k_rejected(self):
        with pytest.raises(ValueError):
            hyp2f1_special(0, 0.5)

    def test_known_value(self):
        # 2F1(1, 3; 4; 1/2) = -24 (ln(1/2) + 1/2 + 1/8)
        assert hyp2f1_special(2, 0.5) == pytest.approx(
            1.6355323334386874, rel=1e-13
        )

    @pytest.mark.parametrize("k", range(1, 21))
    def test_matches_series_oracle(self, k):
        for z in [x / 100.0 for x in range(-99, 100, 3)]:
            if z == 0.0:
                continue
            got = hyp2f1_special(k, z)
            want = series_oracle(k, z)
            assert abs(got - want) <= 1e-12 * abs(want), (k, z, got, want)

    @pytest.mark.parametrize("k", [1, 2, 5, 11, 20])
    @pytest.mark.parametrize("z", [-0.97, -0.5, -0.049, 0.049, 0.31, 0.97])
    def test_against_mpmath(self, k, z):
        want = float(mpmath.hyp2f1(1, k + 1, k + 2, z))
        assert hyp2f1_special(k, z) == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("k", range(1, 7))
    def test_boundary_minus_one(self, k):
        # 2F1(1, k+1; k+2; -1) = (k+1) (-1)^k (ln 2 - sum_{q<=k} (-1)^{q+1}/q)
        alt = sum((-1.0) ** (q + 1) / q for q in range(1, k + 1))
        want = (k + 1) * (-1.0) ** k * (LN2 - alt)
        assert hyp2f1_special(k, -1.0) == pytest.approx(want, rel=1e-12)

    @given(st.integers(1, 16), st.floats(-0.999, 0.999))
    def test_series_agreement_everywhere(self, k, z):
        want = series_oracle(k, z)
        assert hyp2f1_special(k, z) == pytest.approx(want, rel=1e-11, abs=1e-13)


class TestBracketAtHalf:
    def test_spot_values(self):
        assert abs(bracket_at_half(1) - 4.0) < 1e-13
        assert abs(bracket_at_half(2) - 3.0 * (1.0 + 2.0 * LN2)) < 1e-13
        assert abs(bracket_at_half(4) - 14.431471805599453) < 1e-12

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
    def test_is_limit_of_raw_combination(self, k):
        # The raw combination diverges termwise at r = 1/2 but approaches
        # the bracket value; at r = 1/2 - 1e-6 it agrees to ~1e-4.
        r = 0.5 - 1e-6
        raw = (
            hyp2f1_special(k, -2.0 * r)
            - hyp2f1_special(k, 2.0 * r)
            + (k + 1) * math.log((1.0 + 2.0 * r) / (1.0 - 2.0 * r))
        )
        assert raw == pytest.approx(bracket_at_half(k), rel=1e-4)

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            bracket_at_half(0)
