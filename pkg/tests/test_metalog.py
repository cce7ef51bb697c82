"""Metalog core tests: basis, quantile, density, CDF, feasibility, JSON."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metalog_risk.metalog import (
    FeasibilityReport,
    InfeasibleError,
    MetalogCoefficients,
    ProbLevel,
    basis_matrix,
    basis_term,
    cdf,
    is_feasible,
    pdf_at_level,
    quantile,
    quantile_density,
)

LOGISTIC = MetalogCoefficients([0.0, 1.0])


def random_vector(rng, n, tail_scale=0.3):
    a = np.empty(n)
    a[0] = rng.uniform(-2.0, 2.0)
    a[1] = rng.uniform(0.5, 2.0)
    for j in range(3, n + 1):
        a[j - 1] = rng.uniform(-tail_scale, tail_scale)
    return a


class TestProbLevel:
    @pytest.mark.parametrize("p", [1e-300, 0.5, 1.0 - 1e-16])
    def test_accepts_interior(self, p):
        level = ProbLevel(p)
        assert isinstance(level, float)
        assert level == p

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.1, float("nan"), float("inf")])
    def test_rejects_boundary_and_outside(self, p):
        with pytest.raises(ValueError):
            ProbLevel(p)

    def test_arithmetic_decays_to_float(self):
        assert ProbLevel(0.25) + 0.25 == 0.5


class TestCoefficients:
    def test_basic(self):
        c = MetalogCoefficients([1.0, 2.0, 3.0])
        assert c.n == 3
        assert not c.a.flags.writeable

    def test_too_short(self):
        with pytest.raises(ValueError):
            MetalogCoefficients([1.0])

    def test_too_long(self):
        with pytest.raises(ValueError):
            MetalogCoefficients(np.zeros(33))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            MetalogCoefficients([0.0, float("nan")])

    def test_source_array_not_aliased(self):
        src = np.array([0.0, 1.0])
        c = MetalogCoefficients(src)
        src[1] = 99.0
        assert c.a[1] == 1.0

    @given(
        st.lists(
            st.floats(-1e12, 1e12, allow_nan=False, allow_infinity=False),
            min_size=2,
            max_size=32,
        )
    )
    @settings(max_examples=60)
    def test_json_round_trip_bit_exact(self, values):
        c = MetalogCoefficients(values)
        again = MetalogCoefficients.from_json(c.to_json())
        assert again.n == c.n
        assert np.array_equal(again.a, c.a)

    @pytest.mark.parametrize(
        "text",
        [
            "not json",
            "[1, 2]",
            '{"n": 2}',
            '{"a": [1, 2]}',
            '{"n": 3, "a": [1, 2]}',
            '{"n": 2.0, "a": [1, 2]}',
            '{"n": 2, "a": [1, "x"]}',
        ],
    )
    def test_from_json_rejects(self, text):
        with pytest.raises(ValueError):
            MetalogCoefficients.from_json(text)


class TestBasis:
    def test_first_four(self):
        p = 0.75
        t = math.log(3.0)
        assert basis_term(1, p) == 1.0
        assert basis_term(2, p) == pytest.approx(t, rel=1e-15)
        assert basis_term(3, p) == pytest.approx(0.25 * t, rel=1e-15)
        assert basis_term(4, p) == 0.25

    def test_higher_terms(self):
        # odd j: pure power (p - 1/2)^((j-1)/2); even j: power times logit
        assert basis_term(5, 0.75) == pytest.approx(0.0625, rel=1e-15)
        assert basis_term(6, 0.75) == pytest.approx(
            0.068663268041756856, rel=1e-14
        )
        assert basis_term(7, 0.25) == pytest.approx(-0.015625, rel=1e-15)

    def test_midpoint_kills_log_terms(self):
        for j in (2, 3, 6, 8):
            assert basis_term(j, 0.5) == 0.0
        assert basis_term(5, 0.5) == 0.0
        assert basis_term(4, 0.5) == 0.0
        assert basis_term(1, 0.5) == 1.0

    def test_rejects_bad_index_or_level(self):
        with pytest.raises(ValueError):
            basis_term(0, 0.5)
        with pytest.raises(ValueError):
            basis_term(2, 1.0)

    def test_matrix_matches_scalar(self):
        p = np.array([0.1, 0.37, 0.5, 0.82, 0.99])
        design = basis_matrix(p, 9)
        assert design.shape == (5, 9)
        for i, pi in enumerate(p):
            for j in range(1, 10):
                assert design[i, j - 1] == pytest.approx(
                    basis_term(j, pi), rel=1e-15, abs=1e-15
                )

    def test_matrix_rejects_boundary(self):
        with pytest.raises(ValueError):
            basis_matrix(np.array([0.5, 1.0]), 3)


class TestQuantile:
    def test_logistic_values(self):
        assert quantile(LOGISTIC, 0.5) == 0.0
        for p in (0.01, 0.2, 0.8, 0.999):
            assert quantile(LOGISTIC, p) == pytest.approx(
                math.log(p / (1 - p)), rel=1e-15
            )

    def test_three_term_spot(self):
        c = MetalogCoefficients([0.0, 1.0, 0.3])
        assert quantile(c, 0.3) == pytest.approx(-0.7964599887639714, rel=1e-15)

    def test_array_in_array_out(self):
        p = np.array([0.2, 0.5, 0.8])
        out = quantile(LOGISTIC, p)
        assert isinstance(out, np.ndarray)
        assert out.shape == (3,)
        assert out[1] == 0.0
        assert isinstance(quantile(LOGISTIC, 0.5), float)

    def test_rejects_boundary_levels(self):
        with pytest.raises(ValueError):
            quantile(LOGISTIC, 0.0)
        with pytest.raises(ValueError):
            quantile(LOGISTIC, np.array([0.5, 1.0]))

    def test_matches_basis_matrix(self):
        rng = np.random.default_rng(11)
        p = rng.uniform(0.01, 0.99, 40)
        for n in (2, 5, 10, 17, 32):
            a = rng.normal(size=n)
            c = MetalogCoefficients(a)
            direct = quantile(c, p)
            via_matrix = basis_matrix(p, n) @ a
            np.testing.assert_allclose(direct, via_matrix, rtol=1e-12, atol=1e-12)

    def test_term_recursion(self):
        # M_n - M_{n-1} = a_n g_n
        rng = np.random.default_rng(5)
        for n in range(3, 13):
            a = rng.normal(size=n)
            p = rng.uniform(0.02, 0.98)
            full = quantile(MetalogCoefficients(a), p)
            trunc = quantile(MetalogCoefficients(a[: n - 1]), p)
            assert full - trunc == pytest.approx(
                a[n - 1] * basis_term(n, p), rel=1e-10, abs=1e-12
            )

    @given(
        st.floats(0.001, 0.999),
        st.floats(-5.0, 5.0),
    )
    @settings(max_examples=80)
    def test_linear_in_coefficients(self, p, lam):
        a = np.array([0.4, 1.1, -0.3, 0.2, 0.05])
        b = np.array([-1.0, 0.6, 0.1, -0.4, 0.3])
        lhs = quantile(MetalogCoefficients(a + lam * b), p)
        rhs = quantile(MetalogCoefficients(a), p) + lam * quantile(
            MetalogCoefficients(b), p
        )
        assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)


class TestDensity:
    def test_logistic_density(self):
        # dM/dp = 1/(p(1-p))
        for p in (0.1, 0.5, 0.93):
            assert quantile_density(LOGISTIC, p) == pytest.approx(
                1.0 / (p * (1 - p)), rel=1e-14
            )

    @pytest.mark.parametrize("n", range(2, 11))
    def test_matches_finite_difference(self, n):
        rng = np.random.default_rng(100 + n)
        a = rng.normal(size=n)
        c = MetalogCoefficients(a)
        h = 1e-6
        for p in rng.uniform(0.05, 0.95, 25):
            fd = (quantile(c, p + h) - quantile(c, p - h)) / (2.0 * h)
            assert quantile_density(c, p) == pytest.approx(fd, rel=1e-6, abs=1e-7)

    def test_pdf_is_reciprocal(self):
        assert pdf_at_level(LOGISTIC, 0.5) == pytest.approx(0.25, rel=1e-14)

    def test_pdf_rejects_infeasible_point(self):
        c = MetalogCoefficients([0.0, 0.1, 1.5])
        with pytest.raises(InfeasibleError):
            pdf_at_level(c, 1e-6)


class TestCdf:
    def test_round_trip(self):
        rng = np.random.default_rng(77)
        for n in (2, 3, 6, 9):
            c = MetalogCoefficients(random_vector(rng, n, tail_scale=0.15))
            for p in (0.001, 0.05, 0.3, 0.5, 0.77, 0.999):
                x = quantile(c, p)
                back = cdf(c, x)
                assert float(back) == pytest.approx(p, abs=1e-9)
                assert quantile(c, float(back)) == pytest.approx(
                    x, abs=1e-10 * (1.0 + abs(x))
                )

    def test_returns_problevel(self):
        assert isinstance(cdf(LOGISTIC, 0.3), ProbLevel)

    def test_clamps_beyond_support_window(self):
        assert float(cdf(LOGISTIC, -1e6)) == 1e-12
        assert float(cdf(LOGISTIC, 1e6)) == 1.0 - 1e-12

    def test_detects_non_monotone(self):
        # For a = (0, 0.1, 1.5) the quantile rises to ~18 near p=0, falls
        # through 0 at p=1/2, then climbs to ~23.5: any x in the fold makes
        # bisection sample values outside the bracket range.
        c = MetalogCoefficients([0.0, 0.1, 1.5])
        with pytest.raises(InfeasibleError):
            cdf(c, 20.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            cdf(LOGISTIC, float("nan"))


class TestFeasibility:
    def test_logistic_feasible(self):
        report = is_feasible(LOGISTIC)
        assert report.feasible
        assert bool(report)
        assert report.density_min > 0

    def test_known_infeasible_triple(self):
        report = is_feasible(MetalogCoefficients([0.0, 0.1, 1.5]))
        assert not report.feasible
        assert report.density_min < 0
        assert report.p_min < 1e-6  # violation shows up hard against p = 0

    def test_fourth_term_boundary(self):
        # density = 1/(p(1-p)) + a4 has minimum 4 + a4 at p = 1/2
        assert is_feasible(MetalogCoefficients([0.0, 1.0, 0.0, -3.9])).feasible
        report = is_feasible(MetalogCoefficients([0.0, 1.0, 0.0, -4.1]))
        assert not report.feasible
        assert report.p_min == pytest.approx(0.5, abs=1e-2)

    def test_grid_size_validated(self):
        with pytest.raises(ValueError):
            is_feasible(LOGISTIC, grid_size=50)

    def test_report_is_dataclass(self):
        report = is_feasible(LOGISTIC, grid_size=200)
        assert isinstance(report, FeasibilityReport)
        assert 0.0 < report.p_min < 1.0
