"""
Tests for truncated power series arithmetic.
"""
import numpy as np
import pytest

from src.core.errors import SeriesError
from src.core.series import (
    LaurentWindow,
    TruncatedSeries,
    coefficient_list,
    series_compose,
    series_derivative,
    series_div,
    series_exp,
    series_log,
    series_mul,
    series_pow,
    series_reciprocal,
    series_reversion,
    series_shift,
)


def random_series(rng, order=16, zero_constant=False):
    c = (rng.normal(size=order + 1) + 1j * rng.normal(size=order + 1)) / 2.0 ** np.arange(order + 1)
    if zero_constant:
        c[0] = 0.0
    return TruncatedSeries(c)


class TestConstruction:
    """Construction and basic access."""

    def test_from_coeffs_pads_to_order(self):
        """Short coefficient lists are padded with zeros."""
        s = TruncatedSeries.from_coeffs([1, 2], order=5)
        assert s.order == 5
        assert coefficient_list(s) == [1, 2, 0, 0, 0, 0]

    def test_coefficients_are_read_only(self):
        """Series values cannot be mutated in place."""
        s = TruncatedSeries.variable(4)
        with pytest.raises(ValueError):
            s.coeffs[0] = 3.0

    def test_order_zero_rejected(self):
        """A series needs at least two coefficients."""
        with pytest.raises(SeriesError):
            TruncatedSeries([1.0])

    def test_mismatched_orders_rejected(self):
        """Adding series of different orders raises."""
        with pytest.raises(SeriesError):
            TruncatedSeries.variable(4) + TruncatedSeries.variable(5)

    def test_scalar_coercion(self):
        """Scalars combine with series as constants."""
        s = 1 + TruncatedSeries.variable(3)
        assert coefficient_list(s) == [1, 1, 0, 0]


class TestArithmetic:
    """Ring operations."""

    def test_geometric_series(self):
        """1/(1 - w) is the geometric series."""
        s = series_reciprocal(1 - TruncatedSeries.variable(8))
        assert np.allclose(s.coeffs, np.ones(9))

    def test_mul_drops_terms_beyond_order(self):
        """(1 + w)^2 truncated at order 1 keeps 1 + 2w."""
        s = TruncatedSeries.from_coeffs([1, 1], order=1)
        assert coefficient_list(series_mul(s, s)) == [1, 2]

    def test_lead_exponents_add(self):
        """Products of fractional powers add their lead exponents."""
        a = TruncatedSeries.from_coeffs([1], order=3, lead=0.25)
        b = TruncatedSeries.from_coeffs([1], order=3, lead=0.5)
        assert (a * b).lead_exponent == pytest.approx(0.75)

    def test_division_inverts_multiplication(self, rng):
        """(a b) / b recovers a."""
        a, b = random_series(rng), random_series(rng)
        b = TruncatedSeries(np.concatenate([[2.0], b.coeffs[1:]]))
        assert series_div(series_mul(a, b), b).allclose(a, 1e-12)

    def test_reciprocal_needs_constant(self):
        """1/w is not a power series."""
        with pytest.raises(SeriesError):
            series_reciprocal(TruncatedSeries.variable(4))

    def test_shift_round_trip(self):
        """Multiplying by w then dividing by w is the identity when nothing overflows."""
        s = TruncatedSeries.from_coeffs([1, 2, 3], order=6)
        assert series_shift(series_shift(s, 2), -2).allclose(s)

    def test_shift_rejects_nonzero_low_terms(self):
        """Dividing by w needs a vanishing constant term."""
        with pytest.raises(SeriesError):
            series_shift(TruncatedSeries.from_coeffs([1, 1], order=3), -1)

    def test_derivative(self):
        """d/dw of 1 + w + w^2 + w^3 is 1 + 2w + 3w^2."""
        s = series_derivative(TruncatedSeries.from_coeffs([1, 1, 1, 1]))
        assert coefficient_list(s) == [1, 2, 3, 0]


class TestTranscendental:
    """exp, log and powers."""

    def test_exp_of_w(self):
        """exp(w) has coefficients 1/n!."""
        s = series_exp(TruncatedSeries.variable(10))
        expected = [1.0 / np.prod(np.arange(1, n + 1)) for n in range(11)]
        assert np.allclose(s.coeffs, expected, atol=1e-15)

    def test_exp_requires_zero_constant(self):
        """exp is only defined on series without constant term."""
        with pytest.raises(SeriesError):
            series_exp(TruncatedSeries.constant(1.0, 4))

    def test_exp_is_a_homomorphism(self, rng):
        """exp(a + b) = exp(a) exp(b)."""
        for _ in range(20):
            a, b = random_series(rng, zero_constant=True), random_series(rng, zero_constant=True)
            assert series_exp(a + b).allclose(series_mul(series_exp(a), series_exp(b)), 1e-11)

    def test_log_inverts_exp(self, rng):
        """log(exp(a)) = a."""
        for _ in range(20):
            a = random_series(rng, zero_constant=True)
            assert series_log(series_exp(a)).allclose(a, 1e-11)

    def test_log_of_one_plus_w(self):
        """log(1 + w) = w - w^2/2 + w^3/3 - ..."""
        s = series_log(1 + TruncatedSeries.variable(6))
        expected = [0] + [(-1) ** (n + 1) / n for n in range(1, 7)]
        assert np.allclose(s.coeffs, expected)

    def test_sqrt(self):
        """(1 + w)^(1/2) squared is 1 + w."""
        root = series_pow(1 + TruncatedSeries.variable(8), 0.5)
        assert series_mul(root, root).allclose(1 + TruncatedSeries.variable(8), 1e-14)

    def test_pow_round_trip(self, rng):
        """(a^p)^(1/p) = a for a with positive constant term."""
        for _ in range(20):
            a = random_series(rng)
            a = TruncatedSeries(np.concatenate([[1.0], a.coeffs[1:] / 4]))
            p = rng.uniform(0.2, 4.0)
            assert series_pow(series_pow(a, p), 1.0 / p).allclose(a, 1e-11)

    def test_pow_scales_lead(self):
        """Lead exponents multiply by the power."""
        s = TruncatedSeries.from_coeffs([1, 1], order=4, lead=0.5)
        assert series_pow(s, 4.0).lead_exponent == pytest.approx(2.0)


class TestComposition:
    """Composition and reversion."""

    def test_compose_with_identity(self, rng):
        """a(w) composed with w is a."""
        a = random_series(rng)
        assert series_compose(a, TruncatedSeries.variable(16)).allclose(a, 1e-14)

    def test_compose_exp_of_log(self):
        """exp composed with log(1 + w) is 1 + w."""
        e = series_exp(TruncatedSeries.variable(10))
        log1p = series_log(1 + TruncatedSeries.variable(10))
        assert series_compose(e, log1p).allclose(1 + TruncatedSeries.variable(10), 1e-13)

    def test_compose_requires_vanishing_inner_constant(self):
        """The inner series must map 0 to 0."""
        with pytest.raises(SeriesError):
            series_compose(TruncatedSeries.variable(4), TruncatedSeries.constant(1.0, 4))

    def test_reversion(self, rng):
        """a(b(w)) = w and b(a(w)) = w."""
        for _ in range(10):
            x = random_series(rng, zero_constant=True)
            a = TruncatedSeries(np.concatenate([[0.0, 1.0 + abs(x[1])], x.coeffs[2:] / 4]))
            b = series_reversion(a)
            w = TruncatedSeries.variable(16)
            assert series_compose(a, b).allclose(w, 1e-11)
            assert series_compose(b, a).allclose(w, 1e-11)

    def test_reversion_of_w_over_one_minus_w(self):
        """w/(1 - w) reverts to w/(1 + w)."""
        w = TruncatedSeries.variable(8)
        b = series_reversion(series_mul(w, series_reciprocal(1 - w)))
        expected = [0] + [(-1) ** (n + 1) for n in range(1, 9)]
        assert np.allclose(b.coeffs, expected)

    def test_reversion_needs_linear_term(self):
        """w^2 has no compositional inverse."""
        with pytest.raises(SeriesError):
            series_reversion(TruncatedSeries.from_coeffs([0, 0, 1], order=4))


class TestEvaluation:
    """Pointwise evaluation."""

    def test_polynomial_value(self):
        """Ordinary series evaluate as polynomials."""
        s = TruncatedSeries.from_coeffs([1, 2, 3])
        assert complex(s.evaluate(0.5)) == pytest.approx(1 + 1 + 0.75)

    def test_fractional_branch(self):
        """w^(1/2) on branch 1 is minus the principal value."""
        s = TruncatedSeries.from_coeffs([1, 0], lead=0.5)
        assert complex(s.evaluate(0.25, branch=1)) == pytest.approx(-0.5)

    def test_derivative_value(self):
        """d/dw w^(3/2) = (3/2) w^(1/2)."""
        s = TruncatedSeries.from_coeffs([1, 0], lead=1.5)
        assert complex(s.evaluate(0.25, derivative=1)) == pytest.approx(0.75)


class TestLaurentWindow:
    """Indexed Laurent coefficient windows."""

    def test_indexing(self):
        """Index -2 is the first stored coefficient."""
        window = LaurentWindow([5, 6, 7, 8])
        assert window[-2] == 5
        assert window.high == 1
        assert list(window.tail()) == [7, 8]

    def test_out_of_range(self):
        """Indices outside the window raise instead of wrapping."""
        with pytest.raises(SeriesError):
            LaurentWindow([1, 2, 3])[-3]
