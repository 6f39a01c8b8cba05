"""
Unit tests for truncated series and the plethystic exponential/logarithm.
"""

import random
from fractions import Fraction

import pytest
from src.plethystics import (
    TruncatedSeries, parse_coefficients, series_from_rational, mobius,
    pe, pe_product, pl, plethystic_profile, hilbert_series_conifold, hilbert_series_c3,
    DivisionByZeroConstantError, UnitConstantError,
)


def _random_series(rng: random.Random, order: int) -> TruncatedSeries:
    """Zero constant term, small rational coefficients."""
    coeffs = [0] + [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(order)]
    return TruncatedSeries(coeffs, order)


class TestTruncatedSeries:
    """Tests for series arithmetic."""

    def test_padding_and_truncation(self):
        s = TruncatedSeries([1, 2, 3, 4], order=2)

        assert s.order == 2
        assert s.coeffs == [1, 2, 3]
        assert TruncatedSeries([1], order=3).coeffs == [1, 0, 0, 0]

    def test_multiplication_truncates(self):
        s = TruncatedSeries([1, 1], order=2)
        assert (s * s).coeffs == [1, 2, 1]
        assert (s * s * s).coeffs == [1, 3, 3]

    def test_scalar_multiplication(self):
        s = TruncatedSeries([1, 2], order=1)
        assert (s * Fraction(1, 2)).coeffs == [Fraction(1, 2), 1]
        assert (3 * s).coeffs == [3, 6]

    def test_order_mismatch(self):
        with pytest.raises(ValueError):
            TruncatedSeries([1], 2) + TruncatedSeries([1], 3)

    def test_substitute_power(self):
        s = TruncatedSeries([0, 1, 2], order=5)
        assert s.substitute_power(2).coeffs == [0, 0, 1, 0, 2, 0]

    def test_degree(self):
        assert TruncatedSeries([0, 4, -1], order=6).degree() == 2
        assert TruncatedSeries.zero(4).degree() is None

    def test_str(self):
        assert str(TruncatedSeries([0, 4, -1], order=3)) == "4*t - t^2 + O(t^4)"
        assert str(TruncatedSeries([Fraction(-1, 2)], order=0)) == "-1/2 + O(t^1)"
        assert str(TruncatedSeries.zero(2)) == "0 + O(t^3)"

    def test_to_list(self):
        assert TruncatedSeries([1, Fraction(1, 2)], order=1).to_list() == ["1", "1/2"]


class TestRationalExpansion:
    """Tests for long division of rational functions."""

    def test_parse_coefficients(self):
        assert parse_coefficients("1, 0, -1/2") == [1, 0, Fraction(-1, 2)]

    def test_parse_empty(self):
        with pytest.raises(ValueError):
            parse_coefficients(" , ")

    def test_geometric(self):
        assert series_from_rational([1], [1, -1], order=4).coeffs == [1] * 5

    def test_c3(self):
        """1/(1-t)^3 counts monomials in three variables."""
        g = hilbert_series_c3(order=5)
        assert g.coeffs == [1, 3, 6, 10, 15, 21]

    def test_zero_constant_denominator(self):
        with pytest.raises(DivisionByZeroConstantError):
            series_from_rational([1], [0, 1])


class TestMobius:
    """Tests for the Moebius function."""

    @pytest.mark.parametrize("k,value", [(1, 1), (2, -1), (4, 0), (6, 1), (12, 0), (30, -1)])
    def test_values(self, k, value):
        assert mobius(k) == value

    def test_non_positive(self):
        with pytest.raises(ValueError):
            mobius(0)


class TestPlethystic:
    """Tests for PE and PE^-1."""

    def test_pe_of_3t(self):
        f = TruncatedSeries([0, 3], order=4)
        assert pe(f).coeffs == [1, 3, 6, 10, 15]

    def test_pe_ignores_constant(self):
        assert pe(TruncatedSeries([7, 1], order=3)) == pe(TruncatedSeries([0, 1], order=3))

    def test_euler_product_agrees(self):
        f = TruncatedSeries([0, 4, -1, 2, 0, -3], order=10)
        assert pe_product(f) == pe(f)

    def test_conifold(self):
        """PE^-1 of the conifold Hilbert series is 4t - t^2."""
        f = pl(hilbert_series_conifold(order=30))
        assert f == TruncatedSeries([0, 4, -1], order=30)

    def test_c3(self):
        assert pl(hilbert_series_c3(order=20)) == TruncatedSeries([0, 3], order=20)

    def test_round_trip(self):
        rng = random.Random(20240513)
        for _ in range(100):
            f = _random_series(rng, 20)
            assert pl(pe(f)) == f

    def test_inverse_round_trip(self):
        """pe undoes pl on series with unit constant term."""
        rng = random.Random(977)
        for _ in range(50):
            g = _random_series(rng, 15) + TruncatedSeries.one(order=15)
            assert pe(pl(g)) == g

    def test_non_unit_constant(self):
        with pytest.raises(UnitConstantError):
            pl(TruncatedSeries([2, 1], order=3))


class TestProfile:
    """Tests for the complete-intersection heuristic."""

    def test_conifold_terminates(self):
        profile = plethystic_profile(hilbert_series_conifold(order=30))

        assert profile.terminates
        assert profile.degree == 2
        assert profile.positive == [(1, 4)]
        assert profile.negative == [(2, -1)]

    def test_non_complete_intersection(self):
        """C^3/Z_3 is not a complete intersection; its PE^-1 never stops."""
        g = series_from_rational([1, 7, 1], [1, -3, 3, -1], order=30)
        profile = plethystic_profile(g)

        assert not profile.terminates
        assert profile.positive[0] == (1, 10)
        assert profile.negative[0] == (2, -27)

    def test_margin(self):
        g = hilbert_series_conifold(order=6)
        assert plethystic_profile(g, margin=5).terminates is False
        assert plethystic_profile(g, margin=4).terminates is True

    def test_to_dict(self):
        data = plethystic_profile(hilbert_series_conifold(order=4)).to_dict()
        assert data["pl"] == ["0", "4", "-1", "0", "0"]
        assert data["negative"] == [[2, "-1"]]
