"""
Unit tests for two-variable Laurent polynomials.
"""

import numpy as np
import pytest
from src.laurent import LaurentPoly2, Z, W
from src.models import StructureError


class TestArithmetic:
    """Tests for ring operations."""

    def test_add_cancels(self):
        assert (Z + W - Z) == W

    def test_mul(self):
        P = (1 + Z) * (1 + W)
        assert P.terms == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}

    def test_zero_terms_dropped(self):
        assert (Z - Z).is_zero()
        assert len(Z - Z) == 0

    def test_negative_power_of_monomial(self):
        assert (-Z) ** -1 == LaurentPoly2.monomial(-1, 0, -1)
        assert (-Z) ** -2 == LaurentPoly2.monomial(-2, 0, 1)

    def test_negative_power_of_sum_rejected(self):
        with pytest.raises(ValueError):
            (1 + Z) ** -1

    def test_shift_and_swap(self):
        P = (1 + 2 * Z).shift(-1, 1)
        assert P.terms == {(-1, 1): 1, (0, 1): 2}
        assert P.swap_variables().terms == {(1, -1): 1, (1, 0): 2}

    def test_min_exponents(self):
        assert LaurentPoly2.parse("z^-1 + w^-2*z").min_exponents() == (-1, -2)


class TestEvaluate:
    """Tests for numerical evaluation."""

    def test_evaluate(self):
        assert (1 + Z + W).evaluate(-2, 1) == 0

    def test_overrides(self):
        P = 1 + Z + W
        assert P.evaluate(1, 1, overrides={(0, 0): 5}) == 7


class TestFormatting:
    """Tests for printing and parsing."""

    def test_str_degree_order(self):
        assert str(1 + Z + W) == "1 + z + w"
        assert str((1 + Z) * (1 + W)) == "1 + z + w + z*w"

    def test_str_signs_and_coefficients(self):
        P = LaurentPoly2.parse("z^-1*w^-1 - z^-1 - w^-1 - 6 - z - w + z*w")
        assert str(P) == "z^-1*w^-1 - w^-1 - z^-1 - 6 - z - w + z*w"

    def test_str_leading_negative(self):
        assert str(-1 - 2 * Z) == "-1 - 2*z"

    def test_str_zero(self):
        assert str(LaurentPoly2.zero()) == "0"

    def test_parse(self):
        P = LaurentPoly2.parse("1 + z + w^-1")
        assert P.coeff(0, -1) == 1
        assert P.coeff(1, 0) == 1
        assert len(P) == 3

    def test_parse_expands_products(self):
        assert LaurentPoly2.parse("(1 + z)*(1 + w)") == (1 + Z) * (1 + W)

    def test_parse_unknown_symbol(self):
        with pytest.raises(StructureError, match="Unknown symbols"):
            LaurentPoly2.parse("1 + x")

    def test_products_need_explicit_star(self):
        """Printed products read back; juxtaposed "zw" is a single unknown symbol."""
        P = LaurentPoly2.parse("z^-1*w^-1 - z^-1 - w^-1 - 6 - z - w + z*w")

        assert LaurentPoly2.parse(str(P)) == P
        with pytest.raises(StructureError, match="Unknown symbols"):
            LaurentPoly2.parse("1 + zw")

    def test_parse_rational_coefficient(self):
        with pytest.raises(StructureError):
            LaurentPoly2.parse("z/2")

    def test_parse_garbage(self):
        with pytest.raises(StructureError):
            LaurentPoly2.parse("1 + + ) z")


def _random_poly(rng: np.random.Generator) -> LaurentPoly2:
    n = int(rng.integers(0, 5))
    return LaurentPoly2({
        (int(rng.integers(-2, 3)), int(rng.integers(-2, 3))): int(rng.integers(-4, 5)) for _ in range(n)
    })


class TestRingAxioms:
    """Ring laws on random polynomials with small exponents."""

    @pytest.fixture
    def triples(self):
        rng = np.random.default_rng(11)
        return [(_random_poly(rng), _random_poly(rng), _random_poly(rng)) for _ in range(40)]

    def test_commutative(self, triples):
        for a, b, _ in triples:
            assert a + b == b + a
            assert a * b == b * a

    def test_associative(self, triples):
        for a, b, c in triples:
            assert (a + b) + c == a + (b + c)
            assert (a * b) * c == a * (b * c)

    def test_distributive(self, triples):
        for a, b, c in triples:
            assert a * (b + c) == a * b + a * c

    def test_identities(self, triples):
        for a, _, _ in triples:
            assert a + LaurentPoly2.zero() == a
            assert a * LaurentPoly2.one() == a
            assert (a - a).is_zero()
