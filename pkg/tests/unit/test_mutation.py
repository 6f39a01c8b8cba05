"""
Unit tests for Seiberg mutation, mass-term reduction and urban renewal.
"""

from fractions import Fraction

import pytest
from src.core import maps_isomorphic, quiver_to_map, quivers_isomorphic, validate_quiver
from src.dessin import passport, permutation_triple
from src.fixtures import get_fixture
from src.models import Arrow, Quiver, Term
from src.mutation import (
    reversed_id, seiberg_mutate, reduce_mass_terms, mutate_and_reduce,
    urban_renewal, check_duality_invariance,
    NotDualizableError, SpliceError, MultiVisitError,
)


def _massive_quiver(with_partner: bool = True) -> Quiver:
    """A 2-cycle X, Y whose partners are cubic terms through node 3."""
    arrows = [
        Arrow("X", "1", "2"), Arrow("Y", "2", "1"),
        Arrow("A", "2", "3"), Arrow("A2", "3", "1"),
        Arrow("B", "1", "3"), Arrow("B2", "3", "2"),
    ]
    terms = [
        Term(1, ("X", "Y"), Fraction(2)),
        Term(-1, ("X", "A", "A2"), Fraction(3)),
    ]
    if with_partner:
        terms.append(Term(-1, ("Y", "B", "B2")))
    return Quiver(nodes=["1", "2", "3"], arrows=arrows, superpotential=terms)


class TestReversedId:
    """Tests for reversed arrow naming."""

    def test_toggle(self):
        assert reversed_id("X12") == "X12*"
        assert reversed_id("X12*") == "X12"


class TestSeibergMutation:
    """Tests for node dualization."""

    def test_f0_phase_one_to_two(self):
        """Dualizing F0 phase I at node 1 gives phase II."""
        q1 = get_fixture("f0-I").quiver
        dual, record = mutate_and_reduce(q1, "1")

        assert quivers_isomorphic(dual, get_fixture("f0-II").quiver)
        assert len(record.mesons) == 4
        assert len(record.reversed_arrows) == 4
        assert record.removed_pairs == []
        assert record.terms_before == 4
        assert record.terms_after == 8

    def test_meson_names(self):
        dual, record = seiberg_mutate(get_fixture("f0-I").quiver, "1")
        names = {meson for meson, _, _ in record.mesons}

        assert "(X41_1.X12_1)" in names
        assert dual.arrow("(X41_2.X12_1)").source == "4"
        assert dual.arrow("(X41_2.X12_1)").target == "2"
        assert dual.arrow("X12_1*").source == "2"

    def test_involution(self):
        """Dualizing the same node twice returns to the original quiver."""
        q1 = get_fixture("f0-I").quiver
        once, _ = mutate_and_reduce(q1, "1")
        twice, record = mutate_and_reduce(once, "1")

        assert quivers_isomorphic(twice, q1)
        assert len(record.removed_pairs) == 4

    def test_result_is_valid(self):
        dual, _ = mutate_and_reduce(get_fixture("f0-I").quiver, "3")
        assert validate_quiver(dual).passed

    def test_loops_rejected(self):
        with pytest.raises(NotDualizableError, match="loops"):
            seiberg_mutate(get_fixture("c3").quiver, "1")

    def test_unknown_node(self):
        with pytest.raises(NotDualizableError):
            seiberg_mutate(get_fixture("f0-I").quiver, "9")

    def test_wrong_valence(self):
        with pytest.raises(NotDualizableError, match="need 2 and 2"):
            seiberg_mutate(get_fixture("c3z3").quiver, "1")

    def test_multi_visit(self):
        """Conifold terms pass through each node twice."""
        with pytest.raises(MultiVisitError):
            seiberg_mutate(get_fixture("conifold").quiver, "1")

    def test_record_to_dict(self):
        _, record = mutate_and_reduce(get_fixture("f0-I").quiver, "1")
        data = record.to_dict()

        assert data["node"] == "1"
        assert len(data["mesons"]) == 4


class TestMassReduction:
    """Tests for integrating out quadratic terms."""

    def test_splice_coefficient(self):
        reduced = reduce_mass_terms(_massive_quiver())

        assert [a.id for a in reduced.arrows] == ["A", "A2", "B", "B2"]
        assert reduced.superpotential == [Term(-1, ("A", "A2", "B", "B2"), Fraction(3, 2))]

    def test_no_mass_terms(self):
        q = get_fixture("f0-II").quiver
        assert reduce_mass_terms(q).to_dict() == q.to_dict()

    def test_missing_partner(self):
        with pytest.raises(SpliceError):
            reduce_mass_terms(_massive_quiver(with_partner=False))


class TestUrbanRenewal:
    """Tests for the tiling side of mutation."""

    def test_square_face(self):
        m = quiver_to_map(get_fixture("f0-I").quiver)
        renewed = urban_renewal(m, 0)

        assert renewed.n_edges == 12
        assert len(renewed.faces()) == 4
        assert passport(permutation_triple(renewed)).rows() == ((3, 3, 3, 3), (3, 3, 3, 3), (2, 2, 4, 4))

    def test_renewal_twice_returns(self):
        """Renewing a square face of the dual tiling recovers the original map."""
        m = quiver_to_map(get_fixture("f0-I").quiver)
        renewed = urban_renewal(m, 0)
        squares = [i for i, face in enumerate(renewed.faces()) if len(face) == 2]

        assert squares
        assert any(maps_isomorphic(urban_renewal(renewed, i), m) for i in squares)

    def test_hexagonal_face(self):
        m = quiver_to_map(get_fixture("c3").quiver)
        with pytest.raises(NotDualizableError, match="quadrilateral"):
            urban_renewal(m, 0)

    def test_face_out_of_range(self):
        m = quiver_to_map(get_fixture("f0-I").quiver)
        with pytest.raises(NotDualizableError):
            urban_renewal(m, 4)


class TestDualityInvariance:
    """Tests for toric diagram comparison across dual phases."""

    def test_f0_phases_agree(self):
        report = check_duality_invariance(get_fixture("f0-I").quiver, get_fixture("f0-II").quiver)

        assert report.equal
        assert len(report.interior_first) == 1
        assert report.to_dict()["equal"] is True

    def test_different_geometries(self):
        report = check_duality_invariance(get_fixture("c3").quiver, get_fixture("conifold").quiver)
        assert not report.equal
