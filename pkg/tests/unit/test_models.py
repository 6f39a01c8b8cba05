"""
Unit tests for data models.
"""

from fractions import Fraction

import pytest
from src.models import (
    Arrow, Term, Quiver, CombinatorialMap, HomologyWeights,
    ValidationReport, ToricDiagram, StructureError, parse_coeff, format_coeff,
)


class TestArrow:
    """Tests for Arrow model."""

    def test_from_dict(self):
        """Test creating Arrow from JSON data."""
        arrow = Arrow.from_dict({"id": "X12", "from": "1", "to": "2"})

        assert arrow.id == "X12"
        assert arrow.source == "1"
        assert arrow.target == "2"
        assert not arrow.is_loop

    def test_to_dict(self):
        """Test JSON keys are from/to."""
        assert Arrow("X", "1", "1").to_dict() == {"id": "X", "from": "1", "to": "1"}

    def test_missing_field(self):
        """Test that a missing endpoint raises StructureError."""
        with pytest.raises(StructureError):
            Arrow.from_dict({"id": "X", "from": "1"})


class TestTerm:
    """Tests for Term model."""

    def test_rotation_equality(self):
        """Test that cyclic rotations are equal Terms."""
        assert Term(1, ("X", "Y", "Z")) == Term(1, ("Y", "Z", "X"))
        assert hash(Term(1, ("X", "Y", "Z"))) == hash(Term(1, ("Z", "X", "Y")))

    def test_reflection_not_equal(self):
        """Test that reversed words are different Terms."""
        assert Term(1, ("X", "Y", "Z")) != Term(1, ("X", "Z", "Y"))

    def test_sign_matters(self):
        assert Term(1, ("X", "Y")) != Term(-1, ("X", "Y"))

    def test_invalid_sign(self):
        with pytest.raises(StructureError):
            Term(2, ("X",))

    def test_empty_word(self):
        with pytest.raises(StructureError):
            Term(1, ())

    def test_zero_coefficient(self):
        with pytest.raises(StructureError):
            Term(1, ("X",), Fraction(0))

    def test_rotated_to(self):
        assert Term(1, ("A", "B", "C")).rotated_to("B") == ("B", "C", "A")

    def test_dict_round_trip_with_coefficient(self):
        """Test coefficient is written as p/q."""
        term = Term(-1, ("A", "B"), Fraction(3, 2))
        data = term.to_dict()

        assert data == {"sign": -1, "coeff": "3/2", "word": ["A", "B"]}
        assert Term.from_dict(data) == term

    def test_str(self):
        assert str(Term(-1, ("A", "B"), Fraction(1, 2))) == "-1/2*A B"


class TestCoefficients:
    """Tests for coefficient parsing."""

    def test_parse(self):
        assert parse_coeff("3/4") == Fraction(3, 4)
        assert parse_coeff(2) == Fraction(2)

    def test_parse_invalid(self):
        with pytest.raises(StructureError):
            parse_coeff("abc")

    def test_format(self):
        assert format_coeff(Fraction(5)) == "5"
        assert format_coeff(Fraction(-1, 3)) == "-1/3"


class TestQuiver:
    """Tests for Quiver model."""

    def _data(self):
        return {
            "nodes": ["1"],
            "arrows": [
                {"id": "X", "from": "1", "to": "1"},
                {"id": "Y", "from": "1", "to": "1"},
                {"id": "Z", "from": "1", "to": "1"},
            ],
            "W": [
                {"sign": 1, "word": ["X", "Y", "Z"]},
                {"sign": -1, "word": ["X", "Z", "Y"]},
            ],
        }

    def test_from_dict(self):
        """Test creating Quiver from JSON data."""
        q = Quiver.from_dict(self._data())

        assert q.n_nodes == 1
        assert q.n_arrows == 3
        assert q.n_terms == 2
        assert q.arrow("Y").is_loop

    def test_to_dict_round_trip(self):
        q = Quiver.from_dict(self._data())
        assert Quiver.from_dict(q.to_dict()).to_dict() == q.to_dict()

    def test_duplicate_arrow(self):
        data = self._data()
        data["arrows"].append({"id": "X", "from": "1", "to": "1"})
        with pytest.raises(StructureError, match="Duplicate arrow"):
            Quiver.from_dict(data)

    def test_unknown_node(self):
        data = self._data()
        data["arrows"][0]["to"] = "9"
        with pytest.raises(StructureError):
            Quiver.from_dict(data)

    def test_unknown_arrow_in_term(self):
        data = self._data()
        data["W"].append({"sign": 1, "word": ["Q"]})
        with pytest.raises(StructureError, match="unknown arrow"):
            Quiver.from_dict(data)

    def test_missing_sections(self):
        with pytest.raises(StructureError):
            Quiver.from_dict({"nodes": ["1"]})

    def test_occurrences(self):
        q = Quiver.from_dict(self._data())
        assert q.occurrences("X") == [0, 1]


class TestCombinatorialMap:
    """Tests for CombinatorialMap model."""

    def _honeycomb(self):
        return CombinatorialMap(
            edges=["X", "Y", "Z"],
            sigma_black=[("X", "Y", "Z")],
            sigma_white=[("Y", "Z", "X")],
        )

    def test_permutations(self):
        m = self._honeycomb()

        assert m.sb("X") == "Y"
        assert m.sw("X") == "Y"
        assert m.sb_inv("X") == "Z"
        assert m.phi("X") == "Z"

    def test_faces(self):
        """Test the honeycomb has a single hexagonal face."""
        m = self._honeycomb()

        assert m.faces() == [("X", "Z", "Y")]
        assert m.face_lengths() == [6]
        assert sorted(m.face_boundary(m.faces()[0])) == ["X", "X", "Y", "Y", "Z", "Z"]

    def test_node_valences(self):
        assert self._honeycomb().node_valences() == ([3], [3])

    def test_missing_edge(self):
        """Test that sigma must cover every edge once."""
        with pytest.raises(StructureError, match="not a permutation"):
            CombinatorialMap(edges=["a", "b"], sigma_black=[("a",)], sigma_white=[("a", "b")])

    def test_disconnected(self):
        m = CombinatorialMap(edges=["a", "b"], sigma_black=[("a",), ("b",)], sigma_white=[("a",), ("b",)])
        assert not m.is_connected()

    def test_relabeled(self):
        m = self._honeycomb().relabeled({"X": "1", "Y": "2", "Z": "3"})
        assert m.sigma_black == [("1", "2", "3")]

    def test_dict_round_trip(self):
        m = self._honeycomb()
        assert CombinatorialMap.from_dict(m.to_dict()).to_dict() == m.to_dict()


class TestHomologyWeights:
    """Tests for HomologyWeights model."""

    def test_face_sum(self):
        m = CombinatorialMap(edges=["X", "Y", "Z"], sigma_black=[("X", "Y", "Z")], sigma_white=[("Y", "Z", "X")])
        h = HomologyWeights({"X": (0, 0), "Y": (1, 0), "Z": (0, 1)})

        assert h.face_sum(m, m.faces()[0]) == (0, 0)

    def test_from_dict(self):
        h = HomologyWeights.from_dict({"a": [1, -1]})
        assert h["a"] == (1, -1)
        assert h.to_dict() == {"a": [1, -1]}


class TestValidationReport:
    """Tests for ValidationReport."""

    def test_passed(self):
        report = ValidationReport()
        report.add("one", True)
        report.add("two", False, "broken")

        assert not report.passed
        assert report.check("two").message == "broken"
        assert "two: FAIL" in report.summary()

    def test_unknown_check(self):
        with pytest.raises(KeyError):
            ValidationReport().check("missing")


class TestToricDiagram:
    """Tests for ToricDiagram."""

    def test_normalized(self):
        D = ToricDiagram({(-1, -1): 1, (0, 0): 6})
        assert D.normalized().points == {(0, 0): 1, (1, 1): 6}

    def test_from_points_counts(self):
        D = ToricDiagram.from_points([(0, 0), (0, 0), (1, 0)])
        assert D.points == {(0, 0): 2, (1, 0): 1}

    def test_text_round_trip(self):
        D = ToricDiagram({(0, 0): 1, (1, 1): 6, (2, 0): 1})
        text = D.to_text()

        assert text.splitlines()[0] == "0 0 1"
        assert ToricDiagram.from_text(text) == D

    def test_from_text_rejects_bad_lines(self):
        with pytest.raises(StructureError, match="Line 2"):
            ToricDiagram.from_text("0 0 1\n1 1\n")

    def test_non_positive_multiplicity(self):
        with pytest.raises(StructureError):
            ToricDiagram({(0, 0): 0})

    def test_dict_round_trip(self):
        D = ToricDiagram({(0, 0): 1, (1, 0): 2})
        assert ToricDiagram.from_dict(D.to_dict()) == D
