"""
Unit tests for the fixture catalog.
"""

import pytest
from src.core import validate_quiver
from src.fixtures import FIXTURES, fixture_names, get_fixture, UnknownFixtureError
from src.kasteleyn import toric_diagram
from src.laurent import LaurentPoly2
from src.models import ToricDiagram


class TestFixtures:
    """Tests for built-in fixtures."""

    def test_names(self):
        assert fixture_names() == ["c3", "c3z3", "conifold", "f0-I", "f0-II", "dp3"]

    @pytest.mark.parametrize("name", [n for n in FIXTURES if n != "dp3"])
    def test_quiver_fixtures_are_valid(self, name):
        fixture = get_fixture(name)

        assert fixture.has_quiver
        assert validate_quiver(fixture.quiver).passed

    def test_dp3_is_a_tiling(self):
        fixture = get_fixture("dp3")

        assert not fixture.has_quiver
        assert fixture.tiling.n_edges == 12
        assert set(fixture.signs) == set(fixture.tiling.edges)
        assert set(fixture.weights.weights) == set(fixture.tiling.edges)

    def test_fresh_instances(self):
        """Each call builds a new fixture that callers may modify."""
        a = get_fixture("c3")
        a.expected["J"] = 5.0
        assert get_fixture("c3").expected["J"] == 0.0

    def test_unknown(self):
        with pytest.raises(UnknownFixtureError, match="Available"):
            get_fixture("dp9")


class TestExpectedValues:
    """Recorded expected values agree with the structure they describe."""

    @pytest.mark.parametrize("name", ["c3", "f0-I", "f0-II"])
    def test_r_charges_marginal(self, name):
        fixture = get_fixture(name)
        R = fixture.expected["R"]

        for term in fixture.quiver.superpotential:
            assert sum(R[a] for a in term.word) == 2

    @pytest.mark.parametrize("name", ["c3", "f0-I", "f0-II"])
    def test_r_charges_anomaly_free(self, name):
        """Each node sees total 1 - R equal to 2 over its incident arrow ends."""
        fixture = get_fixture(name)
        R = fixture.expected["R"]

        for node in fixture.quiver.nodes:
            ends = fixture.quiver.incoming(node) + fixture.quiver.outgoing(node)
            assert sum(1 - R[a.id] for a in ends) == 2

    def test_dp3_det_matches_diagram(self):
        expected = get_fixture("dp3").expected
        diagram = toric_diagram(LaurentPoly2.parse(expected["det"]))

        assert diagram == ToricDiagram(expected["diagram"])
