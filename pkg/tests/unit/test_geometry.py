"""
Unit tests for R-charges, a-maximization and the isoradial embedding.
"""

import cmath
import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from sympy import Rational

from src.core import quiver_to_map
from src.fixtures import get_fixture
from src.geometry import (
    rcharge_constraints, maximize_a, a_function, angle_defects, edge_directions,
    isoradial_periods, tau_reduce, eisenstein_e4_e6, klein_j, modular_data,
    InfeasibleError, ConvergenceError, ConsistencyError, PrecisionError,
)
from src.models import CombinatorialMap
from src.utils import OptimizerConfig


FAST = OptimizerConfig(starts=6)


def _map(name: str) -> CombinatorialMap:
    return quiver_to_map(get_fixture(name).quiver)


def _exact(name: str):
    return {e: float(v) for e, v in get_fixture(name).expected["R"].items()}


class TestConstraints:
    """Tests for the exact R-charge linear system."""

    @pytest.mark.parametrize("name,dimension", [
        ("c3", 2), ("c3z3", 2), ("conifold", 3), ("f0-I", 3), ("f0-II", 3),
    ])
    def test_nullity(self, name, dimension):
        """Solution space dimension is one less than the number of diagram corners."""
        assert rcharge_constraints(_map(name)).dimension == dimension

    def test_rank_counts_independent_equations(self):
        """F0 phase II has nine independent equations among its twelve node and face rows."""
        assert rcharge_constraints(_map("f0-I")).rank == 5
        assert rcharge_constraints(_map("f0-II")).rank == 9
        assert rcharge_constraints(_map("f0-II")).A.rows == 12

    def test_honeycomb_particular(self):
        constraints = rcharge_constraints(_map("c3"))

        assert constraints.particular == [Rational(2, 3)] * 3
        assert constraints.rank == 1
        assert constraints.row_labels == ["black 0", "white 0", "face 0"]

    def test_residual(self):
        constraints = rcharge_constraints(_map("f0-I"))
        assert constraints.residual(np.full(8, 0.5)) < 1e-12
        assert constraints.residual(np.full(8, 0.6)) > 0.1

    def test_unbalanced_map_infeasible(self):
        m = CombinatorialMap(
            edges=["a", "b", "c", "d"],
            sigma_black=[("a", "b", "c", "d")],
            sigma_white=[("a", "c"), ("b", "d")],
        )
        with pytest.raises(InfeasibleError):
            rcharge_constraints(m)


class TestMaximizeA:
    """Tests for multi-start a-maximization."""

    def test_a_function(self):
        assert a_function(np.array([0.5, 0.5])) == pytest.approx(-0.25)

    @pytest.mark.parametrize("name", ["c3", "f0-I", "f0-II"])
    def test_expected_charges(self, name):
        result = maximize_a(_map(name), FAST)
        for edge, value in get_fixture(name).expected["R"].items():
            assert result[edge] == pytest.approx(float(value), abs=1e-6)

    def test_unique_and_converged(self):
        result = maximize_a(_map("f0-I"), FAST)

        assert result.unique
        assert result.total_runs == 6
        assert 1 <= result.converged_runs <= 6
        assert result.to_dict()["R"]["X12_1"] == pytest.approx(0.5, abs=1e-6)

    def test_seed_reproducible(self):
        a = maximize_a(_map("f0-II"), OptimizerConfig(seed=11, starts=3))
        b = maximize_a(_map("f0-II"), OptimizerConfig(seed=11, starts=3))
        assert a.values == b.values

    def test_theta(self):
        result = maximize_a(_map("c3"), FAST)
        assert result.theta["X"] == pytest.approx(math.pi / 3, abs=1e-6)

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError):
            maximize_a(_map("f0-I"), OptimizerConfig(starts=2, max_iterations=1))

    @pytest.mark.parametrize("name", ["c3", "f0-I", "f0-II"])
    def test_default_settings_converge_quickly(self, name):
        """All default starts finish well inside the time budget and meet the gradient tolerance."""
        started = time.perf_counter()
        result = maximize_a(_map(name))
        elapsed = time.perf_counter() - started

        assert elapsed < 5.0
        assert result.total_runs == 32
        assert result.converged_runs >= 1
        assert result.unique
        for edge, value in get_fixture(name).expected["R"].items():
            assert result[edge] == pytest.approx(float(value), abs=1e-8)


class TestEmbedding:
    """Tests for angle sums, edge directions and periods."""

    @pytest.mark.parametrize("name", ["c3", "f0-I", "f0-II"])
    def test_angle_sums(self, name):
        defects = angle_defects(_map(name), _exact(name))
        assert defects["nodes"] < 1e-12
        assert defects["faces"] < 1e-12

    def test_angle_sums_detect_bad_charges(self):
        m = _map("c3")
        assert angle_defects(m, {"X": 0.5, "Y": 0.5, "Z": 0.5})["nodes"] > 0.1

    def test_honeycomb_directions(self):
        """Edges at a trivalent node are 120 degrees apart."""
        alpha = edge_directions(_map("c3"), _exact("c3"))
        gaps = sorted(abs(cmath.phase(cmath.exp(1j * (alpha[a] - alpha[b])))) for a, b in (("X", "Y"), ("Y", "Z")))
        assert gaps == pytest.approx([2 * math.pi / 3] * 2, abs=1e-9)

    def test_periods_orientation(self):
        omega1, omega2 = isoradial_periods(_map("f0-I"), _exact("f0-I"))
        assert (omega2 / omega1).imag > 0

    def test_inconsistent_charges(self):
        with pytest.raises(ConsistencyError):
            isoradial_periods(_map("c3"), {"X": 0.5, "Y": 0.5, "Z": 0.5})


class TestModular:
    """Tests for tau reduction and the Klein invariant."""

    def test_tau_reduce_fixed_point(self):
        assert tau_reduce(2j) == 2j

    def test_tau_reduce_domain(self):
        for tau in (1 + 1j, 0.1 + 0.05j, -3.7 + 0.2j, 0.45 + 0.3j):
            reduced = tau_reduce(tau)
            assert abs(reduced.real) <= 0.5 + 1e-12
            assert abs(reduced) >= 1 - 1e-9

    def test_tau_reduce_translation(self):
        assert tau_reduce(1 + 1j) == pytest.approx(1j)

    def test_tau_reduce_lower_half_plane(self):
        with pytest.raises(ValueError):
            tau_reduce(1 - 1j)

    def test_eisenstein_at_i(self):
        """E6 vanishes at tau = i."""
        _, e6 = eisenstein_e4_e6(1j)
        assert abs(e6) < 1e-10

    def test_known_values(self):
        j, J = klein_j(1j)
        assert J == pytest.approx(1.0, abs=1e-10)
        assert klein_j(2j)[0].real == pytest.approx(287496.0, rel=1e-9)
        assert abs(klein_j(cmath.exp(2j * math.pi / 3))[1]) < 1e-9

    def test_against_mpmath(self):
        tau = 0.3 + 1.1j
        expected = complex(mpmath.kleinj(tau))
        _, J = klein_j(tau)
        assert abs(J - expected) < 1e-8 * max(1.0, abs(expected))

    def test_modular_invariance(self):
        tau = 0.2 + 0.7j
        assert klein_j(tau)[1] == pytest.approx(klein_j(-1 / tau)[1], rel=1e-9)

    def test_short_series_rejected(self):
        with pytest.raises(PrecisionError):
            klein_j(1j, terms=1)


class TestModularData:
    """Tests for the end-to-end tiling to J computation."""

    def test_honeycomb_is_hexagonal(self):
        data = modular_data(_map("c3"), _exact("c3"))

        assert abs(abs(data.tau_reduced) - 1) < 1e-6
        assert abs(abs(data.tau_reduced.real) - 0.5) < 1e-6
        assert abs(data.J) < 1e-6

    @pytest.mark.parametrize("name", ["f0-I", "f0-II"])
    def test_f0_is_square(self, name):
        data = modular_data(_map(name), _exact(name))
        assert data.J.real == pytest.approx(1.0, abs=1e-6)
        assert abs(data.J.imag) < 1e-6

    def test_to_dict(self):
        data = modular_data(_map("f0-I"), _exact("f0-I")).to_dict()
        assert set(data) == {"omega1", "omega2", "tau", "tau_reduced", "j", "J"}
        assert len(data["J"]) == 2

    def test_exact_fractions_accepted(self):
        R = {e: Fraction(v) for e, v in get_fixture("f0-I").expected["R"].items()}
        data = modular_data(_map("f0-I"), R)
        assert data.J.real == pytest.approx(1.0, abs=1e-6)
