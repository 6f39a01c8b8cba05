"""
TilingForge - Fixture Catalog

Built-in quivers and tilings: C^3, C^3/Z_3, the conifold, the two toric
phases of F0 and the dP3 tiling.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from .models import Arrow, CombinatorialMap, HomologyWeights, Quiver, Term, TilingForgeError


logger = logging.getLogger(__name__)


class UnknownFixtureError(TilingForgeError):
    """Raised when a fixture name is not in the catalog."""
    pass


@dataclass
class Fixture:
    """
    A named input with the values it is expected to produce.

    Quiver fixtures carry a quiver; the dp3 fixture carries a map together
    with its published Kasteleyn signs and homology weights.
    """
    name: str
    description: str
    quiver: Optional[Quiver] = None
    tiling: Optional[CombinatorialMap] = None
    signs: Optional[Dict[str, int]] = None
    weights: Optional[HomologyWeights] = None
    expected: Dict[str, Any] = field(default_factory=dict)

    @property
    def has_quiver(self) -> bool:
        return self.quiver is not None


def _arrows(spec: List[Tuple[str, str, str]]) -> List[Arrow]:
    return [Arrow(id=i, source=s, target=t) for i, s, t in spec]


def _terms(spec: List[Tuple[int, str]]) -> List[Term]:
    return [Term(sign=s, word=tuple(w.split())) for s, w in spec]


def c3() -> Fixture:
    # W = Tr(XYZ - XZY)
    q = Quiver(
        nodes=["1"],
        arrows=_arrows([("X", "1", "1"), ("Y", "1", "1"), ("Z", "1", "1")]),
        superpotential=_terms([(1, "X Y Z"), (-1, "X Z Y")]),
    )
    return Fixture(
        name="c3",
        description="C^3: one node, three loops, hexagonal tiling",
        quiver=q,
        # honeycomb: unit triangle, R = 2/3 by symmetry, tau = exp(2 pi i / 3) so J = 0
        expected={
            "diagram": {(0, 0): 1, (1, 0): 1, (0, 1): 1},
            "passport": ((3,), (3,), (3,)),
            "R": {"X": Fraction(2, 3), "Y": Fraction(2, 3), "Z": Fraction(2, 3)},
            "J": 0.0,
        },
    )


def c3z3() -> Fixture:
    # W = sum over epsilon_{abc} X12_a X23_b X31_c
    arrows = []
    for a in "123":
        arrows += [(f"X12_{a}", "1", "2"), (f"X23_{a}", "2", "3"), (f"X31_{a}", "3", "1")]
    terms = []
    for (a, b, c), sign in (
        (("1", "2", "3"), 1), (("2", "3", "1"), 1), (("3", "1", "2"), 1),
        (("1", "3", "2"), -1), (("3", "2", "1"), -1), (("2", "1", "3"), -1),
    ):
        terms.append((sign, f"X12_{a} X23_{b} X31_{c}"))
    q = Quiver(nodes=["1", "2", "3"], arrows=_arrows(arrows), superpotential=_terms(terms))
    return Fixture(
        name="c3z3",
        description="C^3/Z_3: three nodes, nine arrows",
        quiver=q,
        # triple cover of the honeycomb, so the torus and J = 0 carry over
        expected={"passport": ((3, 3, 3), (3, 3, 3), (3, 3, 3)), "J": 0.0},
    )


def conifold() -> Fixture:
    q = Quiver(
        nodes=["1", "2"],
        arrows=_arrows([("A1", "1", "2"), ("A2", "1", "2"), ("B1", "2", "1"), ("B2", "2", "1")]),
        superpotential=_terms([(1, "A1 B1 A2 B2"), (-1, "A1 B2 A2 B1")]),
    )
    return Fixture(
        name="conifold",
        description="Conifold: two nodes, square tiling",
        quiver=q,
        # unit square; Hilbert series (1 - t^2) / (1 - t)^4 with PL = 4t - t^2
        expected={
            "diagram": {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1},
            "passport": ((4,), (4,), (2, 2)),
            "hilbert": ([1, 0, -1], [1, -4, 6, -4, 1]),
            "pl": {1: 4, 2: -1},
        },
    )


def f0_phase_one() -> Fixture:
    arrows = []
    for s, t in (("1", "2"), ("2", "3"), ("3", "4"), ("4", "1")):
        for k in "12":
            arrows.append((f"X{s}{t}_{k}", s, t))
    q = Quiver(
        nodes=["1", "2", "3", "4"],
        arrows=_arrows(arrows),
        superpotential=_terms([
            (1, "X12_1 X23_1 X34_2 X41_2"),
            (-1, "X12_1 X23_2 X34_2 X41_1"),
            (-1, "X12_2 X23_1 X34_1 X41_2"),
            (1, "X12_2 X23_2 X34_1 X41_1"),
        ]),
    )
    return Fixture(
        name="f0-I",
        description="F0 phase I: four nodes, eight arrows, quartic terms",
        quiver=q,
        # square torus (tau = i, J = 1); R = 1/2 from the Z_2 x Z_2 symmetry of the quiver
        expected={
            "passport": ((4, 4), (4, 4), (2, 2, 2, 2)),
            "R": {a.id: Fraction(1, 2) for a in q.arrows},
            "J": 1.0,
            "dual_node": "1",
        },
    )


def f0_phase_two() -> Fixture:
    arrows = [
        ("X21_1", "2", "1"), ("X21_2", "2", "1"),
        ("X14_1", "1", "4"), ("X14_2", "1", "4"),
        ("X23_1", "2", "3"), ("X23_2", "2", "3"),
        ("X34_1", "3", "4"), ("X34_2", "3", "4"),
    ]
    arrows += [(f"X42_{i}{j}", "4", "2") for i in "12" for j in "12"]
    q = Quiver(
        nodes=["1", "2", "3", "4"],
        arrows=_arrows(arrows),
        superpotential=_terms([
            (1, "X42_21 X23_1 X34_2"),
            (1, "X42_12 X23_2 X34_1"),
            (1, "X42_11 X21_1 X14_1"),
            (1, "X42_22 X21_2 X14_2"),
            (-1, "X42_11 X23_2 X34_2"),
            (-1, "X42_22 X23_1 X34_1"),
            (-1, "X42_21 X21_1 X14_2"),
            (-1, "X42_12 X21_2 X14_1"),
        ]),
    )
    expected_r = {a.id: Fraction(1, 2) for a in q.arrows}
    expected_r.update({a.id: Fraction(1) for a in q.arrows if a.id.startswith("X42")})
    return Fixture(
        name="f0-II",
        description="F0 phase II: Seiberg dual of phase I at node 1",
        quiver=q,
        # mesons X42 carry R = 1/2 + 1/2; J is a duality invariant
        expected={
            "passport": ((3, 3, 3, 3), (3, 3, 3, 3), (2, 2, 4, 4)),
            "R": expected_r,
            "J": 1.0,
        },
    )


def dp3() -> Fixture:
    m = CombinatorialMap(
        edges=[f"e{i}" for i in range(1, 13)],
        sigma_black=[
            ("e2", "e7", "e1", "e10"),
            ("e8", "e4", "e11", "e3"),
            ("e12", "e6", "e9", "e5"),
        ],
        sigma_white=[
            ("e1", "e3", "e5", "e2", "e4", "e6"),
            ("e9", "e8", "e7"),
            ("e11", "e10", "e12"),
        ],
    )
    signs = {e: 1 for e in m.edges}
    signs.update({e: -1 for e in ("e4", "e8", "e9", "e10", "e11")})
    weights = {e: (0, 0) for e in m.edges}
    weights.update({"e2": (0, 1), "e4": (1, 1), "e6": (1, 0), "e9": (0, -1), "e10": (-1, 0)})
    return Fixture(
        name="dp3",
        description="dP3: hexagon with six-fold interior point",
        tiling=m,
        signs=signs,
        weights=HomologyWeights(weights),
        # det expanded by hand from the signs and weights above; the six interior matchings give -6
        expected={
            "det": "z^-1*w^-1 - w^-1 - z^-1 - 6 - z - w + z*w",
            "diagram": {
                (0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 2): 1, (2, 1): 1, (2, 2): 1, (1, 1): 6,
            },
        },
    )


FIXTURES: Dict[str, Callable[[], Fixture]] = {
    "c3": c3,
    "c3z3": c3z3,
    "conifold": conifold,
    "f0-I": f0_phase_one,
    "f0-II": f0_phase_two,
    "dp3": dp3,
}


def fixture_names() -> List[str]:
    return list(FIXTURES)


def get_fixture(name: str) -> Fixture:
    """Build a catalog fixture by name."""
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise UnknownFixtureError(f"Unknown fixture '{name}'. Available: {', '.join(FIXTURES)}")
    fixture = builder()
    logger.debug(f"Loaded fixture {fixture.name}")
    return fixture


def single_edge_map() -> CombinatorialMap:
    """One black node, one white node, one edge: a sphere."""
    return CombinatorialMap(edges=["e"], sigma_black=[("e",)], sigma_white=[("e",)])
