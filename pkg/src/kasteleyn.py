"""
TilingForge - Kasteleyn Matrices

Kasteleyn signs, weighted adjacency matrices, exact determinants, toric
diagrams, perfect matchings and lattice polygon normal forms.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull
from sympy import gcdex

from .core import genus, GenusError
from .laurent import LaurentPoly2
from .models import CombinatorialMap, HomologyWeights, Point, StructureError, TilingForgeError, ToricDiagram


logger = logging.getLogger(__name__)


class NoSolutionError(TilingForgeError):
    """Raised when the Kasteleyn parity system is inconsistent."""
    pass


class DimensionError(TilingForgeError):
    """Raised when the Kasteleyn matrix would not be square and nonempty."""
    pass


class ZeroPolynomialError(TilingForgeError):
    """Raised when a polynomial or diagram is unexpectedly empty."""
    pass


class ArityError(TilingForgeError):
    """Raised when coefficient and point counts differ."""
    pass


class NoMatchingError(TilingForgeError):
    """Raised when a map has no perfect matching."""
    pass


# =============================================================================
# Signs
# =============================================================================

def kasteleyn_signs(
    m: CombinatorialMap,
    rng: Optional[np.random.Generator] = None,
) -> Dict[str, int]:
    """
    Solve for edge signs over GF(2).

    For a face with E boundary incidences the product of signs must be +1
    when E = 2 (mod 4) and -1 when E = 0 (mod 4). Free variables are 0
    unless an rng is given, in which case they are drawn at random.
    """
    g = genus(m)
    if g != 1:
        raise GenusError(f"Map has genus {g}, expected 1")

    col = {e: j for j, e in enumerate(m.edges)}
    faces = m.faces()
    n = m.n_edges
    system = np.zeros((len(faces), n + 1), dtype=np.uint8)
    for i, face in enumerate(faces):
        for e in m.face_boundary(face):
            system[i, col[e]] ^= 1
        # E = 2 * len(face); E = 0 (mod 4) needs an odd number of minus signs
        system[i, n] = 1 if len(face) % 2 == 0 else 0

    pivots = []
    row = 0
    for c in range(n):
        hits = np.nonzero(system[row:, c])[0]
        if hits.size == 0:
            continue
        pivot = row + hits[0]
        system[[row, pivot]] = system[[pivot, row]]
        for r in range(system.shape[0]):
            if r != row and system[r, c]:
                system[r] ^= system[row]
        pivots.append(c)
        row += 1
        if row == system.shape[0]:
            break

    if np.any((system[:, :n].sum(axis=1) == 0) & (system[:, n] == 1)):
        raise NoSolutionError("Kasteleyn parity system is inconsistent")

    free = [c for c in range(n) if c not in pivots]
    bits = np.zeros(n, dtype=np.uint8)
    if rng is not None and free:
        bits[free] = rng.integers(0, 2, size=len(free), dtype=np.uint8)
    # reduced echelon form: pivot rows only touch free columns besides their own
    coeffs = system[:, :n].astype(np.int64)
    for r, c in enumerate(pivots):
        rest = int(coeffs[r] @ bits.astype(np.int64)) - int(coeffs[r, c]) * int(bits[c])
        bits[c] = (int(system[r, n]) + rest) % 2

    signs = {e: -1 if bits[col[e]] else 1 for e in m.edges}
    logger.debug(f"Kasteleyn signs: {sum(1 for s in signs.values() if s < 0)} negative edges")
    return signs


def face_sign_products(m: CombinatorialMap, signs: Dict[str, int]) -> List[Tuple[int, int]]:
    """(E, product of signs) for every face."""
    result = []
    for face in m.faces():
        product = 1
        for e in m.face_boundary(face):
            product *= signs[e]
        result.append((2 * len(face), product))
    return result


# =============================================================================
# Matrix and determinant
# =============================================================================

@dataclass
class KasteleynMatrix:
    """Rows are white nodes, columns are black nodes."""
    entries: List[List[LaurentPoly2]]

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: Tuple[int, int]) -> LaurentPoly2:
        i, j = index
        return self.entries[i][j]

    def monomial_count(self) -> int:
        return sum(len(p) for row in self.entries for p in row)

    def permuted(self, rows: Sequence[int], cols: Sequence[int]) -> "KasteleynMatrix":
        return KasteleynMatrix([[self.entries[i][j] for j in cols] for i in rows])

    def to_text(self) -> List[List[str]]:
        return [[str(p) for p in row] for row in self.entries]


def kasteleyn_matrix(
    m: CombinatorialMap,
    signs: Dict[str, int],
    weights: Union[HomologyWeights, Dict[str, Tuple[int, int]]],
) -> KasteleynMatrix:
    """Signed, homology-weighted white-by-black adjacency matrix."""
    if m.n_edges == 0 or m.n_black == 0:
        raise DimensionError("Map has no nodes")
    if m.n_black != m.n_white:
        raise DimensionError(
            f"Kasteleyn matrix needs #black = #white, got {m.n_black} and {m.n_white}"
        )

    size = m.n_black
    entries = [[LaurentPoly2.zero() for _ in range(size)] for _ in range(size)]
    for e in m.edges:
        hz, hw = weights[e]
        i, j = m.white_node(e), m.black_node(e)
        entries[i][j] = entries[i][j] + LaurentPoly2.monomial(hz, hw, signs[e])
    return KasteleynMatrix(entries)


def laurent_det(K: Union[KasteleynMatrix, Sequence[Sequence[LaurentPoly2]]]) -> LaurentPoly2:
    """Exact determinant by memoized cofactor expansion along rows."""
    rows = K.entries if isinstance(K, KasteleynMatrix) else [list(r) for r in K]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise DimensionError("Determinant needs a square matrix")
    if n == 0:
        return LaurentPoly2.one()

    @lru_cache(maxsize=None)
    def minor(r: int, mask: int) -> LaurentPoly2:
        if r == n:
            return LaurentPoly2.one()
        total = LaurentPoly2.zero()
        position = 0
        for c in range(n):
            if not mask & (1 << c):
                continue
            entry = rows[r][c]
            if entry:
                term = entry * minor(r + 1, mask & ~(1 << c))
                total = total + (term if position % 2 == 0 else -term)
            position += 1
        return total

    return minor(0, (1 << n) - 1)


def toric_diagram(P: LaurentPoly2) -> ToricDiagram:
    """Support of P translated to minimal exponents zero, |coeff| as multiplicity."""
    if P.is_zero():
        raise ZeroPolynomialError("Toric diagram of the zero polynomial")
    return ToricDiagram({p: abs(c) for p, c in P.terms.items()}).normalized()


# =============================================================================
# Perfect matchings
# =============================================================================

@dataclass
class Matching:
    """Perfect matching annotated with its relative lattice point."""
    edges: Tuple[str, ...]
    point: Point


@dataclass
class MatchingSet:
    """All perfect matchings of a map."""
    matchings: List[Matching] = field(default_factory=list)
    reference: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.matchings)

    def multiplicities(self) -> Dict[Point, int]:
        counts: Dict[Point, int] = {}
        for mt in self.matchings:
            counts[mt.point] = counts.get(mt.point, 0) + 1
        return counts

    def to_diagram(self) -> ToricDiagram:
        """Multiplicity map translated to minimal coordinates zero."""
        return ToricDiagram(self.multiplicities()).normalized()


def _check_matching(m: CombinatorialMap, edges: Sequence[str]) -> Tuple[str, ...]:
    """Return edges as a tuple if they cover every node exactly once."""
    known = set(m.edges)
    unknown = [e for e in edges if e not in known]
    if unknown:
        raise StructureError(f"Reference matching has unknown edges: {', '.join(unknown)}")
    blacks = sorted(m.black_node(e) for e in edges)
    whites = sorted(m.white_node(e) for e in edges)
    if blacks != list(range(m.n_black)) or whites != list(range(m.n_white)):
        raise StructureError("Reference is not a perfect matching")
    return tuple(edges)


def enumerate_matchings(
    m: CombinatorialMap,
    weights: Union[HomologyWeights, Dict[str, Tuple[int, int]]],
    reference: Union[str, Sequence[str]] = "auto",
) -> MatchingSet:
    """
    Exhaustively enumerate perfect matchings.

    Black nodes are matched in index order, trying their edges in clockwise
    order. Each matching gets the lattice point sum h(M) - sum h(M0) for the
    reference matching M0 (the first one found when reference is "auto").
    """
    g = genus(m)
    if g != 1:
        raise GenusError(f"Map has genus {g}, expected 1")
    if m.n_black != m.n_white:
        raise DimensionError(f"#black = {m.n_black} but #white = {m.n_white}")

    found: List[Tuple[str, ...]] = []
    chosen: List[str] = []
    used_white = set()

    def recurse(b: int) -> None:
        if b == m.n_black:
            found.append(tuple(chosen))
            return
        for e in m.sigma_black[b]:
            w = m.white_node(e)
            if w in used_white:
                continue
            used_white.add(w)
            chosen.append(e)
            recurse(b + 1)
            chosen.pop()
            used_white.discard(w)

    recurse(0)
    if not found:
        raise NoMatchingError("Map has no perfect matching")

    def height(edges: Sequence[str]) -> Point:
        return (sum(weights[e][0] for e in edges), sum(weights[e][1] for e in edges))

    ref = found[0] if reference == "auto" else _check_matching(m, reference)
    rz, rw = height(ref)
    matchings = []
    for edges in found:
        hz, hw = height(edges)
        matchings.append(Matching(edges=edges, point=(hz - rz, hw - rw)))
    matchings.sort(key=lambda mt: (mt.point, mt.edges))

    logger.debug(f"Enumerated {len(matchings)} perfect matchings")
    return MatchingSet(matchings=matchings, reference=ref)


# =============================================================================
# Polygons
# =============================================================================

def _hull_vertices(points: np.ndarray) -> List[int]:
    """Indices of strict convex hull vertices in counter-clockwise order."""
    hull = ConvexHull(points)
    order = list(hull.vertices)
    strict = []
    for k, idx in enumerate(order):
        prev_p = points[order[k - 1]]
        next_p = points[order[(k + 1) % len(order)]]
        a, b = points[idx] - prev_p, next_p - points[idx]
        if a[0] * b[1] - a[1] * b[0] != 0:
            strict.append(idx)
    return strict


def _is_collinear(points: np.ndarray) -> bool:
    return np.linalg.matrix_rank(points - points[0]) < 2


def _primitive(dx: int, dy: int) -> Tuple[int, int]:
    g = gcd(dx, dy)
    return dx // g, dy // g


def _to_x_axis(dx: int, dy: int) -> np.ndarray:
    """Unimodular matrix sending the primitive vector (dx, dy) to (1, 0)."""
    p, q, _ = gcdex(dx, dy)
    return np.array([[int(p), int(q)], [-dy, dx]], dtype=np.int64)


def _sorted_key(coords: np.ndarray, mults: Sequence[int]) -> Tuple[Tuple[Point, int], ...]:
    shifted = coords - coords.min(axis=0)
    return tuple(sorted(((int(x), int(y)), int(mult)) for (x, y), mult in zip(shifted, mults)))


def _candidates(coords: np.ndarray, mults: Sequence[int]) -> List[Tuple[Tuple[Point, int], ...]]:
    """Edge-anchored normal positions for one orientation of the polygon."""
    result = []
    hull = _hull_vertices(coords.astype(float))
    k = len(hull)
    for i in range(k):
        v = coords[hull[i]]
        nxt = coords[hull[(i + 1) % k]]
        prev = coords[hull[i - 1]]
        dx, dy = _primitive(int(nxt[0] - v[0]), int(nxt[1] - v[1]))
        M = _to_x_axis(dx, dy)
        moved = (coords - v) @ M.T
        ux, uy = (M @ (prev - v)).tolist()
        # shear (x, y) -> (x + s*y, y) so that prev has x in [0, uy)
        s = -(ux // uy)
        sheared = moved.copy()
        sheared[:, 0] += s * moved[:, 1]
        result.append(_sorted_key(sheared, mults))
    return result


def canonical_polygon(D: ToricDiagram) -> ToricDiagram:
    """
    Normal form of a diagram under GL(2,Z) and translations.

    Every hull edge of the diagram and of its mirror image is moved onto the
    positive x-axis with the polygon above it, the remaining shear is fixed
    by the preceding hull vertex, and the lexicographically smallest sorted
    (point, multiplicity) list wins. The candidate set is the same for every
    member of an orbit, so the result is canonical and idempotent.
    """
    if not D.points:
        raise ZeroPolynomialError("Canonical form of an empty diagram")

    items = D.sorted_items()
    coords = np.array([p for p, _ in items], dtype=np.int64)
    mults = [mult for _, mult in items]

    if len(items) == 1:
        return ToricDiagram({(0, 0): mults[0]})

    mirror = coords * np.array([1, -1], dtype=np.int64)

    if _is_collinear(coords.astype(float)):
        dx, dy = _primitive(int(coords[-1][0] - coords[0][0]), int(coords[-1][1] - coords[0][1]))
        moved = (coords - coords[0]) @ _to_x_axis(dx, dy).T
        candidates = [_sorted_key(moved, mults), _sorted_key(moved * np.array([-1, 1]), mults)]
    else:
        candidates = _candidates(coords, mults) + _candidates(mirror, mults)

    best = min(candidates)
    return ToricDiagram(dict(best))


def boundary_points(D: ToricDiagram) -> List[Point]:
    """Points on the boundary of the convex hull."""
    pts = D.support()
    if len(pts) < 3 or _is_collinear(np.array(pts, dtype=float)):
        return pts
    hull = ConvexHull(np.array(pts, dtype=float))
    result = []
    for p in pts:
        values = hull.equations[:, :2] @ np.array(p, dtype=float) + hull.equations[:, 2]
        if np.any(np.abs(values) < 1e-9):
            result.append(p)
    return result


def interior_points(D: ToricDiagram) -> List[Point]:
    boundary = set(boundary_points(D))
    return [p for p in D.support() if p not in boundary]


def newton_polynomial(D: ToricDiagram, coeffs: Optional[Sequence[int]] = None) -> LaurentPoly2:
    """
    Sum of coeff * z^a * w^b over the diagram's points.

    Coefficients default to the multiplicities; explicit coefficients follow
    the sorted point order.
    """
    if not D.points:
        raise ZeroPolynomialError("Newton polynomial of an empty diagram")
    items = D.sorted_items()
    if coeffs is None:
        coeffs = [mult for _, mult in items]
    elif len(coeffs) != len(items):
        raise ArityError(f"Got {len(coeffs)} coefficients for {len(items)} points")
    return LaurentPoly2({p: c for (p, _), c in zip(items, coeffs)})


def mirror_equation(D: ToricDiagram, coeffs: Optional[Sequence[int]] = None) -> str:
    """Local mirror equation "uv = P(z,w)"."""
    return f"uv = {newton_polynomial(D, coeffs)}"
