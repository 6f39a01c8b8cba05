"""
TilingForge - Mutation

Seiberg duality on quivers, integrating out mass terms, urban renewal on
maps and toric-diagram invariance checks between dual phases.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .core import map_to_quiver, quiver_to_map, validate_quiver, homology_weights
from .kasteleyn import (
    boundary_points,
    canonical_polygon,
    kasteleyn_matrix,
    kasteleyn_signs,
    laurent_det,
    toric_diagram,
)
from .models import Arrow, CombinatorialMap, Quiver, Term, TilingForgeError, ToricDiagram


logger = logging.getLogger(__name__)


class NotDualizableError(TilingForgeError):
    """Raised when a node does not have 2 incoming and 2 outgoing arrows."""
    pass


class ToricViolationError(TilingForgeError):
    """Raised when a mutation result fails the toric conditions."""
    pass


class SpliceError(TilingForgeError):
    """Raised when a mass term cannot be integrated out."""
    pass


class MultiVisitError(TilingForgeError):
    """Raised when a Term passes through the mutated node more than once."""
    pass


@dataclass
class MutationRecord:
    """What a Seiberg mutation and the following reduction changed."""
    node: str
    mesons: List[Tuple[str, str, str]] = field(default_factory=list)  # (meson, incoming, outgoing)
    reversed_arrows: List[Tuple[str, str]] = field(default_factory=list)  # (old, new)
    removed_pairs: List[Tuple[str, str]] = field(default_factory=list)
    terms_before: int = 0
    terms_after: int = 0
    rank_before: int = 1
    rank_after: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "node": self.node,
            "mesons": [list(m) for m in self.mesons],
            "reversed_arrows": [list(r) for r in self.reversed_arrows],
            "removed_pairs": [list(p) for p in self.removed_pairs],
            "terms_before": self.terms_before,
            "terms_after": self.terms_after,
            "rank_before": self.rank_before,
            "rank_after": self.rank_after,
        }


def reversed_id(arrow_id: str) -> str:
    """Id of the reversed arrow; reversing twice gives the original id."""
    return arrow_id[:-1] if arrow_id.endswith("*") else f"{arrow_id}*"


def _unique_id(candidate: str, taken: set) -> str:
    while candidate in taken:
        candidate += "'"
    return candidate


def seiberg_mutate(q: Quiver, v: str) -> Tuple[Quiver, MutationRecord]:
    """
    Dualize node v of a toric quiver.

    Arrows at v are reversed, each composite in-then-out path through v
    becomes a meson, and a cubic Term meson * rev(out) * rev(in) is added
    with the sign opposite to the Term the meson was substituted into.

    Raises:
        NotDualizableError: v is not a 2-in/2-out node, or has loops
        MultiVisitError: a Term passes through v more than once
        ToricViolationError: the rewritten quiver fails validation
    """
    if v not in q.nodes:
        raise NotDualizableError(f"Unknown node: {v}")

    incoming = q.incoming(v)
    outgoing = q.outgoing(v)
    if any(a.is_loop for a in incoming):
        raise NotDualizableError(f"Node {v} carries loops")
    if len(incoming) != 2 or len(outgoing) != 2:
        raise NotDualizableError(
            f"Node {v} has {len(incoming)} incoming and {len(outgoing)} outgoing arrows, need 2 and 2"
        )

    in_ids = {a.id for a in incoming}
    out_ids = {a.id for a in outgoing}
    record = MutationRecord(node=v, terms_before=q.n_terms)

    taken = {a.id for a in q.arrows}
    meson_of: Dict[Tuple[str, str], str] = {}
    for a in incoming:
        for b in outgoing:
            meson_of[(a.id, b.id)] = _unique_id(f"({a.id}.{b.id})", taken)
            taken.add(meson_of[(a.id, b.id)])

    new_terms: List[Term] = []
    meson_terms: List[Term] = []
    for term in q.superpotential:
        visits = sum(1 for x in term.word if x in in_ids)
        if visits > 1:
            raise MultiVisitError(f"Term {term} passes through node {v} {visits} times")
        if visits == 0:
            new_terms.append(term)
            continue

        entry = next(x for x in term.word if x in in_ids)
        rotated = term.rotated_to(entry)
        a, b = rotated[0], rotated[1]
        if b not in out_ids:
            raise ToricViolationError(f"Term {term} enters {v} via {a} but leaves via {b}")
        meson = meson_of[(a, b)]
        new_terms.append(Term(sign=term.sign, word=(meson,) + rotated[2:], coeff=term.coeff))
        meson_terms.append(Term(sign=-term.sign, word=(meson, reversed_id(b), reversed_id(a))))

    arrows: List[Arrow] = []
    for arrow in q.arrows:
        if arrow.id in in_ids or arrow.id in out_ids:
            new_id = reversed_id(arrow.id)
            if new_id in taken and new_id != arrow.id:
                raise ToricViolationError(f"Reversed arrow id {new_id} already exists")
            arrows.append(Arrow(id=new_id, source=arrow.target, target=arrow.source))
            record.reversed_arrows.append((arrow.id, new_id))
        else:
            arrows.append(arrow)

    used_mesons = {t.word[0] for t in meson_terms}
    for (a, b), meson in meson_of.items():
        if meson not in used_mesons:
            raise ToricViolationError(f"Path {a}.{b} through {v} does not occur in any term")
        arrows.append(Arrow(id=meson, source=q.arrow(a).source, target=q.arrow(b).target))
        record.mesons.append((meson, a, b))

    result = Quiver(nodes=list(q.nodes), arrows=arrows, superpotential=new_terms + meson_terms)
    report = validate_quiver(result)
    if not report.passed:
        raise ToricViolationError(f"Mutation at {v} broke validation: {report.summary()}", report.to_dict())

    record.terms_after = result.n_terms
    logger.info(f"Mutated node {v}: {len(record.mesons)} mesons, {q.n_terms} -> {result.n_terms} terms")
    return result, record


def _reduce(q: Quiver) -> Tuple[Quiver, List[Tuple[str, str]]]:
    terms = list(q.superpotential)
    arrows = {a.id: a for a in q.arrows}
    removed: List[Tuple[str, str]] = []

    while True:
        mass_index = next((i for i, t in enumerate(terms) if len(t.word) == 2), None)
        if mass_index is None:
            break
        mass = terms[mass_index]
        x, y = mass.word

        def other_term(arrow_id: str) -> int:
            hits = [i for i, t in enumerate(terms) if i != mass_index and arrow_id in t.word]
            if len(hits) != 1:
                raise SpliceError(f"Arrow {arrow_id} must occur in exactly one other term, found {len(hits)}")
            return hits[0]

        ix, iy = other_term(x), other_term(y)
        if ix == iy:
            raise SpliceError(f"Arrows {x} and {y} share their partner term {terms[ix]}")
        t_x, t_y = terms[ix], terms[iy]
        if t_x.word.count(x) != 1 or t_y.word.count(y) != 1:
            raise SpliceError(f"Arrows {x}, {y} repeat inside their partner terms")

        complement = t_x.rotated_to(x)[1:]
        if not complement:
            raise SpliceError(f"Term {t_x} has nothing to splice")
        ax, ay = arrows[x], arrows[y]
        if arrows[complement[0]].source != ax.target or arrows[complement[-1]].target != ax.source:
            raise SpliceError(f"Complement of {x} in {t_x} does not match the endpoints of {y}")
        if (ay.source, ay.target) != (ax.target, ax.source):
            raise SpliceError(f"Mass term {mass} is not a 2-cycle")

        rest = t_y.rotated_to(y)[1:]
        coeff = t_y.coeff * t_x.coeff / mass.coeff
        spliced = Term(sign=t_y.sign, word=complement + rest, coeff=coeff)

        terms = [t for i, t in enumerate(terms) if i not in (mass_index, ix, iy)] + [spliced]
        del arrows[x]
        del arrows[y]
        removed.append((x, y))
        logger.debug(f"Integrated out {x}, {y}")

    kept = [a for a in q.arrows if a.id in arrows]
    return Quiver(nodes=list(q.nodes), arrows=kept, superpotential=terms), removed


def reduce_mass_terms(q: Quiver) -> Quiver:
    """
    Integrate out every quadratic Term.

    For a mass term X*Y with partner Terms X*A and Y*B, the arrows X and Y
    are removed and Y*B becomes A*B with coefficient c_YB * c_XA / c_mass.
    """
    result, removed = _reduce(q)
    if removed:
        logger.info(f"Removed {len(removed)} massive pair(s)")
    return result


def mutate_and_reduce(q: Quiver, v: str) -> Tuple[Quiver, MutationRecord]:
    """Seiberg mutation followed by mass-term reduction."""
    mutated, record = seiberg_mutate(q, v)
    reduced, removed = _reduce(mutated)
    record.removed_pairs = removed
    record.terms_after = reduced.n_terms
    report = validate_quiver(reduced)
    if not report.passed:
        raise ToricViolationError(f"Reduced quiver fails validation: {report.summary()}", report.to_dict())
    return reduced, record


def urban_renewal(m: CombinatorialMap, face: int) -> CombinatorialMap:
    """
    Urban renewal of a quadrilateral face.

    The face index refers to the order of m.faces(), which matches the node
    names "1", "2", ... of map_to_quiver.
    """
    q = map_to_quiver(m)
    faces = m.faces()
    if not 0 <= face < len(faces):
        raise NotDualizableError(f"Face index {face} out of range (map has {len(faces)} faces)")
    if len(faces[face]) != 2:
        raise NotDualizableError(
            f"Face {face} has {2 * len(faces[face])} sides; urban renewal needs a quadrilateral"
        )
    reduced, _ = mutate_and_reduce(q, q.nodes[face])
    return quiver_to_map(reduced)


# =============================================================================
# Invariance
# =============================================================================

@dataclass
class DualityReport:
    """Comparison of the toric diagrams of two quivers."""
    support_equal: bool
    boundary_equal: bool
    canonical_first: ToricDiagram
    canonical_second: ToricDiagram
    interior_first: Dict[Tuple[int, int], int]
    interior_second: Dict[Tuple[int, int], int]

    @property
    def equal(self) -> bool:
        return self.support_equal and self.boundary_equal

    def to_dict(self) -> Dict[str, Any]:
        return {
            "equal": self.equal,
            "support_equal": self.support_equal,
            "boundary_equal": self.boundary_equal,
            "canonical_first": self.canonical_first.to_dict(),
            "canonical_second": self.canonical_second.to_dict(),
            "interior_first": [[a, b, k] for (a, b), k in sorted(self.interior_first.items())],
            "interior_second": [[a, b, k] for (a, b), k in sorted(self.interior_second.items())],
        }


def quiver_toric_diagram(q: Quiver) -> ToricDiagram:
    """Toric diagram of a toric quiver via its Kasteleyn determinant."""
    m = quiver_to_map(q)
    det = laurent_det(kasteleyn_matrix(m, kasteleyn_signs(m), homology_weights(m)))
    return toric_diagram(det)


def _mask_interior(D: ToricDiagram) -> Tuple[ToricDiagram, Dict[Tuple[int, int], int]]:
    boundary = set(boundary_points(D))
    interior = {p: k for p, k in D.points.items() if p not in boundary}
    return D.with_multiplicities({p: 1 for p in interior}), interior


def check_duality_invariance(q: Quiver, q2: Quiver) -> DualityReport:
    """
    Compare canonical toric polygons of two quivers.

    Support and boundary multiplicities are compared; interior
    multiplicities are reported but may differ between dual phases.
    """
    masked1, interior1 = _mask_interior(quiver_toric_diagram(q))
    masked2, interior2 = _mask_interior(quiver_toric_diagram(q2))

    canon1, canon2 = canonical_polygon(masked1), canonical_polygon(masked2)
    support1 = canonical_polygon(ToricDiagram({p: 1 for p in masked1.points}))
    support2 = canonical_polygon(ToricDiagram({p: 1 for p in masked2.points}))

    report = DualityReport(
        support_equal=support1 == support2,
        boundary_equal=canon1 == canon2,
        canonical_first=canon1,
        canonical_second=canon2,
        interior_first=interior1,
        interior_second=interior2,
    )
    logger.info(f"Duality invariance: support={report.support_equal}, boundary={report.boundary_equal}")
    return report
