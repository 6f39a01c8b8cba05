"""
TilingForge - Core

Validation of quivers with superpotential, conversion between quivers and
bipartite torus maps, genus and homology weights.
"""

import logging
import random
from collections import Counter, deque
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from .models import (
    Arrow,
    CombinatorialMap,
    HomologyWeights,
    Quiver,
    StructureError,
    Term,
    TilingForgeError,
    ValidationReport,
)


logger = logging.getLogger(__name__)


class ToricConditionError(TilingForgeError):
    """Raised when a quiver fails the toric or cycle-closure checks."""
    pass


class GenusError(TilingForgeError):
    """Raised when a map does not have the required genus."""
    pass


class FaceMismatchError(TilingForgeError):
    """Raised when map faces do not correspond to quiver nodes."""
    pass


class DisconnectedError(TilingForgeError):
    """Raised when a map is not connected."""
    pass


# =============================================================================
# Quiver validation
# =============================================================================

def term_is_closed(q: Quiver, term: Term) -> bool:
    """True when consecutive arrows of the cyclic word compose."""
    word = term.word
    for i, arrow_id in enumerate(word):
        nxt = word[(i + 1) % len(word)]
        if q.arrow(arrow_id).target != q.arrow(nxt).source:
            return False
    return True


def validate_quiver(q: Quiver) -> ValidationReport:
    """
    Check the toric, Euler and cycle-closure conditions.

    Returns a report; failures are diagnostics, not exceptions.
    """
    report = ValidationReport()
    report.counts = {"N0": q.n_nodes, "N1": q.n_arrows, "N2": q.n_terms}

    # Toric condition: each arrow in exactly two Terms, once per sign
    problems = []
    for arrow in q.arrows:
        signs = []
        for term in q.superpotential:
            hits = term.word.count(arrow.id)
            if hits > 1:
                problems.append(f"{arrow.id} appears {hits} times in one term")
            if hits:
                signs.append(term.sign)
        if sorted(signs) != [-1, 1]:
            problems.append(f"{arrow.id} has signs {sorted(signs)}")
    report.add(
        "toric",
        not problems,
        "; ".join(dict.fromkeys(problems)) if problems else "every arrow appears once with each sign",
    )

    euler = q.n_nodes - q.n_arrows + q.n_terms
    report.add("euler", euler == 0, f"N0 - N1 + N2 = {euler}")

    open_terms = [str(t) for t in q.superpotential if not term_is_closed(q, t)]
    report.add(
        "closure",
        not open_terms,
        f"open terms: {', '.join(open_terms)}" if open_terms else "all terms are closed cycles",
    )

    logger.debug(f"Quiver validation: {report.summary()}")
    return report


def incidence_matrix(q: Quiver) -> np.ndarray:
    """Node-by-arrow matrix with -1 at the source and +1 at the target."""
    d = np.zeros((q.n_nodes, q.n_arrows), dtype=np.int64)
    row = {node: i for i, node in enumerate(q.nodes)}
    for j, arrow in enumerate(q.arrows):
        d[row[arrow.source], j] -= 1
        d[row[arrow.target], j] += 1
    return d


# =============================================================================
# Maps
# =============================================================================

def genus(m: CombinatorialMap) -> int:
    """Genus from V - E + F = 2 - 2g."""
    if m.n_edges == 0:
        raise StructureError("Map has no edges")
    if not m.is_connected():
        raise DisconnectedError("Map is not connected")

    chi = m.n_black + m.n_white - m.n_edges + len(m.faces())
    if chi % 2:
        raise GenusError(f"Odd Euler characteristic {chi}")
    return (2 - chi) // 2


def _require_torus(m: CombinatorialMap) -> None:
    g = genus(m)
    if g != 1:
        raise GenusError(f"Map has genus {g}, expected 1", {"genus": g})


def quiver_to_map(q: Quiver) -> CombinatorialMap:
    """
    Build the bipartite map of a toric quiver.

    Each +Term becomes a black node whose clockwise edge order is its word;
    each -Term becomes a white node with the reversed word.
    """
    report = validate_quiver(q)
    failed = [c for c in report.checks if c.name in ("toric", "closure") and not c.passed]
    if failed:
        raise ToricConditionError(
            "Quiver does not define a bipartite map: "
            + "; ".join(f"{c.name}: {c.message}" for c in failed),
            report.to_dict(),
        )

    black = [t.word for t in q.superpotential if t.sign > 0]
    white = [tuple(reversed(t.word)) for t in q.superpotential if t.sign < 0]
    m = CombinatorialMap(edges=[a.id for a in q.arrows], sigma_black=black, sigma_white=white)

    _require_torus(m)
    n_faces = len(m.faces())
    if n_faces != q.n_nodes:
        raise FaceMismatchError(
            f"Map has {n_faces} faces but quiver has {q.n_nodes} nodes",
            {"faces": n_faces, "nodes": q.n_nodes},
        )

    logger.info(
        f"Built map: {m.n_black} black, {m.n_white} white, "
        f"{m.n_edges} edges, {n_faces} faces"
    )
    return m


def map_to_quiver(m: CombinatorialMap) -> Quiver:
    """
    Read off the dual quiver of a torus map.

    Faces become nodes "1", "2", ...; the arrow of edge e runs from the face
    containing sigma_black^-1(e) to the face containing e, so arrows circulate
    around black nodes in the sigma_black direction.
    """
    _require_torus(m)
    face_of = m.face_index()
    nodes = [str(i + 1) for i in range(len(m.faces()))]
    arrows = [
        Arrow(id=e, source=nodes[face_of[m.sb_inv(e)]], target=nodes[face_of[e]])
        for e in m.edges
    ]
    terms = [Term(sign=1, word=tuple(c)) for c in m.sigma_black]
    terms += [Term(sign=-1, word=tuple(reversed(c))) for c in m.sigma_white]
    return Quiver(nodes=nodes, arrows=arrows, superpotential=terms)


# =============================================================================
# Homology weights
# =============================================================================

def _primal_tree(m: CombinatorialMap, order: Sequence[str]) -> set:
    """Breadth-first spanning tree of the bipartite graph."""
    incident: Dict[Tuple[str, int], List[str]] = {}
    for e in order:
        incident.setdefault(("b", m.black_node(e)), []).append(e)
        incident.setdefault(("w", m.white_node(e)), []).append(e)

    root = ("b", m.black_node(order[0]))
    seen = {root}
    tree = set()
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for e in incident[node]:
            other = ("w", m.white_node(e)) if node[0] == "b" else ("b", m.black_node(e))
            if other not in seen:
                seen.add(other)
                tree.add(e)
                queue.append(other)
    return tree


def _dual_tree(m: CombinatorialMap, order: Sequence[str], tree: set, face_of: Dict[str, int]) -> set:
    """Spanning tree of the dual graph avoiding primal tree edges."""
    parent = list(range(len(m.faces())))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    cotree = set()
    for e in order:
        if e in tree:
            continue
        f1, f2 = find(face_of[m.sb_inv(e)]), find(face_of[e])
        if f1 != f2:
            parent[f1] = f2
            cotree.add(e)
    return cotree


def _check_unimodular(m: CombinatorialMap, h: Dict[str, Tuple[int, int]]) -> bool:
    """Coboundaries plus the two weight vectors span the full cocycle lattice."""
    n_black = m.n_black
    cols = n_black + m.n_white + 2
    rows = []
    for e in m.edges:
        row = [0] * cols
        row[m.black_node(e)] -= 1
        row[n_black + m.white_node(e)] += 1
        row[-2], row[-1] = h[e]
        rows.append(row)

    snf = smith_normal_form(Matrix(rows), domain=ZZ)
    diag = [abs(int(snf[i, i])) for i in range(min(snf.shape))]
    nonzero = [d for d in diag if d != 0]
    expected_rank = n_black + m.n_white + 1
    return len(nonzero) == expected_rank and all(d == 1 for d in nonzero)


def homology_weights(
    m: CombinatorialMap,
    edge_order: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
) -> HomologyWeights:
    """
    Integer cocycle weights (h_z, h_w) representing a homology basis.

    A tree-cotree decomposition leaves exactly two generator edges on a
    torus. Tree edges get weight zero, the generators get (1, 0) and (0, 1),
    and the dual-tree edges are solved from the face equations.

    Args:
        m: Genus-one map
        edge_order: Traversal order for the tree choices (default: m.edges)
        seed: If given, shuffle the traversal order with this seed

    Returns:
        HomologyWeights satisfying the cocycle and unimodularity conditions
    """
    _require_torus(m)
    order = list(edge_order) if edge_order is not None else list(m.edges)
    if seed is not None:
        random.Random(seed).shuffle(order)
    if sorted(order) != sorted(m.edges):
        raise StructureError("edge_order must be a permutation of the map edges")

    face_of = m.face_index()
    n_faces = len(m.faces())
    tree = _primal_tree(m, order)
    cotree = _dual_tree(m, order, tree, face_of)
    generators = [e for e in order if e not in tree and e not in cotree]
    if len(generators) != 2:
        raise GenusError(f"Expected 2 generator edges, found {len(generators)}")

    h: Dict[str, Tuple[int, int]] = {e: (0, 0) for e in tree}
    h[generators[0]] = (1, 0)
    h[generators[1]] = (0, 1)

    # Face equation: sum of h over edges entering a face minus edges leaving it.
    # Edge x enters face(sb_inv(x)) with +1 and face(x) with -1.
    known = [[0, 0] for _ in range(n_faces)]
    pending: Dict[int, List[str]] = {f: [] for f in range(n_faces)}

    def contribute(e: str, value: Tuple[int, int]) -> None:
        plus, minus = face_of[m.sb_inv(e)], face_of[e]
        for k in (0, 1):
            known[plus][k] += value[k]
            known[minus][k] -= value[k]

    for e, value in h.items():
        contribute(e, value)
    for e in cotree:
        pending[face_of[m.sb_inv(e)]].append(e)
        pending[face_of[e]].append(e)

    leaves = deque(sorted(f for f in range(n_faces) if len(pending[f]) == 1))
    while leaves:
        f = leaves.popleft()
        if len(pending[f]) != 1:
            continue
        e = pending[f][0]
        coef = 1 if face_of[m.sb_inv(e)] == f else -1
        value = (-known[f][0] * coef, -known[f][1] * coef)
        h[e] = value
        contribute(e, value)
        for face in (face_of[m.sb_inv(e)], face_of[e]):
            pending[face].remove(e)
            if len(pending[face]) == 1:
                leaves.append(face)

    if len(h) != m.n_edges:
        raise StructureError("Failed to solve face equations for homology weights")

    weights = HomologyWeights({e: h[e] for e in m.edges})
    for face in m.faces():
        if weights.face_sum(m, face) != (0, 0):
            raise StructureError(f"Homology weights are not a cocycle on face {face}")
    if not _check_unimodular(m, weights.weights):
        raise StructureError("Homology weights do not form a unimodular basis")

    logger.debug(f"Homology weights: tree={sorted(tree)}, generators={generators}")
    return weights


# =============================================================================
# Isomorphism
# =============================================================================

def quivers_isomorphic(q1: Quiver, q2: Quiver) -> bool:
    """
    Test isomorphism respecting signs, coefficients and cyclic words.

    Backtracks over Term-to-Term assignments, extending consistent arrow
    and node bijections.
    """
    if (q1.n_nodes, q1.n_arrows, q1.n_terms) != (q2.n_nodes, q2.n_arrows, q2.n_terms):
        return False

    def signature(t: Term) -> Tuple[int, object, int]:
        return (t.sign, t.coeff, len(t.word))

    if Counter(map(signature, q1.superpotential)) != Counter(map(signature, q2.superpotential)):
        return False

    terms1 = sorted(q1.superpotential, key=lambda t: -len(t.word))

    def extend_arrow(a1: str, a2: str, amap: Dict[str, str], nmap: Dict[str, str]) -> bool:
        if a1 in amap:
            return amap[a1] == a2
        if a2 in amap.values():
            return False
        x, y = q1.arrow(a1), q2.arrow(a2)
        for n1, n2 in ((x.source, y.source), (x.target, y.target)):
            if n1 in nmap:
                if nmap[n1] != n2:
                    return False
            elif n2 in nmap.values():
                return False
            else:
                nmap[n1] = n2
        amap[a1] = a2
        return True

    def match_arrows(rest1: List[Arrow], amap: Dict[str, str], nmap: Dict[str, str]) -> bool:
        if not rest1:
            return True
        a1 = rest1[0]
        for y in q2.arrows:
            if y.id in amap.values():
                continue
            amap2, nmap2 = dict(amap), dict(nmap)
            if extend_arrow(a1.id, y.id, amap2, nmap2) and match_arrows(rest1[1:], amap2, nmap2):
                return True
        return False

    def match_terms(i: int, used: frozenset, amap: Dict[str, str], nmap: Dict[str, str]) -> bool:
        if i == len(terms1):
            rest = [a for a in q1.arrows if a.id not in amap]
            return match_arrows(rest, amap, nmap)
        t1 = terms1[i]
        for j, t2 in enumerate(q2.superpotential):
            if j in used or signature(t2) != signature(t1):
                continue
            for rotation in t2.rotations():
                amap2, nmap2 = dict(amap), dict(nmap)
                if all(extend_arrow(a, b, amap2, nmap2) for a, b in zip(t1.word, rotation)):
                    if match_terms(i + 1, used | {j}, amap2, nmap2):
                        return True
        return False

    return match_terms(0, frozenset(), {}, {})


def maps_isomorphic(m1: CombinatorialMap, m2: CombinatorialMap) -> bool:
    """True when an edge bijection conjugates both rotation systems."""
    if m1.n_edges != m2.n_edges or sorted(m1.node_valences()[0]) != sorted(m2.node_valences()[0]):
        return False
    if sorted(m1.node_valences()[1]) != sorted(m2.node_valences()[1]):
        return False
    if m1.n_edges == 0:
        return True

    start = m1.edges[0]
    for image in m2.edges:
        pi = {start: image}
        stack = [start]
        ok = True
        while stack and ok:
            e = stack.pop()
            for step1, step2 in ((m1.sb, m2.sb), (m1.sw, m2.sw), (m1.sb_inv, m2.sb_inv), (m1.sw_inv, m2.sw_inv)):
                x, y = step1(e), step2(pi[e])
                if x in pi:
                    if pi[x] != y:
                        ok = False
                        break
                else:
                    pi[x] = y
                    stack.append(x)
        if ok and len(pi) == m1.n_edges and len(set(pi.values())) == m1.n_edges:
            return True
    return False
