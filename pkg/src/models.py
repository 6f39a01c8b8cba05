"""
TilingForge - Data Models

Dataclasses for quivers with superpotential, bipartite torus maps,
homology weights, validation reports and toric diagrams.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple


class TilingForgeError(Exception):
    """Base exception for all tilingforge errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class StructureError(TilingForgeError):
    """Raised when input data is structurally malformed."""
    pass


def parse_coeff(value: Any) -> Fraction:
    """Parse a coefficient given as int, Fraction or "p/q" string."""
    if isinstance(value, Fraction):
        return value
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise StructureError(f"Invalid coefficient: {value!r}") from e


def format_coeff(value: Fraction) -> str:
    """Format a coefficient as "p" or "p/q"."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Arrow:
    """Directed arrow of a quiver."""
    id: str
    source: str
    target: str

    @property
    def is_loop(self) -> bool:
        return self.source == self.target

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Arrow":
        """Create Arrow from JSON data."""
        try:
            return cls(id=str(data["id"]), source=str(data["from"]), target=str(data["to"]))
        except KeyError as e:
            raise StructureError(f"Arrow is missing field {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        """Convert to JSON format."""
        return {"id": self.id, "from": self.source, "to": self.target}


@dataclass(frozen=True)
class Term:
    """
    Signed monomial of a superpotential.

    The word is a cyclic word in arrow ids stored with a fixed starting
    arrow. Equality is rotation-invariant; reflections are not identified.
    """
    sign: int
    word: Tuple[str, ...]
    coeff: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))
        object.__setattr__(self, "coeff", parse_coeff(self.coeff))
        if self.sign not in (1, -1):
            raise StructureError(f"Term sign must be +1 or -1, got {self.sign}")
        if self.coeff == 0:
            raise StructureError("Term coefficient must be nonzero")
        if not self.word:
            raise StructureError("Term word must not be empty")

    def __len__(self) -> int:
        return len(self.word)

    def rotations(self) -> Iterator[Tuple[str, ...]]:
        """Yield all rotations of the cyclic word."""
        for i in range(len(self.word)):
            yield self.word[i:] + self.word[:i]

    def canonical_word(self) -> Tuple[str, ...]:
        """Lexicographically smallest rotation."""
        return min(self.rotations())

    def rotated_to(self, arrow_id: str) -> Tuple[str, ...]:
        """Rotation starting at the first occurrence of arrow_id."""
        i = self.word.index(arrow_id)
        return self.word[i:] + self.word[:i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Term):
            return NotImplemented
        return (
            self.sign == other.sign
            and self.coeff == other.coeff
            and self.canonical_word() == other.canonical_word()
        )

    def __hash__(self) -> int:
        return hash((self.sign, self.coeff, self.canonical_word()))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Term":
        """Create Term from JSON data."""
        try:
            return cls(
                sign=int(data["sign"]),
                word=tuple(str(a) for a in data["word"]),
                coeff=parse_coeff(data.get("coeff", 1)),
            )
        except KeyError as e:
            raise StructureError(f"Term is missing field {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        """Convert to JSON format."""
        return {"sign": self.sign, "coeff": format_coeff(self.coeff), "word": list(self.word)}

    def __str__(self) -> str:
        prefix = "+" if self.sign > 0 else "-"
        coeff = "" if self.coeff == 1 else f"{format_coeff(self.coeff)}*"
        return f"{prefix}{coeff}{' '.join(self.word)}"


@dataclass
class Quiver:
    """
    Quiver with superpotential.

    Dimension vector is all-ones throughout.
    """
    nodes: List[str]
    arrows: List[Arrow]
    superpotential: List[Term] = field(default_factory=list)
    _arrow_index: Dict[str, Arrow] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.nodes = [str(n) for n in self.nodes]
        self.arrows = list(self.arrows)
        self.superpotential = list(self.superpotential)

        if len(set(self.nodes)) != len(self.nodes):
            raise StructureError("Duplicate node identifiers")

        self._arrow_index = {}
        node_set = set(self.nodes)
        for arrow in self.arrows:
            if arrow.id in self._arrow_index:
                raise StructureError(f"Duplicate arrow id: {arrow.id}")
            if arrow.source not in node_set or arrow.target not in node_set:
                raise StructureError(
                    f"Arrow {arrow.id} references undeclared node "
                    f"({arrow.source} -> {arrow.target})"
                )
            self._arrow_index[arrow.id] = arrow

        for term in self.superpotential:
            for arrow_id in term.word:
                if arrow_id not in self._arrow_index:
                    raise StructureError(f"Term {term} uses unknown arrow {arrow_id}")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    @property
    def n_terms(self) -> int:
        return len(self.superpotential)

    def arrow(self, arrow_id: str) -> Arrow:
        """Look up an arrow by id."""
        return self._arrow_index[arrow_id]

    def has_arrow(self, arrow_id: str) -> bool:
        return arrow_id in self._arrow_index

    def incoming(self, node: str) -> List[Arrow]:
        return [a for a in self.arrows if a.target == node]

    def outgoing(self, node: str) -> List[Arrow]:
        return [a for a in self.arrows if a.source == node]

    def occurrences(self, arrow_id: str) -> List[int]:
        """Indices of Terms containing arrow_id, once per occurrence."""
        return [
            i for i, term in enumerate(self.superpotential)
            for a in term.word if a == arrow_id
        ]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Quiver":
        """Create Quiver from JSON data."""
        if "nodes" not in data or "arrows" not in data:
            raise StructureError("Quiver JSON requires 'nodes' and 'arrows'")
        return cls(
            nodes=[str(n) for n in data["nodes"]],
            arrows=[Arrow.from_dict(a) for a in data["arrows"]],
            superpotential=[Term.from_dict(t) for t in data.get("W", [])],
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to JSON format."""
        return {
            "nodes": list(self.nodes),
            "arrows": [a.to_dict() for a in self.arrows],
            "W": [t.to_dict() for t in self.superpotential],
        }


def _cycles_to_perm(cycles: Sequence[Sequence[str]], edges: Sequence[str], label: str) -> Dict[str, str]:
    perm: Dict[str, str] = {}
    for cycle in cycles:
        for i, edge in enumerate(cycle):
            if edge in perm:
                raise StructureError(f"Edge {edge} appears twice in {label}")
            perm[edge] = cycle[(i + 1) % len(cycle)]
    if set(perm) != set(edges):
        missing = sorted(set(edges) - set(perm))
        extra = sorted(set(perm) - set(edges))
        raise StructureError(
            f"{label} is not a permutation of the edge set",
            {"missing": missing, "unknown": extra},
        )
    return perm


@dataclass
class CombinatorialMap:
    """
    Bipartite map given by rotation systems at black and white nodes.

    sigma_black and sigma_white are stored as lists of cycles; node i of a
    colour is the i-th cycle. The face permutation applies sigma_black
    first and then sigma_white, and its cycles are the faces.
    """
    edges: List[str]
    sigma_black: List[Tuple[str, ...]]
    sigma_white: List[Tuple[str, ...]]
    _sb: Dict[str, str] = field(init=False, repr=False, compare=False)
    _sw: Dict[str, str] = field(init=False, repr=False, compare=False)
    _black_of: Dict[str, int] = field(init=False, repr=False, compare=False)
    _white_of: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.edges = [str(e) for e in self.edges]
        self.sigma_black = [tuple(str(e) for e in c) for c in self.sigma_black]
        self.sigma_white = [tuple(str(e) for e in c) for c in self.sigma_white]
        if len(set(self.edges)) != len(self.edges):
            raise StructureError("Duplicate edge identifiers")
        if any(len(c) == 0 for c in self.sigma_black + self.sigma_white):
            raise StructureError("Empty cycle in rotation system")

        self._sb = _cycles_to_perm(self.sigma_black, self.edges, "sigma_black")
        self._sw = _cycles_to_perm(self.sigma_white, self.edges, "sigma_white")
        self._black_of = {e: i for i, c in enumerate(self.sigma_black) for e in c}
        self._white_of = {e: i for i, c in enumerate(self.sigma_white) for e in c}

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_black(self) -> int:
        return len(self.sigma_black)

    @property
    def n_white(self) -> int:
        return len(self.sigma_white)

    def black_node(self, edge: str) -> int:
        return self._black_of[edge]

    def white_node(self, edge: str) -> int:
        return self._white_of[edge]

    def sb(self, edge: str) -> str:
        """Next edge clockwise around the black endpoint."""
        return self._sb[edge]

    def sw(self, edge: str) -> str:
        """Next edge clockwise around the white endpoint."""
        return self._sw[edge]

    def sb_inv(self, edge: str) -> str:
        cycle = self.sigma_black[self._black_of[edge]]
        return cycle[cycle.index(edge) - 1]

    def sw_inv(self, edge: str) -> str:
        cycle = self.sigma_white[self._white_of[edge]]
        return cycle[cycle.index(edge) - 1]

    def phi(self, edge: str) -> str:
        """Face permutation: sigma_black, then sigma_white."""
        return self._sw[self._sb[edge]]

    def faces(self) -> List[Tuple[str, ...]]:
        """Cycles of the face permutation, in edge order of first appearance."""
        seen = set()
        result = []
        for edge in self.edges:
            if edge in seen:
                continue
            cycle = []
            e = edge
            while e not in seen:
                seen.add(e)
                cycle.append(e)
                e = self.phi(e)
            result.append(tuple(cycle))
        return result

    def face_index(self) -> Dict[str, int]:
        """Map edge -> index of the face whose cycle contains it."""
        return {e: i for i, face in enumerate(self.faces()) for e in face}

    def face_boundary(self, face: Sequence[str]) -> List[str]:
        """Boundary edge-incidences of a face, with multiplicity."""
        return list(face) + [self.sb(e) for e in face]

    def face_lengths(self) -> List[int]:
        """Number of boundary incidences of every face."""
        return [2 * len(face) for face in self.faces()]

    def node_valences(self) -> Tuple[List[int], List[int]]:
        """Valences of black and white nodes."""
        return [len(c) for c in self.sigma_black], [len(c) for c in self.sigma_white]

    def is_connected(self) -> bool:
        """True when the rotation systems act transitively on edges."""
        if not self.edges:
            return True
        seen = {self.edges[0]}
        stack = [self.edges[0]]
        while stack:
            e = stack.pop()
            for nxt in (self._sb[e], self._sw[e], self.sb_inv(e), self.sw_inv(e)):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.edges)

    def relabeled(self, mapping: Dict[str, str]) -> "CombinatorialMap":
        """Copy with edges renamed through mapping."""
        return CombinatorialMap(
            edges=[mapping[e] for e in self.edges],
            sigma_black=[tuple(mapping[e] for e in c) for c in self.sigma_black],
            sigma_white=[tuple(mapping[e] for e in c) for c in self.sigma_white],
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CombinatorialMap":
        """Create CombinatorialMap from JSON data."""
        try:
            return cls(
                edges=[str(e) for e in data["edges"]],
                sigma_black=[tuple(c) for c in data["sigma_black"]],
                sigma_white=[tuple(c) for c in data["sigma_white"]],
            )
        except KeyError as e:
            raise StructureError(f"Map JSON is missing field {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        """Convert to JSON format."""
        return {
            "edges": list(self.edges),
            "sigma_black": [list(c) for c in self.sigma_black],
            "sigma_white": [list(c) for c in self.sigma_white],
        }


@dataclass
class HomologyWeights:
    """Per-edge integer pairs (h_z, h_w) for edges oriented black to white."""
    weights: Dict[str, Tuple[int, int]]

    def __getitem__(self, edge: str) -> Tuple[int, int]:
        return self.weights[edge]

    def __iter__(self) -> Iterator[str]:
        return iter(self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def face_sum(self, m: CombinatorialMap, face: Sequence[str]) -> Tuple[int, int]:
        """Signed weight sum around a face; zero for a cocycle."""
        hz = sum(self.weights[m.sb(e)][0] - self.weights[e][0] for e in face)
        hw = sum(self.weights[m.sb(e)][1] - self.weights[e][1] for e in face)
        return hz, hw

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HomologyWeights":
        return cls(weights={str(k): (int(v[0]), int(v[1])) for k, v in data.items()})

    def to_dict(self) -> Dict[str, List[int]]:
        return {k: [v[0], v[1]] for k, v in self.weights.items()}


@dataclass
class CheckResult:
    """Outcome of a single validation check."""
    name: str
    passed: bool
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "message": self.message}


@dataclass
class ValidationReport:
    """Collection of named pass/fail checks."""
    checks: List[CheckResult] = field(default_factory=list)
    counts: Dict[str, int] = field(default_factory=dict)

    def add(self, name: str, passed: bool, message: str = "") -> None:
        self.checks.append(CheckResult(name, passed, message))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        parts = [f"{c.name}: {'PASS' if c.passed else 'FAIL'}" for c in self.checks]
        counts = ", ".join(f"{k}={v}" for k, v in self.counts.items())
        return "; ".join(parts) + (f" ({counts})" if counts else "")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "counts": dict(self.counts),
        }


Point = Tuple[int, int]


@dataclass
class ToricDiagram:
    """Lattice points with positive integer multiplicities."""
    points: Dict[Point, int] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[Point, int] = {}
        for p, mult in self.points.items():
            mult = int(mult)
            if mult < 1:
                raise StructureError(f"Multiplicity at {p} must be positive, got {mult}")
            cleaned[(int(p[0]), int(p[1]))] = mult
        self.points = cleaned

    @classmethod
    def from_points(cls, points: Iterable[Point]) -> "ToricDiagram":
        """Diagram counting repeated points as multiplicity."""
        return cls(points=dict(Counter((int(a), int(b)) for a, b in points)))

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ToricDiagram):
            return NotImplemented
        return self.points == other.points

    def sorted_items(self) -> List[Tuple[Point, int]]:
        return sorted(self.points.items())

    def support(self) -> List[Point]:
        return sorted(self.points)

    def translated(self, dx: int, dy: int) -> "ToricDiagram":
        return ToricDiagram({(a + dx, b + dy): m for (a, b), m in self.points.items()})

    def normalized(self) -> "ToricDiagram":
        """Translate so that the minimal exponents are zero."""
        if not self.points:
            return ToricDiagram()
        min_a = min(a for a, _ in self.points)
        min_b = min(b for _, b in self.points)
        return self.translated(-min_a, -min_b)

    def with_multiplicities(self, mults: Dict[Point, int]) -> "ToricDiagram":
        return ToricDiagram({p: mults.get(p, m) for p, m in self.points.items()})

    def to_text(self) -> str:
        """Lines "a b multiplicity", sorted."""
        return "\n".join(f"{a} {b} {m}" for (a, b), m in self.sorted_items())

    @classmethod
    def from_text(cls, text: str) -> "ToricDiagram":
        points: Dict[Point, int] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise StructureError(f"Line {lineno}: expected 'a b multiplicity', got {line!r}")
            a, b, m = (int(x) for x in parts)
            points[(a, b)] = points.get((a, b), 0) + m
        return cls(points)

    def to_dict(self) -> Dict[str, Any]:
        return {"points": [[a, b, m] for (a, b), m in self.sorted_items()]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ToricDiagram":
        return cls({(int(a), int(b)): int(m) for a, b, m in data.get("points", [])})
