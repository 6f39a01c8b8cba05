"""
TilingForge - Dessins

Permutation triples, passports and Riemann-Hurwitz genus of bipartite maps.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

from sympy.combinatorics import Permutation, PermutationGroup

from .core import DisconnectedError
from .models import CombinatorialMap, TilingForgeError


logger = logging.getLogger(__name__)


class NonIntegerGenusError(TilingForgeError):
    """Raised when Riemann-Hurwitz gives a non-integer genus."""
    pass


def _cycle_lengths(p: Permutation) -> List[int]:
    return sorted(len(c) for c in p.full_cyclic_form)


@dataclass
class PermutationTriple:
    """
    sigma_B, sigma_W and sigma_inf acting on edge positions 0..d-1.

    Permutations compose left to right, so sigma_B * sigma_W applies
    sigma_B first and the product of all three is the identity.
    """
    sigma_b: Permutation
    sigma_w: Permutation
    sigma_inf: Permutation
    labels: List[str]

    @property
    def degree(self) -> int:
        return len(self.labels)

    def is_identity_product(self) -> bool:
        return (self.sigma_b * self.sigma_w * self.sigma_inf).is_Identity

    def is_transitive(self) -> bool:
        if self.degree <= 1:
            return True
        return PermutationGroup([self.sigma_b, self.sigma_w]).is_transitive()

    def cycles(self, which: str) -> List[Tuple[str, ...]]:
        """Cycles of one permutation in edge labels ("b", "w" or "inf")."""
        perm = {"b": self.sigma_b, "w": self.sigma_w, "inf": self.sigma_inf}[which]
        return [tuple(self.labels[i] for i in c) for c in perm.full_cyclic_form]

    def cycle_notation(self, which: str) -> str:
        return "".join("(" + " ".join(c) + ")" for c in self.cycles(which))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "degree": self.degree,
            "sigma_B": [list(c) for c in self.cycles("b")],
            "sigma_W": [list(c) for c in self.cycles("w")],
            "sigma_inf": [list(c) for c in self.cycles("inf")],
        }


@dataclass(frozen=True)
class Passport:
    """Sorted cycle types of sigma_B, sigma_W and sigma_inf."""
    black: Tuple[int, ...]
    white: Tuple[int, ...]
    infinity: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.black)

    @property
    def is_balanced(self) -> bool:
        return len(self.black) == len(self.white)

    def rows(self) -> Tuple[Tuple[int, ...], ...]:
        return self.black, self.white, self.infinity

    def __str__(self) -> str:
        return "[" + " | ".join(",".join(map(str, row)) for row in self.rows()) + "]"

    def to_dict(self) -> Dict[str, Any]:
        return {"black": list(self.black), "white": list(self.white), "infinity": list(self.infinity)}


def permutation_triple(m: CombinatorialMap) -> PermutationTriple:
    """
    Build the permutation triple of a connected map.

    Positions follow the map's edge order.
    """
    if not m.is_connected():
        raise DisconnectedError("Map is not connected")

    pos = {e: i for i, e in enumerate(m.edges)}
    sigma_b = Permutation([pos[m.sb(e)] for e in m.edges])
    sigma_w = Permutation([pos[m.sw(e)] for e in m.edges])
    sigma_inf = (sigma_b * sigma_w) ** -1

    triple = PermutationTriple(sigma_b=sigma_b, sigma_w=sigma_w, sigma_inf=sigma_inf, labels=list(m.edges))
    logger.debug(f"Permutation triple of degree {triple.degree}")
    return triple


def passport(t: PermutationTriple) -> Passport:
    return Passport(
        black=tuple(_cycle_lengths(t.sigma_b)),
        white=tuple(_cycle_lengths(t.sigma_w)),
        infinity=tuple(_cycle_lengths(t.sigma_inf)),
    )


def rh_genus(t: PermutationTriple) -> int:
    """Genus from 2g - 2 = d - (B + W + I)."""
    p = passport(t)
    twice = t.degree - (len(p.black) + len(p.white) + len(p.infinity)) + 2
    if twice % 2:
        raise NonIntegerGenusError(f"Riemann-Hurwitz gives 2g = {twice} for passport {p}")
    return twice // 2
