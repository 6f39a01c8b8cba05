"""
TilingForge - Laurent Polynomials

Exact bivariate Laurent polynomials in z and w with integer coefficients.
"""

import logging
from typing import Dict, Iterable, Iterator, List, Tuple, Union

import sympy

from .models import StructureError


logger = logging.getLogger(__name__)

Exponent = Tuple[int, int]

_Z, _W = sympy.symbols("z w")


class LaurentPoly2:
    """
    Immutable Laurent polynomial sum c * z^a * w^b.

    Coefficients are Python ints; zero coefficients are never stored.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Union[Dict[Exponent, int], Iterable[Tuple[Exponent, int]], None] = None):
        items = terms.items() if isinstance(terms, dict) else (terms or [])
        clean: Dict[Exponent, int] = {}
        for (a, b), c in items:
            key = (int(a), int(b))
            clean[key] = clean.get(key, 0) + int(c)
        self._terms = {k: v for k, v in clean.items() if v != 0}
        self._hash = None

    @classmethod
    def constant(cls, c: int) -> "LaurentPoly2":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, a: int, b: int, c: int = 1) -> "LaurentPoly2":
        return cls({(a, b): c})

    @classmethod
    def zero(cls) -> "LaurentPoly2":
        return cls()

    @classmethod
    def one(cls) -> "LaurentPoly2":
        return cls.constant(1)

    @property
    def terms(self) -> Dict[Exponent, int]:
        return dict(self._terms)

    def items(self) -> List[Tuple[Exponent, int]]:
        return sorted(self._terms.items())

    def support(self) -> List[Exponent]:
        return sorted(self._terms)

    def coeff(self, a: int, b: int) -> int:
        return self._terms.get((a, b), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Exponent]:
        return iter(sorted(self._terms))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = LaurentPoly2.constant(other)
        if not isinstance(other, LaurentPoly2):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    @staticmethod
    def _coerce(other) -> "LaurentPoly2":
        if isinstance(other, LaurentPoly2):
            return other
        if isinstance(other, int):
            return LaurentPoly2.constant(other)
        raise TypeError(f"Cannot combine LaurentPoly2 with {type(other).__name__}")

    def __add__(self, other) -> "LaurentPoly2":
        other = self._coerce(other)
        result = dict(self._terms)
        for k, v in other._terms.items():
            result[k] = result.get(k, 0) + v
        return LaurentPoly2(result)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly2":
        return LaurentPoly2({k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "LaurentPoly2":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentPoly2":
        return self._coerce(other) - self

    def __mul__(self, other) -> "LaurentPoly2":
        other = self._coerce(other)
        result: Dict[Exponent, int] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                key = (a1 + a2, b1 + b2)
                result[key] = result.get(key, 0) + c1 * c2
        return LaurentPoly2(result)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly2":
        if n < 0:
            if not self.is_monomial():
                raise ValueError("Negative powers are only defined for monomials")
            ((a, b), c), = self._terms.items()
            if abs(c) != 1:
                raise ValueError("Negative powers need a unit coefficient")
            return LaurentPoly2({(a * n, b * n): c if n % 2 else 1})
        result = LaurentPoly2.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, da: int, db: int) -> "LaurentPoly2":
        """Multiply by z^da * w^db."""
        return LaurentPoly2({(a + da, b + db): c for (a, b), c in self._terms.items()})

    def swap_variables(self) -> "LaurentPoly2":
        return LaurentPoly2({(b, a): c for (a, b), c in self._terms.items()})

    def evaluate(self, z: complex, w: complex, overrides: Dict[Exponent, complex] = None) -> complex:
        """Evaluate at (z, w); overrides replace coefficients per exponent."""
        overrides = overrides or {}
        total = 0j
        for (a, b), c in self._terms.items():
            total += overrides.get((a, b), c) * z ** a * w ** b
        return total

    def min_exponents(self) -> Exponent:
        return (min(a for a, _ in self._terms), min(b for _, b in self._terms))

    def to_text(self) -> str:
        """Sorted monomial list "c*z^a*w^b" joined with " + "."""
        if not self._terms:
            return "0"
        return " + ".join(f"{c}*z^{a}*w^{b}" for (a, b), c in sorted(self._terms.items()))

    def to_sympy(self) -> sympy.Expr:
        return sum((c * _Z ** a * _W ** b for (a, b), c in self._terms.items()), sympy.Integer(0))

    @classmethod
    def parse(cls, text: str) -> "LaurentPoly2":
        """Parse an expression in z and w such as "1 + z + w^-1"."""
        try:
            expr = sympy.sympify(text.replace("^", "**"), locals={"z": _Z, "w": _W})
        except (sympy.SympifyError, SyntaxError, TypeError) as e:
            raise StructureError(f"Cannot parse polynomial: {text!r}") from e

        extra = expr.free_symbols - {_Z, _W}
        if extra:
            raise StructureError(f"Unknown symbols in polynomial: {sorted(map(str, extra))}")

        expr = sympy.expand(expr)
        terms: Dict[Exponent, int] = {}
        for term in sympy.Add.make_args(expr):
            coeff, rest = term.as_coeff_Mul()
            powers = rest.as_powers_dict()
            a = powers.pop(_Z, 0)
            b = powers.pop(_W, 0)
            leftover = {k: v for k, v in powers.items() if k != 1}
            if leftover or not coeff.is_integer or not (sympy.sympify(a).is_integer and sympy.sympify(b).is_integer):
                raise StructureError(f"Not an integer Laurent polynomial term: {term}")
            key = (int(a), int(b))
            terms[key] = terms.get(key, 0) + int(coeff)
        return cls(terms)

    def _pretty_monomial(self, a: int, b: int) -> str:
        factors = []
        for var, e in (("z", a), ("w", b)):
            if e == 0:
                continue
            factors.append(var if e == 1 else f"{var}^{e}")
        return "*".join(factors)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        ordered = sorted(self._terms.items(), key=lambda kv: (kv[0][0] + kv[0][1], -kv[0][0]))
        pieces = []
        for i, ((a, b), c) in enumerate(ordered):
            mono = self._pretty_monomial(a, b)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if i == 0:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(f" + {body}" if c > 0 else f" - {body}")
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"LaurentPoly2({self.to_text()!r})"


Z = LaurentPoly2.monomial(1, 0)
W = LaurentPoly2.monomial(0, 1)
