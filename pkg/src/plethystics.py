"""
TilingForge - Plethystics

Truncated power series with exact rational coefficients, the plethystic
exponential and its inverse, and termination profiles of PE^-1.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from sympy import mobius as _sympy_mobius

from .models import TilingForgeError, format_coeff, parse_coeff


logger = logging.getLogger(__name__)

DEFAULT_ORDER = 30

Number = Union[int, Fraction, str]


class DivisionByZeroConstantError(TilingForgeError):
    """Raised when a denominator series has zero constant term."""
    pass


class UnitConstantError(TilingForgeError):
    """Raised when PE^-1 is applied to a series whose constant term is not 1."""
    pass


class TruncatedSeries:
    """Power series a_0 + a_1 t + ... + a_N t^N, exact to order N."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Number], order: int = DEFAULT_ORDER):
        if order < 0:
            raise ValueError(f"Truncation order must be non-negative, got {order}")
        values = [parse_coeff(c) for c in list(coeffs)[: order + 1]]
        values += [Fraction(0)] * (order + 1 - len(values))
        self.coeffs: List[Fraction] = values

    @classmethod
    def zero(cls, order: int = DEFAULT_ORDER) -> "TruncatedSeries":
        return cls([], order)

    @classmethod
    def one(cls, order: int = DEFAULT_ORDER) -> "TruncatedSeries":
        return cls([1], order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n] if 0 <= n <= self.order else Fraction(0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def _check(self, other: "TruncatedSeries") -> None:
        if other.order != self.order:
            raise ValueError(f"Order mismatch: {self.order} vs {other.order}")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries([a + b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        return TruncatedSeries([a - b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries([-a for a in self.coeffs], self.order)

    def __mul__(self, other: Union["TruncatedSeries", int, Fraction]) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            k = parse_coeff(other)
            return TruncatedSeries([k * a for a in self.coeffs], self.order)
        self._check(other)
        n = self.order
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j in range(n + 1 - i):
                out[i + j] += a * other.coeffs[j]
        return TruncatedSeries(out, n)

    __rmul__ = __mul__

    def substitute_power(self, k: int) -> "TruncatedSeries":
        """f(t^k) truncated at the same order."""
        out = [Fraction(0)] * (self.order + 1)
        for i in range(0, self.order // k + 1):
            out[i * k] = self.coeffs[i]
        return TruncatedSeries(out, self.order)

    def degree(self) -> Optional[int]:
        """Highest degree with a nonzero coefficient, None for the zero series."""
        for n in range(self.order, -1, -1):
            if self.coeffs[n] != 0:
                return n
        return None

    def to_list(self) -> List[str]:
        return [format_coeff(c) for c in self.coeffs]

    def __str__(self) -> str:
        pieces = []
        for n, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if n == 0 else ("t" if n == 1 else f"t^{n}")
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{format_coeff(mag)}*{mono}"
            else:
                body = format_coeff(mag)
            if not pieces:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(f" + {body}" if c > 0 else f" - {body}")
        pieces.append(f" + O(t^{self.order + 1})")
        return ("".join(pieces) if len(pieces) > 1 else "0" + pieces[0])

    def __repr__(self) -> str:
        return f"TruncatedSeries({self.to_list()!r}, order={self.order})"


def parse_coefficients(text: str) -> List[Fraction]:
    """Parse an ascending coefficient list such as "1,0,-1" or "1, 1/2"."""
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if not parts:
        raise ValueError("Empty coefficient list")
    return [parse_coeff(p) for p in parts]


def series_from_rational(
    numer: Sequence[Number],
    denom: Sequence[Number],
    order: int = DEFAULT_ORDER,
) -> TruncatedSeries:
    """Expand numer(t) / denom(t) by power-series long division."""
    num = [parse_coeff(c) for c in numer]
    den = [parse_coeff(c) for c in denom]
    if not den or den[0] == 0:
        raise DivisionByZeroConstantError("Denominator has zero constant term")

    out: List[Fraction] = []
    for n in range(order + 1):
        acc = num[n] if n < len(num) else Fraction(0)
        for j in range(1, min(n, len(den) - 1) + 1):
            acc -= den[j] * out[n - j]
        out.append(acc / den[0])
    return TruncatedSeries(out, order)


def mobius(k: int) -> int:
    """Moebius function with mu(1) = 1."""
    if k < 1:
        raise ValueError(f"Moebius function needs a positive integer, got {k}")
    return int(_sympy_mobius(k))


def _exp(s: TruncatedSeries) -> TruncatedSeries:
    """exp of a series with zero constant term: k e_k = sum j s_j e_(k-j)."""
    n = s.order
    e = [Fraction(1)] + [Fraction(0)] * n
    for k in range(1, n + 1):
        e[k] = sum((j * s[j] * e[k - j] for j in range(1, k + 1)), Fraction(0)) / k
    return TruncatedSeries(e, n)


def _log(g: TruncatedSeries) -> TruncatedSeries:
    """log of a series with unit constant term."""
    n = g.order
    log = [Fraction(0)] * (n + 1)
    for k in range(1, n + 1):
        acc = k * g[k] - sum((j * log[j] * g[k - j] for j in range(1, k)), Fraction(0))
        log[k] = acc / k
    return TruncatedSeries(log, n)


def pe(f: TruncatedSeries) -> TruncatedSeries:
    """Plethystic exponential exp(sum_n (f(t^n) - f(0)) / n)."""
    n = f.order
    shifted = TruncatedSeries([0] + f.coeffs[1:], n)
    s = TruncatedSeries.zero(n)
    for k in range(1, n + 1):
        s = s + shifted.substitute_power(k) * Fraction(1, k)
    return _exp(s)


def pe_product(f: TruncatedSeries) -> TruncatedSeries:
    """Plethystic exponential as the Euler product prod_n (1 - t^n)^(-a_n)."""
    n = f.order
    result = TruncatedSeries.one(n)
    for k in range(1, n + 1):
        a = f[k]
        if a == 0:
            continue
        # (1 - x)^(-a) = sum_m binom(a + m - 1, m) x^m
        factor = [Fraction(0)] * (n + 1)
        c = Fraction(1)
        for m in range(0, n // k + 1):
            if m > 0:
                c = c * (a + m - 1) / m
            factor[m * k] = c
        result = result * TruncatedSeries(factor, n)
    return result


def pl(g: TruncatedSeries) -> TruncatedSeries:
    """Plethystic logarithm sum_k mu(k)/k log g(t^k)."""
    if g[0] != 1:
        raise UnitConstantError(f"Constant term is {format_coeff(g[0])}, expected 1")
    n = g.order
    log = _log(g)
    out = TruncatedSeries.zero(n)
    for k in range(1, n + 1):
        mu = mobius(k)
        if mu:
            out = out + log.substitute_power(k) * Fraction(mu, k)
    return out


@dataclass
class PlethysticProfile:
    """Shape of PE^-1[g]: where it stops and the signs of its coefficients."""
    series: TruncatedSeries
    terminates: bool
    degree: Optional[int]
    positive: List[Tuple[int, Fraction]] = field(default_factory=list)
    negative: List[Tuple[int, Fraction]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pl": self.series.to_list(),
            "terminates": self.terminates,
            "degree": self.degree,
            "positive": [[d, format_coeff(c)] for d, c in self.positive],
            "negative": [[d, format_coeff(c)] for d, c in self.negative],
        }


def plethystic_profile(g: TruncatedSeries, margin: Optional[int] = None) -> PlethysticProfile:
    """
    Compute PE^-1[g] and report whether it looks like a finite polynomial.

    The series counts as terminating when its last nonzero coefficient sits
    at least margin degrees (default N/3) below the truncation order.
    Positive coefficients are generator candidates and negative ones
    relation candidates; mixed contributions within one degree are not
    separated.
    """
    f = pl(g)
    margin = f.order // 3 if margin is None else margin
    degree = f.degree()
    terminates = degree is None or degree <= f.order - margin
    positive = [(n, c) for n, c in enumerate(f.coeffs) if c > 0]
    negative = [(n, c) for n, c in enumerate(f.coeffs) if c < 0]
    logger.debug(f"PE^-1 profile: degree={degree}, terminates={terminates}")
    return PlethysticProfile(series=f, terminates=terminates, degree=degree, positive=positive, negative=negative)


def hilbert_series_conifold(order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """(1 - t^2) / (1 - t)^4."""
    return series_from_rational([1, 0, -1], [1, -4, 6, -4, 1], order)


def hilbert_series_c3(order: int = DEFAULT_ORDER) -> TruncatedSeries:
    """1 / (1 - t)^3."""
    return series_from_rational([1], [1, -3, 3, -1], order)
