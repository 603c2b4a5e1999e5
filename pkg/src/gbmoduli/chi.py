"""Exact Euler characteristics: Bernoulli numbers, zeta at negative odd
integers, mapping-class and symplectic groups, covering bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .errors import CapabilityError, DomainError, RangeError

MAX_BERNOULLI = 200

_B = [Fraction(1)]


def bernoulli(m: int) -> Fraction:
    """``B_m`` with ``B_1 = -1/2``, from ``sum_{j<=m} C(m+1, j) B_j = 0``.

    >>> bernoulli(12)
    Fraction(-691, 2730)
    """
    if m < 0:
        raise DomainError("Bernoulli index must be nonnegative")
    if m > MAX_BERNOULLI:
        raise CapabilityError(f"Bernoulli numbers are provided up to m = {MAX_BERNOULLI}")
    if m > 1 and m % 2:
        return Fraction(0)
    while len(_B) <= m:
        k = len(_B)
        _B.append(-sum(comb(k + 1, j) * _B[j] for j in range(k)) / (k + 1))
    return _B[m]


def zeta_neg(g: int) -> Fraction:
    """``zeta(1 - 2g) = -B_{2g} / 2g``."""
    if g < 1:
        raise DomainError("g must be >= 1")
    return -bernoulli(2 * g) / (2 * g)


def chi_punctured(g: int) -> Fraction:
    """Orbifold Euler characteristic of the mapping class group of a genus-g
    surface with one puncture, valid for g > 1."""
    if g <= 1:
        raise RangeError(f"the formula is stated for g > 1 only, got g = {g}")
    return zeta_neg(g)


def chi_closed(g: int) -> Fraction:
    if g <= 1:
        raise RangeError(f"the formula is stated for g > 1 only, got g = {g}")
    return zeta_neg(g) / (2 - 2 * g)


def chi_sp(n: int) -> Fraction:
    """``chi(Sp(2n, Z)) = prod_{k=1..n} zeta(1 - 2k)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    out = Fraction(1)
    for k in range(1, n + 1):
        out *= zeta_neg(k)
    return out


def chi_finite_cover(chi_orb, index: int) -> Fraction:
    """Euler characteristic of an ``index``-sheeted cover."""
    if index < 1:
        raise DomainError("index must be a positive integer")
    return Fraction(chi_orb) * index


def chi_orbifold(chi_cover, index: int) -> Fraction:
    """Inverse of :func:`chi_finite_cover`."""
    if index < 1:
        raise DomainError("index must be a positive integer")
    return Fraction(chi_cover) / index


@dataclass(frozen=True)
class TeichDims:
    d: int
    dim_T: int
    dim_C: int


def teich_dim(g: int, p: int) -> TeichDims:
    """Complexity ``d = 3g - 3 + p``, Teichmuller dimension and curve-complex dimension."""
    if g < 0 or p < 0:
        raise DomainError("g and p must be nonnegative")
    d = 3 * g - 3 + p
    if d <= 0:
        raise RangeError(f"3g - 3 + p = {d} must be positive")
    return TeichDims(d, 2 * d, d - 1)


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"
