"""Integer-valued polynomials with rational coefficients.

Coefficients are kept over one common denominator, so ``P(x) = sum(n_j x^j) / v``.
All evaluation is exact; results outside the signed 128-bit range raise
:class:`IntegerOverflow` instead of silently growing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, NamedTuple, Sequence

from .errors import DegenerateInput, IntegerOverflow, NonIntegerValued

INT128_MAX = 2**127 - 1
MAX_DEGREE = 8


def check_int128(value: int, what: str = "value") -> int:
    if not -INT128_MAX <= value <= INT128_MAX:
        raise IntegerOverflow(f"{what} {value} exceeds the signed 128-bit range")
    return value


class Decomposition(NamedTuple):
    """``a_j = b_j * u / v`` for ``j = 1..d`` with ``gcd(b) = 1``."""

    u: int
    v: int
    b: tuple[int, ...]


@dataclass(frozen=True)
class IntPolynomial:
    numerators: tuple[int, ...]
    denominator: int = 1

    def __post_init__(self):
        nums = tuple(int(c) for c in self.numerators)
        den = int(self.denominator)
        if not nums:
            raise DegenerateInput("polynomial needs at least one coefficient")
        if den == 0:
            raise DegenerateInput("zero denominator")
        if den < 0:
            nums, den = tuple(-c for c in nums), -den
        while len(nums) > 1 and nums[-1] == 0:
            nums = nums[:-1]
        g = reduce(math.gcd, nums, den)
        if g > 1:
            nums, den = tuple(c // g for c in nums), den // g
        object.__setattr__(self, "numerators", nums)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def from_coefficients(cls, coeffs: Iterable) -> "IntPolynomial":
        """Build from ``a_0, ..., a_d`` given as ints, Fractions or strings like ``"1/2"``."""
        fr = [Fraction(c) for c in coeffs]
        den = reduce(math.lcm, (c.denominator for c in fr), 1)
        return cls(tuple(int(c * den) for c in fr), den)

    @classmethod
    def parse(cls, text: str) -> "IntPolynomial":
        """Parse ``"c0/den,c1/den,..."`` or the integer shorthand ``"c0,c1,..."``."""
        parts = [s.strip() for s in text.split(",")]
        if not parts or any(not s for s in parts):
            raise ValueError(f"malformed polynomial spec {text!r}")
        return cls.from_coefficients(parts)

    @classmethod
    def monomial(cls, d: int) -> "IntPolynomial":
        return cls((0,) * d + (1,))

    @property
    def degree(self) -> int:
        return len(self.numerators) - 1

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.denominator) for c in self.numerators)

    @property
    def leading(self) -> Fraction:
        return Fraction(self.numerators[-1], self.denominator)

    def __call__(self, k: int) -> int:
        return evaluate(self, k)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.coefficients)

    def shifted(self, c: int) -> "IntPolynomial":
        """``P + c`` (changes only the free coefficient)."""
        nums = list(self.numerators)
        nums[0] += c * self.denominator
        return IntPolynomial(tuple(nums), self.denominator)

    def values(self, ks: Sequence[int]) -> list[int]:
        return [evaluate(self, k) for k in ks]

    @cached_property
    def decomposition(self) -> Decomposition:
        return decompose(self)


def evaluate(P: IntPolynomial, k: int) -> int:
    """Exact ``P(k)`` by Horner's rule on the numerators."""
    acc = 0
    bound = INT128_MAX * P.denominator
    for c in reversed(P.numerators):
        acc = acc * k + c
        if abs(acc) > bound:
            raise IntegerOverflow(f"P({k}) overflows the 128-bit range")
    q, rem = divmod(acc, P.denominator)
    if rem:
        raise NonIntegerValued(f"P({k}) = {Fraction(acc, P.denominator)} is not an integer")
    return check_int128(q, f"P({k})")


def check_integer_valued(P: IntPolynomial) -> bool:
    """True iff ``P(Z) ⊆ Z``.

    A degree-d polynomial maps Z to Z exactly when P(0), ..., P(d) are
    integers: those values fix the Newton forward-difference expansion
    ``P(x) = sum_i Δ^i P(0) * C(x, i)``, whose coefficients are then integers,
    and binomial coefficients are integer-valued.
    """
    for j in range(P.degree + 1):
        num = sum(c * j**i for i, c in enumerate(P.numerators))
        if num % P.denominator:
            return False
    return True


def require_integer_valued(P: IntPolynomial) -> None:
    if not check_integer_valued(P):
        raise NonIntegerValued(f"polynomial {P} does not map Z to Z")


def decompose(P: IntPolynomial) -> Decomposition:
    a = P.coefficients[1:]
    if not any(a):
        raise DegenerateInput("a_1 = ... = a_d = 0; nothing to decompose")
    v = reduce(math.lcm, (c.denominator for c in a), 1)
    scaled = [int(c * v) for c in a]
    u = reduce(math.gcd, scaled, 0)
    return Decomposition(u=u, v=v, b=tuple(s // u for s in scaled))


def vandermonde_bound(d: int) -> int:
    """``prod_{0<=i<j<=d} (j - i)``; the common denominator always divides it."""
    return math.prod(j - i for j in range(d + 1) for i in range(j))
