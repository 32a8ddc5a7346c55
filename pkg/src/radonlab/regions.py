"""Exact exponent regions in the (1/p, 1/q) plane.

Every region is a finite list of linear constraints
``cx*x + cy*y + cl*lam + c0 (> or >=) 0`` with ``x = 1/p``, ``y = 1/q``,
evaluated in :class:`fractions.Fraction` arithmetic only.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidExponent

INF = "inf"


def parse_rational(value) -> Fraction | str:
    """Exact exponent from ``7/4``, ``2``, ``Fraction`` or ``inf``; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INF
        try:
            return Fraction(s)
        except ValueError:
            pass
    raise InvalidExponent(f"not an exact rational exponent: {value!r}")


def reciprocal(p) -> Fraction:
    p = parse_rational(p)
    if p == INF:
        return Fraction(0)
    if p < 1:
        raise InvalidExponent(f"exponent {p} is below 1")
    return 1 / p


def dual(p):
    """Conjugate exponent; 1 and inf swap."""
    x = reciprocal(p)
    y = 1 - x
    return INF if y == 0 else 1 / y


@dataclass(frozen=True)
class ExponentPair:
    """``(p, q)`` stored through the exact reciprocals ``(1/p, 1/q)``."""

    x: Fraction
    y: Fraction

    def __post_init__(self):
        for v in (self.x, self.y):
            if not 0 <= v <= 1:
                raise InvalidExponent("reciprocal exponents must lie in [0, 1]")

    @classmethod
    def of(cls, p, q) -> "ExponentPair":
        return cls(reciprocal(p), reciprocal(q))

    @property
    def p(self):
        return INF if self.x == 0 else 1 / self.x

    @property
    def q(self):
        return INF if self.y == 0 else 1 / self.y

    @property
    def gap(self) -> Fraction:
        """``1/p - 1/q``."""
        return self.x - self.y


@dataclass(frozen=True)
class Constraint:
    cx: Fraction
    cy: Fraction
    c0: Fraction
    strict: bool
    text: str
    cl: Fraction = Fraction(0)
    diagonal: bool = False

    def value(self, x: Fraction, y: Fraction, lam: Fraction = Fraction(0)) -> Fraction:
        return self.cx * x + self.cy * y + self.cl * lam + self.c0

    def holds(self, x, y, lam=Fraction(0)) -> bool:
        v = self.value(x, y, lam)
        return v > 0 if self.strict else v >= 0


def _c(cx, cy, c0, strict, text, cl=0, diagonal=False) -> Constraint:
    return Constraint(Fraction(cx), Fraction(cy), Fraction(c0), strict, text, Fraction(cl), diagonal)


_DIAG = _c(1, -1, 0, False, "1/q <= 1/p", diagonal=True)


class Which(str, enum.Enum):
    T2 = "t2"
    POLYRANGE = "polyrange"
    NECESSARY = "necessary"
    HIGH_NECESSARY = "high-necessary"
    CONJ_I = "conj-i"


def constraints(which: Which | str, d: int = 2) -> list[Constraint]:
    which = Which(which)
    if d < 1:
        raise ValueError("degree must be positive")
    D = d * d + d
    if which == Which.T2:
        return [_DIAG, _c(-1, 2, 0, True, "2/q > 1/p"), _c(-2, 1, 1, True, "1/q > 2/p - 1")]
    if which == Which.POLYRANGE:
        return [_DIAG,
                _c(-(D - 1), D + 1, 0, True, f"{D + 1}/q > {D - 1}/p"),
                _c(-(D + 1), D - 1, 2, True, f"{D - 1}/q > {D + 1}/p - 2")]
    if which == Which.NECESSARY:
        return [_DIAG,
                _c(-(d - 1), d, 0, False, f"{d}/q >= {d - 1}/p"),
                _c(-d, d - 1, 1, False, f"{d - 1}/q >= {d}/p - 1")]
    if which == Which.HIGH_NECESSARY:
        return [_DIAG,
                _c(-(D - 2), D, 0, False, f"{D}/q >= {D - 2}/p"),
                _c(-D, D - 2, 2, False, f"{D - 2}/q >= {D}/p - 2")]
    # 1 - lam <= d(1/p - 1/q), 1/q < lam, 1 - lam < 1/p
    return [_c(d, -d, -1, False, f"1 - lam <= {d}(1/p - 1/q)", cl=1),
            _c(0, -1, 0, True, "1/q < lam", cl=1),
            _c(1, 0, -1, True, "1 - lam < 1/p", cl=1)]


@dataclass(frozen=True)
class Verdict:
    member: bool
    evaluated: list[dict]

    def to_dict(self) -> dict:
        return {"member": self.member, "constraints": self.evaluated}


def evaluate(which, e: ExponentPair, d: int = 2, lam=None) -> Verdict:
    which = Which(which)
    if which == Which.CONJ_I:
        if lam is None:
            raise ValueError("conj-i needs lambda")
        lam = Fraction(lam) if not isinstance(lam, Fraction) else lam
        if not 0 < lam < 1:
            raise InvalidExponent("lambda must lie in (0, 1)")
    lam = Fraction(0) if lam is None else lam
    rows = []
    for c in constraints(which, d):
        v = c.value(e.x, e.y, lam)
        rows.append({"constraint": c.text, "strict": c.strict, "value": str(v),
                     "holds": c.holds(e.x, e.y, lam)})
    return Verdict(all(r["holds"] for r in rows), rows)


def member(which, e: ExponentPair, d: int = 2, lam=None) -> bool:
    return evaluate(which, e, d, lam).member


# ---------------------------------------------------------------------------
# ranges on the line q = p'

@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool
    hi_closed: bool

    def __contains__(self, v) -> bool:
        v = Fraction(v)
        above = v > self.lo or (self.lo_closed and v == self.lo)
        below = v < self.hi or (self.hi_closed and v == self.hi)
        return above and below

    def __str__(self) -> str:
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


SPECIAL = {"polyrangespecial": Which.POLYRANGE, "polyrangeconj": Which.NECESSARY,
           "high_special": Which.HIGH_NECESSARY}


def special_range(d: int, variant: str) -> Interval:
    """The p-range of a region restricted to ``q = p'``, as an interval in p.

    Derived by intersecting each constraint with ``y = 1 - x``, so no closed
    form is hard-coded; the tests compare against the printed ones.
    """
    which = SPECIAL[variant]
    # bounds on x = 1/p; the line runs over x in [1/2, 1] below the diagonal
    lo, lo_closed = Fraction(1, 2), True
    hi, hi_closed = Fraction(1), True
    for c in constraints(which, d):
        a = c.cx - c.cy          # coefficient of x after y = 1 - x
        b = c.cy + c.c0
        if a == 0:
            if not (b > 0 if c.strict else b >= 0):
                raise ValueError("empty range")
            continue
        t = -b / a
        if a > 0:   # x >(=) t
            if t > lo or (t == lo and c.strict):
                lo, lo_closed = t, not c.strict
        else:       # x <(=) t
            if t < hi or (t == hi and c.strict):
                hi, hi_closed = t, not c.strict
    # p = 1/x reverses the order
    return Interval(1 / hi, 1 / lo, hi_closed, lo_closed)


# ---------------------------------------------------------------------------
# fractional-integral bookkeeping

@dataclass(frozen=True)
class LambdaRange:
    lo: Fraction
    hi: Fraction
    lo_open: bool = True
    hi_open: bool = True

    def __contains__(self, lam) -> bool:
        lam = Fraction(lam)
        return (lam > self.lo if self.lo_open else lam >= self.lo) and (lam < self.hi if self.hi_open else lam <= self.hi)

    def to_dict(self) -> dict:
        return {"lo": str(self.lo), "hi": str(self.hi), "lo_open": self.lo_open, "hi_open": self.hi_open}


def ia_bridge(p, q, d: int, direction: int):
    """``delta = d(1/p - 1/q)``.

    Direction 1 (improving bound gives a fractional bound): ``lam`` in
    ``(1 - min(1, delta), 1)``. Direction 2 (fractional bound gives an improving
    bound): the single value ``lam = 1 - delta``.
    """
    e = ExponentPair.of(p, q)
    delta = d * e.gap
    if direction == 1:
        return LambdaRange(1 - min(Fraction(1), delta), Fraction(1))
    if direction == 2:
        return 1 - delta
    raise ValueError("direction is 1 or 2")


def fractional_gate(part: int, d: int, p, q, lam) -> bool:
    """``0 < 1 - lam < c (1/p - 1/q)`` with ``c = d`` (part 1) or ``d(d+1)/2`` (part 2), d >= 3."""
    if d < 3:
        return False
    e = ExponentPair.of(p, q)
    lam = Fraction(lam)
    c = d if part == 1 else Fraction(d * (d + 1), 2)
    return 0 < 1 - lam < c * e.gap


# ---------------------------------------------------------------------------
# polygon geometry

def _box() -> list[Constraint]:
    return [_c(1, 0, 0, False, "x >= 0"), _c(-1, 0, 1, False, "x <= 1"),
            _c(0, 1, 0, False, "y >= 0"), _c(0, -1, 1, False, "y <= 1")]


def closure_vertices(cons: list[Constraint]) -> list[tuple[Fraction, Fraction]]:
    """Vertices of the closed polygon ``{cons non-strict} ∩ [0,1]^2``."""
    allc = cons + _box()
    pts = set()
    for a, b in itertools.combinations(allc, 2):
        det = a.cx * b.cy - a.cy * b.cx
        if det == 0:
            continue
        x = (-a.c0 * b.cy + b.c0 * a.cy) / det
        y = (-a.cx * b.c0 + b.cx * a.c0) / det
        if all(c.value(x, y) >= 0 for c in allc):
            pts.add((x, y))
    return sorted(pts)


def _faces(verts, c: Constraint):
    """Points representing the set where ``c`` is tight on the closed polygon."""
    tight = [v for v in verts if c.value(*v) == 0]
    reps = list(tight)
    for a, b in itertools.combinations(tight, 2):
        reps.append(((a[0] + b[0]) / 2, (a[1] + b[1]) / 2))
    return reps


@dataclass(frozen=True)
class Containment:
    d: int
    vertices: list
    closure_inside: bool      # every vertex of cl(inner) satisfies outer
    strictly_inside: bool     # no point of inner meets an off-diagonal outer boundary

    @property
    def ok(self) -> bool:
        return self.closure_inside and self.strictly_inside


def contained(inner: Which, outer: Which, d: int) -> Containment:
    """Vertex-enumeration check of ``inner ⊆ outer``, away from outer's off-diagonal edges.

    Linear constraints hold on a polygon iff they hold at its vertices. The
    set where an outer constraint is tight meets the closed inner polygon in a
    face; a face lies in ``inner`` iff its vertices or midpoints do, since
    every inner constraint is constant in sign on a face's relative interior.
    The shared diagonal ``1/q <= 1/p`` is excluded from the strictness test.
    """
    ic = constraints(inner, d)
    oc = constraints(outer, d)
    verts = closure_vertices(ic)
    closure_ok = all(c.value(*v) >= 0 for v in verts for c in oc)
    strict_ok = True
    for c in oc:
        if c.diagonal:
            continue
        for pt in _faces(verts, c):
            if all(k.holds(*pt) for k in ic):
                strict_ok = False
    return Containment(d, verts, closure_ok, strict_ok)
