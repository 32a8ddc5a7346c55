"""Transfer constructions between operators, as exactly checkable statements.

* quadratic: ``A_N^P f(x) <= (2a + b/N) A_{2aN+b}^{x^2} g(4a(x+c) - b^2)``
  for ``P = ax^2 + bx + c`` and ``g(4am) = f(m)``;
* projection: a signal g on Z lifts to f on Z^d with
  ``Ã_N f(x) = A_N g(a.x + r)`` on ``[1,N] x ... x [1,N^{d-1}] x Z``;
* dyadic bridges between ``A_N`` and the fractional integral ``I_lam``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .averages import MomentCurveAverage, PolynomialAverage, exact_truncation, polynomial_shifts, shift_sum
from .errors import DegenerateInput, NegativeInput
from .poly import IntPolynomial, require_integer_valued
from .signal import Signal, as_exponent, check_cells, lp_norm

SQUARE = IntPolynomial.monomial(2)


def _require_nonneg(f: Signal) -> None:
    if not f.is_nonnegative():
        raise NegativeInput("transfer checks are stated for nonnegative f")


# ---------------------------------------------------------------------------
# quadratic completing-the-square

@dataclass(frozen=True)
class QuadraticTriple:
    a: int
    b: int = 0
    c: int = 0

    def __post_init__(self):
        if self.a < 1 or self.b < 0 or self.c < 0:
            raise DegenerateInput("need integers a >= 1 and b, c >= 0")

    @classmethod
    def parse(cls, text: str) -> "QuadraticTriple":
        a, b, c = (int(s) for s in text.split(","))
        return cls(a, b, c)

    @property
    def polynomial(self) -> IntPolynomial:
        return IntPolynomial((self.c, self.b, self.a))

    def factor(self, N: int) -> float:
        return 2 * self.a + self.b / N

    def long_length(self, N: int) -> int:
        return 2 * self.a * N + self.b


def quadratic_dilate(f: Signal, a: int) -> Signal:
    """``g(4a m) = f(m)``, zero off the lattice ``4a Z``."""
    if a < 1:
        raise ValueError("a must be positive")
    step = 4 * a
    L = f.shape[0]
    n = step * (L - 1) + 1
    check_cells((n,))
    out = np.zeros(n)
    out[::step] = f.values
    return Signal(out, step * f.offsets[0])


@dataclass(frozen=True)
class TransferReport:
    triple: QuadraticTriple
    N: int
    min_slack: float
    argmin: int
    lhs_norm: float
    rhs_norm: float

    def ok(self, tol: float = 1e-12) -> bool:
        return self.min_slack >= -tol


def quadratic_transfer_check(t: QuadraticTriple, N: int, f: Signal, p=None) -> TransferReport:
    """Evaluate both sides of the completing-the-square bound on every x.

    With ``p`` given, also reports ``||A_N^P f||_{p'}`` against
    ``(2a + b/N) ||A^{x^2}_{2aN+b} g||_{p'}``, the norm form of the same bound.
    """
    _require_nonneg(f)
    lhs = PolynomialAverage(t.polynomial, N)(f)
    g = quadratic_dilate(f, t.a)
    h = PolynomialAverage(SQUARE, t.long_length(N))(g)
    x = lhs.indices()
    y = 4 * t.a * (x + t.c) - t.b**2
    rhs = t.factor(N) * h.sample(y)
    slack = rhs - lhs.values
    i = int(np.argmin(slack))
    if p is None:
        ln = rn = math.nan
    else:
        pd = _dual(as_exponent(p))
        ln, rn = lp_norm(lhs, pd), t.factor(N) * lp_norm(h, pd)
    return TransferReport(t, N, float(slack[i]), int(x[i]), ln, rn)


def _dual(p: float) -> float:
    return math.inf if p == 1 else (1.0 if math.isinf(p) else p / (p - 1))


def abc_normalization(t: QuadraticTriple, N: int, p) -> float:
    """``(2a + b/N)(2aN+b)^{-2(1/p - 1/p')}``."""
    p = as_exponent(p)
    return t.factor(N) * t.long_length(N) ** (-2.0 * (1.0 / p - 1.0 / _dual(p)))


def abc_normalized_ratio(t: QuadraticTriple, N: int, f: Signal, p) -> float:
    """``||A_N^P f||_{p'} / [(2a + b/N)(2aN+b)^{-2(1/p - 1/p')} ||f||_p]``."""
    p = as_exponent(p)
    num = lp_norm(PolynomialAverage(t.polynomial, N)(f), _dual(p))
    return num / (abc_normalization(t, N, p) * lp_norm(f, p))


# ---------------------------------------------------------------------------
# projection from the moment curve

@dataclass(frozen=True)
class Lift:
    """A lifted signal plus the bookkeeping needed to check its norm."""

    P: IntPolynomial
    N: int
    r: int
    f: Signal
    multiplicity: np.ndarray   # mult[i] = #{x : a.x + r = g.offset + i}
    g: Signal

    @property
    def d(self) -> int:
        return self.P.degree

    @property
    def box_count(self) -> int:
        """``prod_{j<d} 2N^j``, the trivial bound on every multiplicity."""
        return math.prod(2 * self.N**j for j in range(1, self.d))

    def norm_constant(self, p) -> float:
        """Measured ``||f||_p / (N^{(d-1)d/(2p)} ||g||_p)``."""
        p = as_exponent(p)
        return lp_norm(self.f, p) / (self.N ** ((self.d - 1) * self.d / (2 * p)) * lp_norm(self.g, p))

    def norm_from_multiplicity(self, p) -> float:
        """``(sum_n |g(n)|^p mult(n))^{1/p}``, an independent route to ``||f||_p``."""
        p = as_exponent(p)
        return float(np.sum(np.abs(self.g.values) ** p * self.multiplicity)) ** (1.0 / p)


def _normalized(P: IntPolynomial) -> IntPolynomial:
    return P.shifted(-P(0))


def _last_axis_range(b, u, v, r, N, n_lo, n_hi):
    """x_d range where ``u (b.x)/v + r`` can land in ``[n_lo, n_hi]`` for x in the box."""
    d = len(b)
    B_lo = sum(min(bj, bj * 2 * N**j) for j, bj in enumerate(b[:-1], start=1))
    B_hi = sum(max(bj, bj * 2 * N**j) for j, bj in enumerate(b[:-1], start=1))
    cands = [(v * (n - r) - u * B) / (u * b[-1]) for n in (n_lo, n_hi) for B in (B_lo, B_hi)]
    return math.floor(min(cands)), math.ceil(max(cands))


def _lift_grid(b, u, v, r, N, x_last):
    """Coordinate grids of the box, ``b.x`` and its integrality mask."""
    d = len(b)
    axes = [np.arange(1, 2 * N**j + 1, dtype=np.int64) for j in range(1, d)]
    axes.append(np.arange(x_last[0], x_last[1] + 1, dtype=np.int64))
    check_cells([len(a) for a in axes])
    S = np.zeros([len(a) for a in axes], dtype=np.int64)
    for j, (bj, ax) in enumerate(zip(b, axes)):
        shape = [1] * d
        shape[j] = len(ax)
        S = S + bj * ax.reshape(shape)
    valid = S % v == 0
    n = np.where(valid, u * (S // v) + r, 0)
    return axes, valid, n


def projection_lift(g: Signal, P: IntPolynomial, N: int, r: int = 0) -> Lift:
    """``f(x) = prod_{j<d} 1_{[1,2N^j]}(x_j) g(a.x + r) 1_Z(a.x)``.

    The free coefficient of P only translates ``A_N``, so the lift uses
    ``P - P(0)``; :func:`lift_identity_check` accounts for it.
    """
    require_integer_valued(P)
    Q = _normalized(P)
    dec = Q.decomposition
    b = list((0,) * (Q.degree - len(dec.b)) + dec.b)
    if not 0 <= r < dec.u:
        raise ValueError(f"residue r must lie in [0, {dec.u})")
    n_lo, n_hi = g.offsets[0], g.upper[0]
    xr = _last_axis_range(b, dec.u, dec.v, r, N, n_lo, n_hi)
    axes, valid, n = _lift_grid(b, dec.u, dec.v, r, N, xr)
    vals = np.where(valid, g.sample(n.ravel()).reshape(n.shape), 0.0)
    hit = valid & (n >= n_lo) & (n <= n_hi)
    mult = np.bincount((n[hit] - n_lo).ravel(), minlength=n_hi - n_lo + 1)
    f = Signal(vals, tuple(int(a[0]) for a in axes))
    return Lift(P, N, r, f, mult, g)


@dataclass(frozen=True)
class LiftIdentity:
    max_abs_diff: float
    cells: int

    def ok(self, tol: float = 1e-12) -> bool:
        return self.max_abs_diff <= tol


def lift_identity_check(lift: Lift) -> LiftIdentity:
    """Compare ``Ã_N f(x)`` with ``A_N^P g(a.x + r - P(0))`` on the domain.

    The domain is ``[1,N] x [1,N^2] x ... x [1,N^{d-1}] x Z`` restricted to
    ``a.x`` integral, with x_d covering every cell where either side can be
    nonzero.
    """
    P, N, r, g = lift.P, lift.N, lift.r, lift.g
    d = P.degree
    Q = _normalized(P)
    dec = Q.decomposition
    b = list((0,) * (d - len(dec.b)) + dec.b)
    big = MomentCurveAverage(d, N)(lift.f)
    small = PolynomialAverage(Q, N)(g)
    lo_d = min(big.offsets[-1], _last_axis_range(b, dec.u, dec.v, r, N, small.offsets[0], small.upper[0])[0])
    hi_d = max(big.upper[-1], _last_axis_range(b, dec.u, dec.v, r, N, small.offsets[0], small.upper[0])[1])
    axes = [np.arange(1, N**j + 1, dtype=np.int64) for j in range(1, d)]
    axes.append(np.arange(lo_d, hi_d + 1, dtype=np.int64))
    check_cells([len(a) for a in axes])
    grids = np.meshgrid(*axes, indexing="ij")
    S = sum(bj * gj for bj, gj in zip(b, grids))
    valid = S % dec.v == 0
    pts = np.stack([gj[valid] for gj in grids], axis=1)
    n = dec.u * (S[valid] // dec.v) + r
    diff = np.abs(big.sample(pts) - small.sample(n))
    return LiftIdentity(float(diff.max()) if len(diff) else 0.0, int(valid.sum()))


@dataclass(frozen=True)
class SublatticeBound:
    lhs: float              # sum over the v-sublattice, enumerated directly
    weighted: float         # sum_n c(n) |A_N g(n)|^q from residue counts
    full: float             # ||Ã_N f||_q^q
    base: float             # sum_{n in r + uZ} |A_N g(n)|^q
    c_min: int
    N: int
    d: int

    @property
    def normalized_c(self) -> float:
        return self.c_min / self.N ** ((self.d - 1) * self.d / 2)

    def ok(self, rtol: float = 1e-12) -> bool:
        tol = rtol * max(1.0, self.full)
        return (self.lhs <= self.full + tol and self.lhs >= self.c_min * self.base - tol
                and abs(self.lhs - self.weighted) <= 1e-9 * max(1.0, self.lhs))


def sublattice_lower_bound(lift: Lift, q) -> SublatticeBound:
    """Both steps of the lower bound for ``||Ã_N f||_q^q``.

    Restricting to ``x in (vZ)^d`` with ``x_j <= N^j`` (j < d) gives
    ``a.x = u * sum_j b_j y_j`` for ``y = x / v``. A residue ``n in r + uZ``
    is then hit once for every ``(y_1..y_{d-1})`` in the box whose
    ``sum_{j<d} b_j y_j`` is congruent to ``(n - r)/u`` modulo ``|b_d|``;
    ``c_min`` is the smallest such count over all residues.
    """
    q = as_exponent(q)
    P, N, r, g = lift.P, lift.N, lift.r, lift.g
    d = P.degree
    Q = _normalized(P)
    dec = Q.decomposition
    b = list((0,) * (d - len(dec.b)) + dec.b)
    u, v = dec.u, dec.v
    h = PolynomialAverage(Q, N)(g)
    hv = np.abs(h.values) ** q
    h_lo, h_hi = h.offsets[0], h.upper[0]

    # direct enumeration over the sublattice
    y_axes = [np.arange(1, N**j // v + 1, dtype=np.int64) for j in range(1, d)]
    if any(len(a) == 0 for a in y_axes):
        B = np.zeros(0, dtype=np.int64)
    elif d > 1:
        B = sum(bj * gj for bj, gj in zip(b, np.meshgrid(*y_axes, indexing="ij"))).ravel()
    else:
        B = np.zeros(1, dtype=np.int64)
    lhs = 0.0
    bd = b[-1]
    for Bi in B.tolist():
        # n = r + u (Bi + bd * yd) inside the support of A_N g
        lo = (h_lo - r) / u - Bi
        hi = (h_hi - r) / u - Bi
        ya, yb = sorted((lo / bd, hi / bd))
        yd = np.arange(math.ceil(ya), math.floor(yb) + 1, dtype=np.int64)
        n = r + u * (Bi + bd * yd)
        inside = (n >= h_lo) & (n <= h_hi)
        lhs += float(np.sum(hv[n[inside] - h_lo]))

    # residue counts
    mod = abs(bd)
    counts = np.bincount(np.mod(B, mod), minlength=mod) if len(B) else np.zeros(mod, dtype=np.int64)
    c_min = int(counts.min())
    n_all = np.arange(h_lo, h_hi + 1)
    on = (n_all - r) % u == 0
    t = ((n_all[on] - r) // u) % mod
    weighted = float(np.sum(counts[t] * hv[on]))
    base = float(np.sum(hv[on]))
    full = lp_norm(MomentCurveAverage(d, N)(lift.f), q) ** q
    return SublatticeBound(lhs, weighted, full, base, c_min, N, d)


# ---------------------------------------------------------------------------
# averages <-> fractional integrals

@dataclass(frozen=True)
class BridgeReport:
    lam: float
    q: float
    K: int
    J: int
    # pointwise A_N f <= N^{lam-1} I_lam f, per N
    pointwise_min_slack: dict
    # pointwise I_K f <= 4 sum_j 2^{(1-lam)j} A_{2^j} f
    dyadic_min_slack: float
    norm_lhs: float
    norm_rhs: float

    @property
    def norm_ratio(self) -> float:
        return self.norm_lhs / self.norm_rhs if self.norm_rhs else math.inf

    def ok(self, tol: float = 1e-12) -> bool:
        return (all(s >= -tol for s in self.pointwise_min_slack.values())
                and self.dyadic_min_slack >= -tol and self.norm_lhs <= self.norm_rhs * (1 + tol))


DYADIC_CONSTANT = 4.0


def dyadic_levels(K: int) -> int:
    """``J = max(1, ceil(log2 K))`` so that ``2^J >= K``; J >= 1 covers the k = 1 term."""
    return max(1, (K - 1).bit_length())


def dyadic_bridge(P: IntPolynomial, lam: float, f: Signal, q=2, Ns=(4, 16, 64), K: int | None = None) -> BridgeReport:
    """Check both relations between averages and ``I_lam`` on a nonnegative f.

    Pointwise ``A_N f <= N^{lam-1} I_lam f`` holds because ``k^{-lam} >= N^{-lam}``
    for ``k <= N``; ``I_lam`` is evaluated with the exact truncation for the
    window of ``A_N f``.

    Dyadic domination: splitting ``k <= K`` into blocks ``(2^{j-1}, 2^j]`` gives
    at most ``2^{j-1}`` terms each weighted ``<= 2^{-lam(j-1)}``, so the block is
    ``<= 2^lam 2^{(1-lam)j} A_{2^j} f <= 2 * 2^{(1-lam)j} A_{2^j} f``; the k = 1
    term is ``<= 2 A_2 f``. Summing, ``I_K f <= 4 sum_{j=1}^J 2^{(1-lam)j} A_{2^j} f``.
    """
    _require_nonneg(f)
    require_integer_valued(P)
    qf = as_exponent(q)
    pointwise = {}
    for N in Ns:
        A = PolynomialAverage(P, N)(f)
        lo, hi = A.offsets[0], A.upper[0]
        k_exact = max(exact_truncation(P, f, (lo, hi)), N)
        w = np.arange(1, k_exact + 1, dtype=np.float64) ** (-float(lam))
        I = shift_sum(f, polynomial_shifts(P, k_exact), w).window((lo,), (hi,))
        slack = N ** (lam - 1.0) * I.values - A.values
        tol_scale = np.maximum(1.0, np.abs(A.values))
        pointwise[N] = float(np.min(slack / tol_scale))

    K = K or max(Ns)
    J = dyadic_levels(K)
    w = np.arange(1, K + 1, dtype=np.float64) ** (-float(lam))
    I = shift_sum(f, polynomial_shifts(P, K), w)
    pieces = [(DYADIC_CONSTANT * 2.0 ** ((1.0 - lam) * j), PolynomialAverage(P, 2**j)(f)) for j in range(1, J + 1)]
    lo = min([I.offsets[0]] + [a.offsets[0] for _, a in pieces])
    hi = max([I.upper[0]] + [a.upper[0] for _, a in pieces])
    rhs = np.zeros(hi - lo + 1)
    for c, a in pieces:
        rhs += c * a.window((lo,), (hi,)).values
    lhs = I.window((lo,), (hi,)).values
    dyadic_slack = float(np.min((rhs - lhs) / np.maximum(1.0, lhs)))
    norm_lhs = lp_norm(I, qf)
    norm_rhs = sum(c * lp_norm(a, qf) for c, a in pieces)
    return BridgeReport(float(lam), qf, K, J, pointwise, dyadic_slack, norm_lhs, norm_rhs)
