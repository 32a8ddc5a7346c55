"""l^p -> l^q ratio measurements, extremizer families and near-extremal search.

Operator norms between different l^p spaces are not computable exactly, so
everything here produces *lower* bounds: explicit families with closed-form
ratios, and a seeded search that reports the best ratio it finds.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .averages import MomentCurveAverage, PolynomialAverage
from .errors import NonInjective, ZeroInput
from .fitting import FitResult, loglog_fit
from .signal import AnySignal, Signal, SparseSignal, as_exponent, check_cells, lp_norm
from .weyl import mean_value_exact

Operator = PolynomialAverage | MomentCurveAverage


@dataclass(frozen=True)
class RatioSample:
    N: int
    p: float
    q: float
    ratio: float
    tag: str = ""
    meta: dict = field(default_factory=dict, compare=False)


def ratio(op: Operator, f: AnySignal, p, q, tag: str = "") -> RatioSample:
    """``||op f||_q / ||f||_p``."""
    den = lp_norm(f, p)
    if den == 0:
        raise ZeroInput("ratio of the zero signal is undefined")
    return RatioSample(op.N, as_exponent(p), as_exponent(q), lp_norm(op(f), q) / den, tag)


# ---------------------------------------------------------------------------
# extremizer families

class Family(str, enum.Enum):
    CURVE_INDICATOR = "a"   # 1_{P(1..N)}
    DELTA = "b"             # delta_0 on Z
    INTERVAL = "c"          # 1_{1..2P(N)}
    MOMENT_CURVE = "d"      # 1_{(m, m^2, ..., m^d): m <= N}
    MOMENT_DELTA = "e"      # delta_0 on Z^d
    BOX = "f"               # 1_{1..2N} x ... x 1_{1..2N^d}

    @property
    def is_multidim(self) -> bool:
        return self in (Family.MOMENT_CURVE, Family.MOMENT_DELTA, Family.BOX)

    @property
    def kind(self) -> str:
        """``exact``: the witness equals the prediction; ``lower``: ratio >= prediction."""
        return "lower" if self in (Family.INTERVAL, Family.BOX) else "exact"


@dataclass(frozen=True)
class Extremizer:
    family: Family
    op: Operator
    signal: AnySignal
    shift_multiplicities: tuple[int, ...]
    coverage: int = 0

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.signal.values))

    @property
    def injective(self) -> bool:
        return all(c == 1 for c in self.shift_multiplicities)

    def predicted(self, p, q) -> float:
        p, q = as_exponent(p), as_exponent(q)
        N = self.op.N
        fam = self.family
        if fam in (Family.CURVE_INDICATOR, Family.MOMENT_CURVE):
            return self.support_size ** (-1.0 / p)
        if fam in (Family.DELTA, Family.MOMENT_DELTA):
            mult = np.asarray(self.shift_multiplicities, dtype=np.float64)
            if math.isinf(q):
                return float(mult.max()) / N
            return float(np.sum(mult**q)) ** (1.0 / q) / N
        # full-coverage cells give op f = 1 there
        return self.coverage ** (0.0 if math.isinf(q) else 1.0 / q) / self.support_size ** (1.0 / p)

    def witness(self, p, q) -> float:
        """The quantity the closed form describes, measured on the actual signal."""
        if self.family in (Family.CURVE_INDICATOR, Family.MOMENT_CURVE):
            origin = np.zeros(self.op.ndim, dtype=np.int64)
            return self.op.at(self.signal, origin) / lp_norm(self.signal, p)
        return ratio(self.op, self.signal, p, q).ratio


def _multiplicities(shifts: np.ndarray) -> tuple[int, ...]:
    return tuple(sorted(Counter(map(tuple, shifts.tolist())).values(), reverse=True))


def extremizer(family: Family | str, op: Operator, strict: bool = False) -> Extremizer:
    """Build one of the six families for ``op``.

    Families (a) and (b) need P injective on [1, N] for the textbook formulas;
    the prediction uses actual multiplicities, and ``strict=True`` raises
    :class:`NonInjective` instead.
    """
    family = Family(family)
    if family.is_multidim != isinstance(op, MomentCurveAverage):
        raise ValueError(f"family {family.value} does not match operator {type(op).__name__}")
    shifts = op.shifts()
    mult = _multiplicities(shifts)
    if strict and family in (Family.CURVE_INDICATOR, Family.DELTA) and any(c > 1 for c in mult):
        raise NonInjective(f"P collides on [1, {op.N}]: {len(mult)} distinct values")
    if family in (Family.CURVE_INDICATOR, Family.MOMENT_CURVE):
        return Extremizer(family, op, SparseSignal.indicator(shifts), mult)
    if family in (Family.DELTA, Family.MOMENT_DELTA):
        return Extremizer(family, op, SparseSignal.delta((0,) * op.ndim), mult)
    if family == Family.INTERVAL:
        top = int(op.P(op.N))
        if top < 1:
            raise ValueError("interval family needs P(N) >= 1")
        lo_s, hi_s = int(shifts.min()), int(shifts.max())
        cover = max(0, (2 * top - hi_s) - (1 - lo_s) + 1)
        return Extremizer(family, op, Signal(np.ones(2 * top), 1), mult, cover)
    ext = [2 * op.N**j for j in range(1, op.d + 1)]
    check_cells(ext)
    cover = math.prod(op.N**j + 1 for j in range(1, op.d + 1))
    return Extremizer(family, op, Signal.box([1] * op.d, ext), mult, cover)


@dataclass(frozen=True)
class FamilyMeasurement:
    family: Family
    N: int
    p: float
    q: float
    witness: float
    predicted: float

    @property
    def error(self) -> float:
        return self.witness - self.predicted

    def ok(self, tol: float = 1e-9) -> bool:
        if self.family.kind == "exact":
            return abs(self.error) <= tol
        return self.error >= -tol


def measure_family(family: Family | str, op: Operator, p, q) -> FamilyMeasurement:
    ext = extremizer(family, op)
    return FamilyMeasurement(ext.family, op.N, as_exponent(p), as_exponent(q),
                             ext.witness(p, q), ext.predicted(p, q))


def families_for(op: Operator) -> list[Family]:
    if isinstance(op, MomentCurveAverage):
        return [Family.MOMENT_CURVE, Family.MOMENT_DELTA, Family.BOX]
    return [Family.CURVE_INDICATOR, Family.DELTA, Family.INTERVAL]


# ---------------------------------------------------------------------------
# search

def default_window(op: Operator) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if isinstance(op, MomentCurveAverage):
        return (1,) * op.d, tuple(2 * op.N**j for j in range(1, op.d + 1))
    s = op.shifts()
    span = int(s.max() - s.min()) + 1
    return (1,), (max(2 * span, 16),)


def random_signal(rng: np.random.Generator, kind: str, shape, N: int) -> np.ndarray:
    """Uniform[0,1] entries or Bernoulli(rho) with rho in {1/N, N^-1/2, 1/2}."""
    if kind == "uniform":
        return rng.random(shape)
    rho = {"sparse": 1.0 / N, "mid": N**-0.5, "half": 0.5}[kind]
    return (rng.random(shape) < rho).astype(np.float64)


RANDOM_KINDS = ("uniform", "sparse", "mid", "half")


def ascent(op: Operator, f: Signal, p: float, q: float, iterations: int = 20,
           rtol: float = 1e-6) -> tuple[Signal, float]:
    """Heuristic ascent ``f <- (A^T (A f)^{q-1})^{1/(p-1)}`` on the window of f.

    This is the Euler-Lagrange fixed point for ``||A f||_q / ||f||_p`` over
    nonnegative f; there is no monotonicity guarantee, so the best iterate wins.
    """
    lo, hi = f.offsets, f.upper
    best_f, best_r = f, lp_norm(op(f), q) / lp_norm(f, p)
    prev = best_r
    cur = f
    for _ in range(iterations):
        g = op(cur)
        gv = np.abs(g.values) ** (q - 1.0)
        h = op.adjoint(Signal(gv, g.offsets)).window(lo, hi)
        vals = h.values ** (1.0 / (p - 1.0))
        nrm = lp_norm(Signal(vals, lo), p)
        if not np.isfinite(nrm) or nrm == 0:
            break
        cur = Signal(vals / nrm, lo)
        r = lp_norm(op(cur), q)
        if r > best_r:
            best_f, best_r = cur, r
        if abs(r - prev) <= rtol * max(prev, 1e-300):
            break
        prev = r
    return best_f, best_r


@dataclass(frozen=True)
class SearchResult:
    best: RatioSample
    witness: AnySignal
    samples: int


def search_near_extremal(op: Operator, p, q, trials: int, seed: int, window=None,
                         ascent_iterations: int = 20) -> SearchResult:
    """Best ratio over the families, ``trials`` seeded random signals and an ascent.

    Candidates are scanned in a fixed order and a later candidate replaces the
    incumbent only when strictly better, so ties go to the first found.
    """
    p, q = as_exponent(p), as_exponent(q)
    lo, hi = window or default_window(op)
    shape = tuple(h - l + 1 for l, h in zip(lo, hi))
    check_cells(shape)
    best = None
    best_f = None
    best_dense = None
    count = 0

    def consider(f, tag):
        nonlocal best, best_f, best_dense, count
        count += 1
        if lp_norm(f, p) == 0:
            return
        r = ratio(op, f, p, q, tag)
        if best is None or r.ratio > best.ratio:
            best, best_f = r, f
        if isinstance(f, Signal) and (best_dense is None or r.ratio > best_dense[1]):
            best_dense = (f, r.ratio)

    for fam in families_for(op):
        try:
            consider(extremizer(fam, op).signal, f"family:{fam.value}")
        except Exception:  # a family may not fit the budget; the search goes on
            continue
    rng = np.random.Generator(np.random.PCG64(seed))
    for i in range(trials):
        kind = RANDOM_KINDS[i % len(RANDOM_KINDS)]
        consider(Signal(random_signal(rng, kind, shape, op.N), lo), f"random:{kind}:{i}")
    if best_dense is not None and 1 < p < math.inf and 1 <= q < math.inf:
        start = best_dense[0].window(lo, hi)
        f, _ = ascent(op, start, p, q, ascent_iterations)
        consider(f, "ascent")
    return SearchResult(best, best_f, count)


def improvement_fit(samples) -> FitResult:
    """Slope/intercept of ``log ratio`` against ``log N``."""
    return loglog_fit([s.N for s in samples], [s.ratio for s in samples])


def improvement_exponent(op: Operator, p, q) -> float:
    """``-d(1/p - 1/q)`` in 1D, ``-(d(d+1)/2)(1/p - 1/q)`` on the moment curve."""
    p, q = as_exponent(p), as_exponent(q)
    return -float(op.improvement_degree) * (1.0 / p - 1.0 / q)


# ---------------------------------------------------------------------------
# Hausdorff-Young / Holder chain

@dataclass(frozen=True)
class HYChain:
    p: Fraction
    p_dual: Fraction
    s: int
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def ok(self, tol: float = 1e-9) -> bool:
        return self.slack >= -tol


def hy_exponents(m: int) -> tuple[Fraction, Fraction]:
    """p with ``2/p - 1 = 1/(2m)`` and its dual."""
    p = Fraction(4 * m, 2 * m + 1)
    return p, p / (p - 1)


def hy_chain_check(d: int, N: int, f: AnySignal, m: int, J: int | None = None) -> HYChain:
    """``||Ã_N f||_{p'} <= ||f||_p ||S_N||_{L^{2m}}`` with the norm from the exact count."""
    p, pd = hy_exponents(m)
    if J is None:
        J = mean_value_exact(N, d, m).J
    s_norm = (J / N ** (2 * m)) ** (1.0 / (2 * m))
    op = MomentCurveAverage(d, N)
    lhs = lp_norm(op(f), pd)
    rhs = lp_norm(f, p) * s_norm
    return HYChain(p, pd, 2 * m, lhs, rhs)
