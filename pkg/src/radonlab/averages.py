"""Polynomial averages, fractional integrals and the maximal average.

Every operator here is a weighted sum of translates,
``T f(x) = sum_k w_k f(x + s_k)``, so one kernel (:func:`shift_sum`) carries
them all. Summation runs over ``k = 1, 2, ...`` in order and each output
cell only ever receives its own terms, so results do not depend on how the
work is split.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateInput, IntegerOverflow, NegativeInput, TruncationNotExact
from .poly import IntPolynomial, require_integer_valued
from .signal import AnySignal, Signal, SparseSignal, check_cells

_INT64_SAFE = 2**62


def _as_shift_array(shifts, ndim: int) -> np.ndarray:
    s = np.asarray(shifts, dtype=np.int64)
    if s.ndim == 1:
        s = s[:, None]
    if s.shape[1] != ndim:
        raise ValueError(f"shifts have {s.shape[1]} components, signal has {ndim}")
    return s


def shift_sum(f: AnySignal, shifts, weights=None, *, method: str = "direct") -> AnySignal:
    """``out(x) = sum_k w_k f(x + s_k)`` (weights default to 1).

    ``method="fft"`` correlates against a dense kernel instead; it is meant as a
    cross-check on dense windows and agrees with the direct sum to ~1e-12.
    """
    s = _as_shift_array(shifts, f.ndim)
    w = np.ones(len(s)) if weights is None else np.asarray(weights, dtype=np.float64)
    if isinstance(f, SparseSignal):
        coords = np.concatenate([f.coords - sk for sk in s]) if len(s) else f.coords[:0]
        vals = np.concatenate([wk * f.values for wk in w]) if len(s) else f.values[:0]
        return SparseSignal(coords, vals)
    smin, smax = s.min(axis=0), s.max(axis=0)
    shape = tuple(int(L + hi - lo) for L, lo, hi in zip(f.shape, smin, smax))
    check_cells(shape)
    offsets = tuple(int(o - hi) for o, hi in zip(f.offsets, smax))
    if method == "fft":
        from scipy.signal import fftconvolve

        kshape = tuple(int(hi - lo + 1) for lo, hi in zip(smin, smax))
        check_cells(kshape)
        kernel = np.zeros(kshape)
        np.add.at(kernel, tuple((smax - s).T), w)
        return Signal(fftconvolve(f.values, kernel, mode="full"), offsets)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    out = np.zeros(shape)
    src = f.values
    for sk, wk in zip(s, w):
        start = smax - sk
        sl = tuple(slice(int(a), int(a) + L) for a, L in zip(start, f.shape))
        if wk == 1.0:
            out[sl] += src
        else:
            out[sl] += wk * src
    return Signal(out, offsets)


def _scaled(f: AnySignal, c: float) -> AnySignal:
    if isinstance(f, SparseSignal):
        return SparseSignal(f.coords, f.values * c, aggregate=False)
    return Signal(f.values * c, f.offsets)


def _require_nonneg(f: AnySignal) -> None:
    if not f.is_nonnegative():
        raise NegativeInput("operator is defined here for nonnegative input only")


def polynomial_shifts(P: IntPolynomial, N: int, start: int = 1) -> np.ndarray:
    vals = [P(k) for k in range(start, N + 1)]
    if vals and max(abs(v) for v in vals) >= _INT64_SAFE:
        raise IntegerOverflow("P(k) too large for a lattice window")
    return np.asarray(vals, dtype=np.int64)


def moment_shifts(d: int, N: int, start: int = 1) -> np.ndarray:
    if N**d >= _INT64_SAFE:
        raise IntegerOverflow(f"N^{d} too large for a lattice window")
    k = np.arange(start, N + 1, dtype=np.int64)
    return np.stack([k**j for j in range(1, d + 1)], axis=1) if N >= start else np.zeros((0, d), np.int64)


@dataclass(frozen=True)
class PolynomialAverage:
    """``A_N f(x) = (1/N) sum_{k<=N} f(x + P(k))`` on Z."""

    P: IntPolynomial
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        require_integer_valued(self.P)

    ndim = 1

    @property
    def degree(self) -> int:
        return self.P.degree

    @property
    def improvement_degree(self) -> int:
        return self.P.degree

    def shifts(self) -> np.ndarray:
        return polynomial_shifts(self.P, self.N)[:, None]

    def __call__(self, f: AnySignal, method: str = "direct") -> AnySignal:
        return _scaled(shift_sum(f, self.shifts(), method=method), 1.0 / self.N)

    def adjoint(self, g: AnySignal) -> AnySignal:
        return _scaled(shift_sum(g, -self.shifts()), 1.0 / self.N)

    def at(self, f: AnySignal, x) -> float:
        pts = np.asarray(x, dtype=np.int64).reshape(1, 1) + self.shifts()
        return float(np.sum(f.sample(pts))) / self.N


@dataclass(frozen=True)
class MomentCurveAverage:
    """``Ã_N f(x) = (1/N) sum_{k<=N} f(x_1 + k, ..., x_d + k^d)`` on Z^d."""

    d: int
    N: int

    def __post_init__(self):
        if self.N < 1 or self.d < 1:
            raise ValueError("d and N must be positive")

    @property
    def ndim(self) -> int:
        return self.d

    @property
    def degree(self) -> int:
        return self.d

    @property
    def improvement_degree(self) -> Fraction:
        return Fraction(self.d * (self.d + 1), 2)

    def shifts(self) -> np.ndarray:
        return moment_shifts(self.d, self.N)

    def __call__(self, f: AnySignal, method: str = "direct") -> AnySignal:
        return _scaled(shift_sum(f, self.shifts(), method=method), 1.0 / self.N)

    def adjoint(self, g: AnySignal) -> AnySignal:
        return _scaled(shift_sum(g, -self.shifts()), 1.0 / self.N)

    def at(self, f: AnySignal, x) -> float:
        pts = np.asarray(x, dtype=np.int64).reshape(1, -1) + self.shifts()
        return float(np.sum(f.sample(pts))) / self.N


def average(P: IntPolynomial, N: int, f: AnySignal, method: str = "direct") -> AnySignal:
    return PolynomialAverage(P, N)(f, method=method)


def multidim_average(d: int, N: int, f: AnySignal, method: str = "direct") -> AnySignal:
    if f.ndim != d:
        raise ValueError(f"expected a {d}-dimensional signal, got {f.ndim}")
    return MomentCurveAverage(d, N)(f, method=method)


@dataclass(frozen=True)
class FractionalOrder:
    """Order ``0 < lam < 1`` and an optional truncation ``K`` (None = exact)."""

    lam: float
    K: int | None = None

    def __post_init__(self):
        if not 0 < float(self.lam) < 1:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.K is not None and self.K < 1:
            raise ValueError("truncation K must be >= 1")


def _fujiwara_bound(coeffs: list[Fraction]) -> float:
    """Every complex root z of ``sum coeffs[j] z^j`` has ``|z| <=`` this."""
    d = len(coeffs) - 1
    lead = coeffs[-1]
    terms = []
    for i in range(1, d + 1):
        c = abs(coeffs[d - i] / lead)
        if i == d:
            c /= 2
        terms.append(float(c) ** (1.0 / i))
    return 2.0 * max(terms, default=0.0)


def last_hit(P: IntPolynomial, lo: int, hi: int) -> int:
    """Largest ``k >= 1`` with ``lo <= P(k) <= hi`` (0 if none).

    Beyond the Fujiwara root bound of ``P - lo`` and ``P - hi`` both keep the
    sign of the leading coefficient, so P(k) has left ``[lo, hi]`` for good.
    """
    if P.degree < 1:
        raise DegenerateInput("constant polynomial: the fractional sum never terminates")
    coeffs = list(P.coefficients)
    bound = 0.0
    for c in (lo, hi):
        shifted = [coeffs[0] - c] + coeffs[1:]
        bound = max(bound, _fujiwara_bound(shifted))
    kmax = int(math.ceil(bound)) + 1
    best = 0
    for k in range(1, kmax + 1):
        if lo <= P(k) <= hi:
            best = k
    return best


def exact_truncation(P: IntPolynomial, f: Signal, window: tuple[int, int]) -> int:
    """Smallest K such that terms k > K of ``I_lam f`` vanish on ``window``."""
    x_lo, x_hi = window
    return last_hit(P, f.offsets[0] - x_hi, f.upper[0] - x_lo)


def fractional(P: IntPolynomial, order: FractionalOrder, f: Signal,
               window: tuple[int, int] | None = None) -> Signal:
    """Truncated ``I_lam f(x) = sum_{k<=K} f(x + P(k)) / k^lam``.

    With ``order.K = None`` the truncation is chosen so the result is exact on
    ``window``. With an explicit K and no window, the result lives on the
    window swept by the first K shifts; a warning reports when K is below the
    exactness threshold there.
    """
    require_integer_valued(P)
    if order.K is None and window is None:
        raise ValueError("an exact fractional integral needs an output window")
    if window is None:
        sh = polynomial_shifts(P, order.K)
        window = (f.offsets[0] - int(sh.max()), f.upper[0] - int(sh.min()))
    k_exact = exact_truncation(P, f, window)
    K = order.K if order.K is not None else max(k_exact, 1)
    if K < k_exact:
        warnings.warn(f"truncation K={K} below exact threshold {k_exact} on window {window}",
                      TruncationNotExact, stacklevel=2)
    k = np.arange(1, K + 1, dtype=np.float64)
    out = shift_sum(f, polynomial_shifts(P, K), k ** (-float(order.lam)))
    return out.window((window[0],), (window[1],))


def multidim_exact_truncation(d: int, f: Signal, lo: tuple[int, ...], hi: tuple[int, ...]) -> int:
    bounds = [(o - h, u - l) for o, u, l, h in zip(f.offsets, f.upper, lo, hi)]
    best = 0
    for k in range(1, max(bounds[0][1], 0) + 1):
        if all(a <= k**j <= b for j, (a, b) in enumerate(bounds, start=1)):
            best = k
    return best


def multidim_fractional(d: int, order: FractionalOrder, f: Signal,
                        window: tuple[tuple[int, ...], tuple[int, ...]] | None = None) -> Signal:
    """``Ĩ_{d,lam} f(x) = sum_{k<=K} k^-lam f(x_1 + k, ..., x_d + k^d)``, truncated."""
    if f.ndim != d:
        raise ValueError(f"expected a {d}-dimensional signal")
    if order.K is None and window is None:
        raise ValueError("an exact fractional integral needs an output window")
    if window is None:
        sh = moment_shifts(d, order.K)
        window = (tuple(int(o - m) for o, m in zip(f.offsets, sh.max(axis=0))),
                  tuple(int(u - m) for u, m in zip(f.upper, sh.min(axis=0))))
    k_exact = multidim_exact_truncation(d, f, *window)
    K = order.K if order.K is not None else max(k_exact, 1)
    if K < k_exact:
        warnings.warn(f"truncation K={K} below exact threshold {k_exact}",
                      TruncationNotExact, stacklevel=2)
    k = np.arange(1, K + 1, dtype=np.float64)
    out = shift_sum(f, moment_shifts(d, K), k ** (-float(order.lam)))
    return out.window(*window)


def maximal(P: IntPolynomial, N_max: int, f: Signal) -> Signal:
    """``A_* f = max_{1<=N<=N_max} A_N f`` for nonnegative f."""
    _require_nonneg(f)
    require_integer_valued(P)
    s = polynomial_shifts(P, N_max)
    smin, smax = int(s.min()), int(s.max())
    L = f.shape[0]
    check_cells((L + smax - smin,))
    running = np.zeros(L + smax - smin)
    best = np.zeros_like(running)
    for n, sk in enumerate(s, start=1):
        start = smax - int(sk)
        running[start:start + L] += f.values
        np.maximum(best, running * (1.0 / n), out=best)
    return Signal(best, f.offsets[0] - smax)
