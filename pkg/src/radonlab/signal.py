"""Finitely supported real functions on Z and Z^d.

Two storage forms are provided:

* :class:`Signal` keeps a dense block of samples together with the lattice
  coordinate of its first cell, one offset per axis.
* :class:`SparseSignal` keeps an explicit coordinate list. It exists for the
  structured extremizer families whose supports are far too spread out to
  materialize (a moment curve in Z^3 at N = 256 spans 256 x 65536 x 16.7M).

Norms are accumulated after rescaling by the largest magnitude, using numpy's
pairwise summation, so they are deterministic for a fixed array shape.
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidExponent, WindowTooLarge

MAX_CELLS = 60_000_000
NORM_RTOL = 1e-9


def as_exponent(p) -> float:
    """Convert an exponent (int, float, Fraction, ``"7/4"``, ``"inf"``) to float."""
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "oo") else Fraction(p)
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidExponent(f"exponent must lie in [1, inf], got {p}")
    return p


def check_cells(shape: Sequence[int], limit: int | None = None) -> None:
    limit = MAX_CELLS if limit is None else limit
    cells = math.prod(int(s) for s in shape)
    if cells > limit:
        raise WindowTooLarge(f"window {tuple(shape)} has {cells} cells (limit {limit})")


def _norm_of_values(values: np.ndarray, p) -> float:
    p = as_exponent(p)
    a = np.abs(np.asarray(values, dtype=np.float64)).ravel()
    # dropping zeros makes the summation tree, hence the result, independent of padding
    a = a[a != 0]
    if a.size == 0:
        return 0.0
    top = float(a.max())
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    r = a / top
    if p == 1.0:
        return top * float(np.sum(r))
    if p == 2.0:
        return top * math.sqrt(float(np.sum(r * r)))
    return top * float(np.sum(r**p)) ** (1.0 / p)


class Signal:
    """Dense window of samples; ``values[i_1, ..., i_d]`` sits at ``offsets + i``."""

    __slots__ = ("values", "offsets")

    def __init__(self, values, offsets=0):
        v = np.array(values, dtype=np.float64)
        if v.ndim == 0:
            v = v.reshape(1)
        if isinstance(offsets, (int, np.integer)):
            offsets = (int(offsets),) * v.ndim
        offsets = tuple(int(o) for o in offsets)
        if len(offsets) != v.ndim:
            raise ValueError(f"{len(offsets)} offsets for a {v.ndim}-dimensional block")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        check_cells(v.shape)
        v.setflags(write=False)
        self.values = v
        self.offsets = offsets

    # construction helpers
    @classmethod
    def zeros(cls, shape, offsets=0) -> "Signal":
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        check_cells(shape)
        return cls(np.zeros(shape), offsets)

    @classmethod
    def delta(cls, point=0, value: float = 1.0) -> "Signal":
        point = (point,) if isinstance(point, (int, np.integer)) else tuple(point)
        return cls(np.full((1,) * len(point), value), point)

    @classmethod
    def indicator(cls, points) -> "Signal":
        """Indicator of a finite point set, materialized on its bounding box."""
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[:, None]
        lo = pts.min(axis=0)
        shape = tuple(int(s) for s in pts.max(axis=0) - lo + 1)
        check_cells(shape)
        out = np.zeros(shape)
        out[tuple((pts - lo).T)] = 1.0
        return cls(out, tuple(int(x) for x in lo))

    @classmethod
    def box(cls, lo: Sequence[int], hi: Sequence[int]) -> "Signal":
        """Indicator of the product of the integer ranges ``[lo_j, hi_j]``."""
        shape = tuple(h - l + 1 for l, h in zip(lo, hi))
        check_cells(shape)
        return cls(np.ones(shape), tuple(lo))

    # geometry
    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def offset(self) -> int:
        if self.ndim != 1:
            raise AttributeError("offset is defined for 1D signals only; use offsets")
        return self.offsets[0]

    @property
    def upper(self) -> tuple[int, ...]:
        """Last stored coordinate per axis (inclusive)."""
        return tuple(o + s - 1 for o, s in zip(self.offsets, self.shape))

    def indices(self, axis: int = 0) -> np.ndarray:
        return np.arange(self.offsets[axis], self.offsets[axis] + self.shape[axis])

    def __repr__(self) -> str:
        return f"Signal(shape={self.shape}, offsets={self.offsets})"

    def __call__(self, *x) -> float:
        return self.at(x[0] if len(x) == 1 else x)

    def at(self, x) -> float:
        x = (x,) if isinstance(x, (int, np.integer)) else tuple(x)
        idx = tuple(int(xi) - o for xi, o in zip(x, self.offsets))
        if all(0 <= i < s for i, s in zip(idx, self.shape)):
            return float(self.values[idx])
        return 0.0

    def sample(self, points) -> np.ndarray:
        """Values at an ``(n, d)`` array of points (or 1D array for d = 1); zero off-window."""
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[:, None]
        idx = pts - np.asarray(self.offsets, dtype=np.int64)
        inside = np.all((idx >= 0) & (idx < np.asarray(self.shape)), axis=1)
        out = np.zeros(len(pts))
        out[inside] = self.values[tuple(idx[inside].T)]
        return out

    def window(self, lo: Sequence[int], hi: Sequence[int]) -> "Signal":
        """Restrict or zero-extend to the box ``[lo, hi]``."""
        lo, hi = tuple(lo), tuple(hi)
        shape = tuple(h - l + 1 for l, h in zip(lo, hi))
        check_cells(shape)
        out = np.zeros(shape)
        src, dst = [], []
        for o, s, l, h in zip(self.offsets, self.shape, lo, hi):
            a, b = max(o, l), min(o + s - 1, h)
            if a > b:
                return Signal(out, lo)
            src.append(slice(a - o, b - o + 1))
            dst.append(slice(a - l, b - l + 1))
        out[tuple(dst)] = self.values[tuple(src)]
        return Signal(out, lo)

    def trim(self) -> "Signal":
        nz = np.nonzero(self.values)
        if len(nz[0]) == 0:
            return Signal(np.zeros((1,) * self.ndim), self.offsets)
        lo = [int(a.min()) for a in nz]
        hi = [int(a.max()) for a in nz]
        sl = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
        return Signal(self.values[sl], tuple(o + a for o, a in zip(self.offsets, lo)))

    def to_sparse(self) -> "SparseSignal":
        nz = np.nonzero(self.values)
        coords = np.stack(nz, axis=1).astype(np.int64) + np.asarray(self.offsets, dtype=np.int64)
        return SparseSignal(coords, self.values[nz])

    def sum(self) -> float:
        return float(np.sum(self.values))

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    def equals(self, other: "Signal", atol: float = 0.0) -> bool:
        """Equality as functions on Z^d (windows may differ)."""
        lo = tuple(min(a, b) for a, b in zip(self.offsets, other.offsets))
        hi = tuple(max(a, b) for a, b in zip(self.upper, other.upper))
        x, y = self.window(lo, hi).values, other.window(lo, hi).values
        return bool(np.all(np.abs(x - y) <= atol))

    # serialization
    def to_json(self) -> str:
        return json.dumps({"offsets": list(self.offsets), "shape": list(self.shape),
                           "values": [repr(float(x)) for x in self.values.ravel()]})

    @classmethod
    def from_json(cls, text: str) -> "Signal":
        doc = json.loads(text)
        offsets = doc.get("offsets", doc.get("offset", 0))
        values = np.array([float(x) for x in doc["values"]])
        shape = doc.get("shape", [len(values)])
        return cls(values.reshape(shape), offsets if isinstance(offsets, list) else [offsets])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for idx in np.ndindex(*self.shape):
            v = self.values[idx]
            if v != 0:
                w.writerow([o + i for o, i in zip(self.offsets, idx)] + [repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Signal":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if not rows:
            raise ValueError("empty CSV signal")
        pts = np.array([[int(c) for c in r[:-1]] for r in rows], dtype=np.int64)
        vals = np.array([float(r[-1]) for r in rows])
        return SparseSignal(pts, vals).to_dense()


class SparseSignal:
    """Coordinate-list signal: ``coords`` is ``(n, d)`` int64 with unique rows."""

    __slots__ = ("coords", "values")

    def __init__(self, coords, values, aggregate: bool = True):
        c = np.asarray(coords, dtype=np.int64)
        if c.ndim == 1:
            c = c[:, None]
        v = np.asarray(values, dtype=np.float64).ravel()
        if len(v) != len(c):
            raise ValueError("coords and values differ in length")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        if aggregate and len(c):
            c, inv = np.unique(c, axis=0, return_inverse=True)
            v = np.bincount(inv.ravel(), weights=v, minlength=len(c))
        self.coords = c
        self.values = v

    @classmethod
    def indicator(cls, points) -> "SparseSignal":
        c = np.asarray(points, dtype=np.int64)
        if c.ndim == 1:
            c = c[:, None]
        c = np.unique(c, axis=0)
        return cls(c, np.ones(len(c)), aggregate=False)

    @classmethod
    def delta(cls, point=0) -> "SparseSignal":
        point = (point,) if isinstance(point, (int, np.integer)) else tuple(point)
        return cls(np.array([point]), [1.0], aggregate=False)

    @property
    def ndim(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"SparseSignal(n={len(self)}, ndim={self.ndim})"

    def at(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=np.int64))
        hit = np.all(self.coords == x, axis=1)
        return float(self.values[hit].sum())

    def sample(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim == 1:
            pts = pts[:, None]
        lookup = {tuple(c): v for c, v in zip(self.coords.tolist(), self.values.tolist())}
        return np.array([lookup.get(tuple(p), 0.0) for p in pts.tolist()])

    def to_dense(self) -> Signal:
        if len(self) == 0:
            return Signal(np.zeros((1,) * self.ndim), (0,) * self.ndim)
        lo = self.coords.min(axis=0)
        shape = tuple(int(s) for s in self.coords.max(axis=0) - lo + 1)
        check_cells(shape)
        out = np.zeros(shape)
        out[tuple((self.coords - lo).T)] = self.values
        return Signal(out, tuple(int(x) for x in lo))

    def sum(self) -> float:
        return float(np.sum(self.values))

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))


AnySignal = Signal | SparseSignal


def lp_norm(f: AnySignal, p) -> float:
    """The l^p norm for p in [1, inf]; exact zero for the zero signal."""
    return _norm_of_values(f.values, p)


def translate(f: Signal, shift) -> Signal:
    """``translate(f, s)(x) = f(x + s)``."""
    shift = (shift,) * f.ndim if isinstance(shift, (int, np.integer)) else tuple(shift)
    return Signal(f.values, tuple(o - s for o, s in zip(f.offsets, shift)))


def add(f: Signal, g: Signal) -> Signal:
    if f.ndim != g.ndim:
        raise ValueError("dimension mismatch")
    lo = tuple(min(a, b) for a, b in zip(f.offsets, g.offsets))
    hi = tuple(max(a, b) for a, b in zip(f.upper, g.upper))
    return Signal(f.window(lo, hi).values + g.window(lo, hi).values, lo)


def scale(f: Signal, c: float) -> Signal:
    return Signal(c * f.values, f.offsets)


def pointwise_abs(f: Signal) -> Signal:
    return Signal(np.abs(f.values), f.offsets)


def combine(terms: Iterable[tuple[float, Signal]]) -> Signal:
    """Linear combination ``sum c_i f_i``."""
    out = None
    for c, f in terms:
        term = scale(f, c)
        out = term if out is None else add(out, term)
    if out is None:
        raise ValueError("empty combination")
    return out
