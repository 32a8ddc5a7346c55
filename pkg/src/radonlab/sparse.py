"""Sparse forms over dyadic interval collections, and the maximal pairing.

Everything here is exploratory: collections are built or searched to report
how ``<A_* f, g>`` compares with the best sparse form found, nothing is
asserted about the comparison itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .averages import maximal
from .errors import InvalidCollection
from .poly import IntPolynomial
from .signal import Signal, as_exponent


@dataclass(frozen=True)
class Block:
    """Interval ``[lo, hi]`` (inclusive) and its witness set E."""

    lo: int
    hi: int
    E: frozenset

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class SparseCollection:
    blocks: tuple[Block, ...]

    @classmethod
    def of(cls, items) -> "SparseCollection":
        """From ``(lo, hi)`` pairs (E = I) or ``(lo, hi, E)`` triples."""
        out = []
        for it in items:
            lo, hi = int(it[0]), int(it[1])
            E = frozenset(range(lo, hi + 1)) if len(it) == 2 else frozenset(int(e) for e in it[2])
            out.append(Block(lo, hi, E))
        return cls(tuple(out))

    def __len__(self) -> int:
        return len(self.blocks)

    def problems(self) -> list[str]:
        msgs = []
        seen: set[int] = set()
        for b in self.blocks:
            if b.hi < b.lo:
                msgs.append(f"empty interval [{b.lo}, {b.hi}]")
                continue
            if 4 * len(b.E) <= b.size:
                msgs.append(f"|E| = {len(b.E)} not > |I|/4 on [{b.lo}, {b.hi}]")
            if any(e < b.lo or e > b.hi for e in b.E):
                msgs.append(f"E not inside [{b.lo}, {b.hi}]")
            if seen & b.E:
                msgs.append(f"E on [{b.lo}, {b.hi}] overlaps an earlier witness set")
            seen |= b.E
        return msgs


def validate(S: SparseCollection) -> bool:
    return not S.problems()


def local_average(phi: Signal, lo: int, hi: int, r) -> float:
    """``(|I|^{-1} sum_{n in I} |phi(n)|^r)^{1/r}``; sup over I for r = inf."""
    r = as_exponent(r)
    v = np.abs(phi.window((lo,), (hi,)).values)
    if math.isinf(r):
        return float(v.max())
    return float(np.mean(v**r)) ** (1.0 / r)


def lambda_form(S: SparseCollection, f: Signal, g: Signal, p, q, lam=0.0) -> float:
    """``sum_I <f>_{p,I} <g>_{q,I} |I|^{1-lam}``."""
    probs = S.problems()
    if probs:
        raise InvalidCollection("; ".join(probs))
    return sum(local_average(f, b.lo, b.hi, p) * local_average(g, b.lo, b.hi, q) * b.size ** (1.0 - lam)
               for b in S.blocks)


def pairing(P: IntPolynomial, N_max: int, f: Signal, g: Signal) -> float:
    """``sum_x A_* f(x) g(x)`` for nonnegative f, g."""
    if not g.is_nonnegative():
        raise ValueError("g must be nonnegative")
    M = maximal(P, N_max, f)
    return float(np.dot(M.values, g.window(M.offsets, M.upper).values))


# ---------------------------------------------------------------------------
# dyadic search

@dataclass(frozen=True)
class Grid:
    """Dyadic intervals inside ``[lo, lo + 2^K)`` down to length ``2^(K - depth)``."""

    lo: int
    K: int
    depth: int

    def __post_init__(self):
        if not 0 <= self.depth <= self.K:
            raise ValueError("need 0 <= depth <= K")

    @classmethod
    def covering(cls, signals, depth: int | None = None) -> "Grid":
        lo = min(s.offsets[0] for s in signals)
        hi = max(s.upper[0] for s in signals)
        K = max(0, (hi - lo).bit_length())
        return cls(lo, K, K if depth is None else min(depth, K))

    def children(self, lo: int, size: int):
        h = size // 2
        return ((lo, h), (lo + h, h))

    def level(self, j: int):
        size = 2 ** (self.K - j)
        return [(self.lo + i * size, size) for i in range(2**j)]


@dataclass(frozen=True)
class SparseSearch:
    collection: SparseCollection
    value: float
    explored: int


def _weight(f, g, p, q, lam, lo, size):
    return local_average(f, lo, lo + size - 1, p) * local_average(g, lo, lo + size - 1, q) * size ** (1.0 - lam)


def stopping_collection(f: Signal, g: Signal, p, q, grid: Grid) -> SparseCollection:
    """Dyadic stopping time on the product average ``<f>_p <g>_q``.

    From each selected I, the maximal dyadic descendants whose product average
    exceeds twice that of I are candidates; they are taken largest average first
    while their total length stays below ``3|I|/4``, and ``E_I`` is I minus the
    ones taken.
    """
    min_size = 2 ** (grid.K - grid.depth)

    def avg(lo, size):
        return local_average(f, lo, lo + size - 1, p) * local_average(g, lo, lo + size - 1, q)

    blocks = []
    stack = [(grid.lo, 2**grid.K)]
    while stack:
        lo, size = stack.pop()
        a = avg(lo, size)
        cands = []
        frontier = list(grid.children(lo, size)) if size > min_size else []
        while frontier:
            clo, cs = frontier.pop()
            ca = avg(clo, cs)
            if ca > 2 * a:
                cands.append((ca, clo, cs))
            elif cs > min_size:
                frontier.extend(grid.children(clo, cs))
        cands.sort(key=lambda t: (-t[0], t[1]))
        taken, mass = [], 0
        for ca, clo, cs in cands:
            if 4 * (mass + cs) < 3 * size:
                taken.append((clo, cs))
                mass += cs
        covered = set()
        for clo, cs in taken:
            covered.update(range(clo, clo + cs))
        blocks.append(Block(lo, lo + size - 1, frozenset(set(range(lo, lo + size)) - covered)))
        stack.extend(sorted(taken, reverse=True))
    return SparseCollection(tuple(sorted(blocks, key=lambda b: (b.lo, -b.size))))


def greedy_collection(f: Signal, g: Signal, p, q, depth: int | None = None, lam: float = 0.0,
                      grid: Grid | None = None) -> SparseSearch:
    """Best ``Lambda_{p,q,lam}`` over the stopping collection and every single-level partition.

    Candidates are compared in that order and replaced only on strict
    improvement.
    """
    grid = grid or Grid.covering([f, g], depth)
    cands = [stopping_collection(f, g, p, q, grid)]
    for j in range(grid.depth + 1):
        cands.append(SparseCollection.of((lo, lo + s - 1) for lo, s in grid.level(j)))
    best, best_v = None, -1.0
    for S in cands:
        v = lambda_form(S, f, g, p, q, lam)
        if v > best_v:
            best, best_v = S, v
    return SparseSearch(best, best_v, len(cands))


def _need(size: int) -> int:
    """Smallest integer count strictly above ``size / 4``."""
    return size // 4 + 1


def exact_sparse_max(f: Signal, g: Signal, p, q, grid: Grid, lam: float = 0.0) -> SparseSearch:
    """Maximum of ``Lambda`` over every sparse collection of grid intervals.

    For a laminar family with ``E_I ⊆ I``, disjoint witness sets exist iff
    every chosen I satisfies ``sum_{J chosen, J ⊆ I} need(J) <= |I|`` (Hall's
    condition reduces to maximal elements). A tree DP over "total need used in
    the subtree" then gives the optimum exactly.
    """
    min_size = 2 ** (grid.K - grid.depth)

    def solve(lo, size):
        # returns {need_used: (value, [intervals])}
        if size > min_size:
            (alo, s), (blo, _) = grid.children(lo, size)
            A, B = solve(alo, s), solve(blo, s)
            merged: dict[int, tuple[float, list]] = {}
            for ka, (va, la) in A.items():
                for kb, (vb, lb) in B.items():
                    k, v = ka + kb, va + vb
                    if k not in merged or v > merged[k][0]:
                        merged[k] = (v, la + lb)
        else:
            merged = {0: (0.0, [])}
        out = dict(merged)
        w = _weight(f, g, p, q, lam, lo, size)
        for k, (v, l) in merged.items():
            k2 = k + _need(size)
            if k2 <= size and (k2 not in out or v + w > out[k2][0]):
                out[k2] = (v + w, l + [(lo, size)])
        # values at a larger need are only useful if strictly better
        pruned, best = {}, -1.0
        for k in sorted(out):
            if out[k][0] > best:
                pruned[k] = out[k]
                best = out[k][0]
        return pruned

    table = solve(grid.lo, 2**grid.K)
    v, chosen = max(table.values(), key=lambda t: t[0])
    return SparseSearch(assign_witnesses(chosen), v, len(table))


def assign_witnesses(intervals) -> SparseCollection:
    """Give each laminar interval ``need(I)`` points, innermost intervals first."""
    used: set[int] = set()
    blocks = []
    for lo, size in sorted(intervals, key=lambda t: (t[1], t[0])):
        free = [x for x in range(lo, lo + size) if x not in used]
        k = _need(size)
        if len(free) < k:
            raise InvalidCollection(f"no room for witnesses on [{lo}, {lo + size - 1}]")
        E = frozenset(free[:k])
        used |= E
        blocks.append(Block(lo, lo + size - 1, E))
    return SparseCollection(tuple(sorted(blocks, key=lambda b: (b.lo, -b.size))))


@dataclass(frozen=True)
class SparseTrial:
    trial: int
    pairing: float
    form: float

    @property
    def ratio(self) -> float:
        return self.pairing / self.form if self.form > 0 else math.inf


def sparse_trial(P: IntPolynomial, N_max: int, f: Signal, g: Signal, p, q_dual, trial: int = 0,
                 depth: int | None = None) -> SparseTrial:
    """Pairing against the best greedy ``Lambda_{p,q',0}`` on a grid covering ``A_* f`` and g."""
    M = maximal(P, N_max, f)
    lo = min(M.offsets[0], g.offsets[0], f.offsets[0])
    hi = max(M.upper[0], g.upper[0], f.upper[0])
    grid = Grid.covering([Signal(np.zeros(hi - lo + 1), lo)], depth)
    best = greedy_collection(f, g, p, q_dual, lam=0.0, grid=grid)
    return SparseTrial(trial, pairing(P, N_max, f, g), best.value)
