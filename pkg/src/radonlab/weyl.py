"""Weyl sums along the moment curve and their even moments.

``S_N(t) = (1/N) sum_{k<=N} e(k t_1 + k^2 t_2 + ... + k^d t_d)``.

For s = 2m the orthogonality of characters on T^d gives

    N^{2m} * int_{T^d} |S_N|^{2m} = J_{m,d}(N),

the number of ordered solutions in [1, N]^{2m} of the Vinogradov system
``sum_{i<=m} k_i^j = sum_{i>m} k_i^j`` (j = 1..d). :func:`mean_value_exact`
counts J by meet-in-the-middle; :func:`mean_value_brute` is the independent
full enumeration used to check it. Non-even moments go through
:func:`ls_norm_estimate` (randomly shifted rank-1 lattice or Monte Carlo).
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, DegenerateFit, IntegerOverflow
from .fitting import FitResult, loglog_fit
from .poly import INT128_MAX

DEFAULT_TUPLE_BUDGET = 120_000_000
DEFAULT_BRUTE_BUDGET = 50_000_000
_BATCH = 1 << 22
_TABLE_LIMIT = 1 << 25
_I64_MAX = 2**63 - 1


@dataclass(frozen=True)
class TorusPoint:
    t: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(x) % 1.0 for x in self.t))

    @property
    def d(self) -> int:
        return len(self.t)


def weyl_sum(N: int, t) -> complex:
    """Normalized exponential sum at a single torus point."""
    if N < 1:
        raise ValueError("N must be positive")
    t = t.t if isinstance(t, TorusPoint) else TorusPoint(tuple(t)).t
    k = np.arange(1, N + 1, dtype=np.float64)
    phase = np.zeros(N)
    for j, tj in enumerate(t, start=1):
        phase = np.mod(phase + np.mod(k**j * tj, 1.0), 1.0)
    return complex(np.mean(np.exp(2j * np.pi * phase)))


def weyl_sums(N: int, ts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`weyl_sum` over an ``(M, d)`` array of points."""
    ts = np.atleast_2d(np.asarray(ts, dtype=np.float64))
    k = np.arange(1, N + 1, dtype=np.float64)
    out = np.empty(len(ts), dtype=np.complex128)
    step = max(1, (1 << 22) // N)
    for a in range(0, len(ts), step):
        blk = ts[a:a + step]
        phase = np.zeros((len(blk), N))
        for j in range(blk.shape[1]):
            phase = np.mod(phase + np.mod(np.outer(blk[:, j], k ** (j + 1)), 1.0), 1.0)
        out[a:a + step] = np.exp(2j * np.pi * phase).mean(axis=1)
    return out


# ---------------------------------------------------------------------------
# exact even moments

@dataclass(frozen=True)
class MeanValueRecord:
    d: int
    m: int
    N: int
    J: int
    wall_ms: float = 0.0

    @property
    def s(self) -> int:
        return 2 * self.m

    @property
    def norm(self) -> float:
        """``||S_N||_{L^{2m}} = (J / N^{2m})^{1/(2m)}``."""
        return math.exp((math.log(self.J) - 2 * self.m * math.log(self.N)) / (2 * self.m))


def _radices(N: int, d: int, m: int) -> list[int]:
    return [m * N**j + 1 for j in range(1, d + 1)]


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("RADONLAB_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _partition(N: int, parts: int) -> list[range]:
    parts = max(1, min(parts, N))
    edges = [1 + (N * i) // parts for i in range(parts + 1)]
    return [range(edges[i], edges[i + 1]) for i in range(parts) if edges[i] < edges[i + 1]]


def _sum_squares(counts: np.ndarray, N: int, m: int) -> int:
    c = counts[counts > 0]
    if N ** (2 * m) <= _I64_MAX:
        return int(np.dot(c, c))
    return sum(x * x for x in c.tolist())


def _rows_merge(keys: list[np.ndarray], counts: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    allk = np.concatenate(keys)
    allc = np.concatenate(counts)
    uniq, inv = np.unique(allk, axis=0 if allk.ndim == 2 else None, return_inverse=True)
    out = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(out, inv.ravel(), allc)
    return uniq, out


def mean_value_exact(N: int, d: int, m: int, *, workers: int | None = 1, method: str = "auto",
                     budget: int = DEFAULT_TUPLE_BUDGET) -> MeanValueRecord:
    """Exact ``J_{m,d}(N)`` by meet-in-the-middle.

    Each ordered m-tuple is keyed by its power-sum vector ``(p_1, ..., p_d)``,
    packed in mixed radix ``m N^j + 1`` (no carries: ``p_j <= m N^j``), so the
    key of a tuple is the sum of per-element codes. With ``c(key)`` the number
    of m-tuples per key, ``J = sum c(key)^2``.

    method: ``"table"`` counts into a direct-address array, ``"sort"`` sorts
    and run-length encodes, ``"vector"`` sorts unpacked rows; ``"auto"`` picks
    the table when it fits, else sort, else vector. The m-tuple space is split
    by the leading element into ``workers`` partitions whose counts merge by
    exact integer addition.
    """
    if min(N, d, m) < 1:
        raise ValueError("N, d and m must be positive")
    if N**m > budget:
        raise BudgetExceeded(f"{N}^{m} = {N**m} m-tuples exceeds budget {budget}")
    radices = _radices(N, d, m)
    span = math.prod(radices)
    if span - 1 > INT128_MAX:
        raise IntegerOverflow("packed power-sum key exceeds the 128-bit range")
    if m * N**d > _I64_MAX:
        raise IntegerOverflow("power sums exceed int64")
    mult = [math.prod(radices[:j]) for j in range(d)]
    packed = span - 1 <= _I64_MAX
    if method == "auto":
        table = m * (sum(mu * N ** (j + 1) for j, mu in enumerate(mult)) - sum(mult)) + 1
        method = "table" if packed and table <= _TABLE_LIMIT else ("sort" if packed else "vector")
    if method in ("table", "sort") and not packed:
        raise IntegerOverflow(f"keys do not fit int64; method {method!r} unavailable")

    t0 = time.perf_counter()
    ks = np.arange(1, N + 1, dtype=np.int64)
    if method == "vector":
        code = np.stack([ks**j for j in range(1, d + 1)], axis=1)
        base = np.full(d, m, dtype=np.int64)
    else:
        code = sum(int(mu) * ks ** (j + 1) for j, mu in enumerate(mult))
        base = m * int(code[0])
    # (m-1)-fold sums of the element codes, shared by all partitions
    rest = code[:1] * 0
    for _ in range(m - 1):
        if method == "vector":
            rest = (rest[:, None, :] + code[None, :, :]).reshape(-1, d)
        else:
            rest = (rest[:, None] + code[None, :]).ravel()
    table_size = None
    if method == "table":
        table_size = int(m * int(code[-1]) - base + 1)

    per_lead = max(1, len(rest))
    lead_batch = max(1, _BATCH // per_lead)

    def run(part: range):
        keys_acc, counts_acc = [], []
        counts_tab = np.zeros(table_size, dtype=np.int64) if method == "table" else None
        leads = list(part)
        for a in range(0, len(leads), lead_batch):
            lead = code[np.asarray(leads[a:a + lead_batch]) - 1]
            if method == "vector":
                keys = (lead[:, None, :] + rest[None, :, :]).reshape(-1, d)
            else:
                keys = (lead[:, None] + rest[None, :]).ravel()
            if method == "table":
                counts_tab += np.bincount(keys - base, minlength=table_size)
            elif method == "sort":
                u, c = np.unique(keys, return_counts=True)
                keys_acc.append(u)
                counts_acc.append(c.astype(np.int64))
            else:
                u, c = np.unique(keys, axis=0, return_counts=True)
                keys_acc.append(u)
                counts_acc.append(c.astype(np.int64))
        if method == "table":
            return counts_tab
        return _rows_merge(keys_acc, counts_acc)

    parts = _partition(N, worker_count() if workers is None else workers)
    if len(parts) == 1:
        results = [run(parts[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(parts)) as ex:
            results = list(ex.map(run, parts))
    if method == "table":
        counts = results[0].copy()
        for r in results[1:]:
            counts += r
    else:
        _, counts = _rows_merge([r[0] for r in results], [r[1] for r in results])
    J = _sum_squares(counts, N, m)
    return MeanValueRecord(d=d, m=m, N=N, J=J, wall_ms=(time.perf_counter() - t0) * 1e3)


def mean_value_brute(N: int, d: int, m: int, budget: int = DEFAULT_BRUTE_BUDGET) -> int:
    """J by checking every one of the ``N^{2m}`` ordered tuples directly."""
    if N ** (2 * m) > budget:
        raise BudgetExceeded(f"{N}^{2 * m} tuples exceeds brute-force budget {budget}")
    ks = np.arange(1, N + 1, dtype=np.int64)
    pw = [ks**j for j in range(1, d + 1)]
    total = 0
    for k1 in range(1, N + 1):
        ok = None
        for j in range(d):
            diff = np.array([k1 ** (j + 1)], dtype=np.int64)
            for i in range(1, 2 * m):
                sign = 1 if i < m else -1
                diff = (diff[:, None] + sign * pw[j][None, :]).ravel()
            z = diff == 0
            ok = z if ok is None else ok & z
        total += int(np.count_nonzero(ok))
    return total


def exponent_fit(records: Sequence[MeanValueRecord]) -> FitResult:
    """Least-squares slope of ``log J`` against ``log N``."""
    if len(records) < 2:
        raise DegenerateFit("need at least two records")
    if len({(r.d, r.m) for r in records}) != 1:
        raise ValueError("records must share (d, m)")
    if len({r.N for r in records}) == 1:
        raise DegenerateFit("all records have the same N")
    return loglog_fit([r.N for r in records], [r.J for r in records])


# ---------------------------------------------------------------------------
# quadrature for general s

@dataclass(frozen=True)
class NormEstimate:
    s: float
    integral: float
    integral_se: float
    points: int
    scheme: str

    @property
    def norm(self) -> float:
        return self.integral ** (1.0 / self.s)

    @property
    def norm_se(self) -> float:
        # delta method for x -> x^{1/s}
        if self.integral == 0:
            return 0.0
        return self.integral ** (1.0 / self.s - 1.0) * self.integral_se / self.s


def korobov_generator(n: int, d: int) -> tuple[int, ...]:
    """``(1, a, a^2, ...) mod n`` with ``a`` the odd integer nearest ``n / golden ratio``."""
    a = int(round(n * (math.sqrt(5) - 1) / 2)) | 1
    return tuple(pow(a, j, n) for j in range(d))


def _lattice_moment(N: int, d: int, s: float, n: int, z: tuple[int, ...], shift: np.ndarray) -> float:
    """Mean of ``|S_N|^s`` over ``{frac(i z / n + shift)}``.

    At those points ``S_N = (1/N) sum_k e(i c_k / n + phi_k)`` with
    ``c_k = sum_j z_j k^j mod n`` exact and ``phi_k = sum_j k^j shift_j``, so
    the whole rule is one length-n inverse FFT of a weighted histogram of c_k.
    """
    c = np.array([sum(zj * pow(k, j + 1, n) for j, zj in enumerate(z)) % n
                  for k in range(1, N + 1)], dtype=np.int64)
    k = np.arange(1, N + 1, dtype=np.float64)
    phi = np.zeros(N)
    for j in range(d):
        phi = np.mod(phi + np.mod(k ** (j + 1) * shift[j], 1.0), 1.0)
    hist = np.zeros(n, dtype=np.complex128)
    np.add.at(hist, c, np.exp(2j * np.pi * phi))
    vals = np.abs(np.fft.ifft(hist) * (n / N))
    return float(np.mean(vals**s))


def _rounding_bound(mean: float, s: float, n: int) -> float:
    """Floating-point error scale of a mean of ``|S_N|^s`` over n nodes.

    Each ``|S_N|`` carries relative error ~ ``log2(n) eps`` (FFT or phase
    accumulation), amplified s-fold by the power. When the rule is exact for
    the integrand, the spread across shifts is pure rounding noise and can
    sit far below this scale, so it is folded into the reported error.
    """
    return s * max(1, math.ceil(math.log2(n))) * np.finfo(np.float64).eps * abs(mean)


def ls_norm_estimate(N: int, d: int, s: float, *, scheme: str = "lattice", points: int | None = None,
                     shifts: int = 16, seed: int = 20200101) -> NormEstimate:
    """Estimate ``int_{T^d} |S_N|^s`` and its standard error.

    ``scheme="lattice"``: ``shifts`` independent uniform random shifts of a
    rank-1 Korobov lattice with ``points`` nodes (default ``2^16 d``); the
    standard error is taken across shifts. ``scheme="mc"``: ``points`` i.i.d.
    uniform nodes. Both use a seeded PCG64 stream, and both report a standard
    error combined in quadrature with the rounding scale of the computation.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    n = points or (1 << 16) * d
    rng = np.random.Generator(np.random.PCG64(seed))
    if scheme == "lattice":
        z = korobov_generator(n, d)
        reps = np.array([_lattice_moment(N, d, s, n, z, rng.random(d)) for _ in range(shifts)])
        se = float(reps.std(ddof=1) / math.sqrt(len(reps))) if len(reps) > 1 else math.nan
        mean = float(reps.mean())
        return NormEstimate(s, mean, math.hypot(se, _rounding_bound(mean, s, n)), n * shifts, "lattice")
    if scheme == "mc":
        vals = np.abs(weyl_sums(N, rng.random((n, d)))) ** s
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(n))
        return NormEstimate(s, mean, math.hypot(se, _rounding_bound(mean, s, n)), n, "mc")
    raise ValueError(f"unknown scheme {scheme!r}")
