import math
import warnings

import numpy as np
import pytest

from radonlab.averages import (FractionalOrder, MomentCurveAverage, PolynomialAverage, average,
                               exact_truncation, fractional, last_hit, maximal, multidim_average,
                               multidim_fractional, shift_sum)
from radonlab.errors import NegativeInput, TruncationNotExact
from radonlab.poly import IntPolynomial
from radonlab.signal import Signal, lp_norm

X = IntPolynomial.monomial(1)
SQ = IntPolynomial.monomial(2)


def brute_average(P, N, f, xs):
    return np.array([sum(f.at(int(x) + P(k)) for k in range(1, N + 1)) / N for x in xs])


def test_average_examples():
    a = average(X, 1, Signal.delta(0))
    assert a.equals(Signal.delta(-1))
    b = average(SQ, 2, Signal.delta(0))
    assert b.at(-1) == 0.5 and b.at(-4) == 0.5 and b.sum() == 1.0


def test_interval_family_ratio_scale():
    N, p, q = 64, 1.6, 1.6 / 0.6
    f = Signal(np.ones(2 * SQ(N)), 1)
    r = lp_norm(average(SQ, N, f), q) / lp_norm(f, p)
    predicted = N ** (-2 * (1 / p - 1 / q))
    assert 0.5 * predicted <= r <= 4 * predicted


def test_average_matches_brute(rng):
    P = IntPolynomial.from_coefficients([3, -2, 1, 1])
    f = Signal(rng.normal(size=25), -6)
    N = 7
    out = average(P, N, f)
    assert np.allclose(out.values, brute_average(P, N, f, out.indices()), atol=1e-13)


def test_fft_path_agrees(rng):
    f = Signal(rng.random(300), -20)
    for P in (SQ, IntPolynomial.from_coefficients([0, 1, 2])):
        d = average(P, 12, f)
        g = average(P, 12, f, method="fft")
        assert d.equals(g, atol=1e-9)
    h = Signal(rng.random((6, 40)), (0, 0))
    assert multidim_average(2, 5, h).equals(multidim_average(2, 5, h, method="fft"), atol=1e-9)


def test_multidim_examples():
    assert multidim_average(2, 1, Signal.delta((0, 0))).equals(Signal.delta((-1, -1)))
    two = multidim_average(2, 2, Signal.delta((0, 0)))
    assert two.at((-1, -1)) == 0.5 and two.at((-2, -4)) == 0.5


def test_box_family_ratio_scale():
    N, d, p, q = 8, 3, 1.8, 1.8 / 0.8
    f = Signal.box([1] * d, [2 * N**j for j in range(1, d + 1)])
    r = lp_norm(multidim_average(d, N, f), q) / lp_norm(f, p)
    predicted = N ** (-(d * (d + 1) / 2) * (1 / p - 1 / q))
    assert 0.3 * predicted <= r <= 3 * predicted


def test_one_dim_moment_curve_is_linear_average(rng):
    f = Signal(rng.random(30), 4)
    assert multidim_average(1, 9, f).equals(average(X, 9, f), atol=0)


def test_linearity_contraction_mass(rng):
    for _ in range(40):
        f = Signal(rng.normal(size=20), int(rng.integers(-10, 10)))
        g = Signal(rng.normal(size=20), int(rng.integers(-10, 10)))
        a, b = rng.normal(size=2)
        N = int(rng.integers(1, 12))
        from radonlab.signal import combine
        lhs = average(SQ, N, combine([(a, f), (b, g)]))
        rhs = combine([(a, average(SQ, N, f)), (b, average(SQ, N, g))])
        assert lhs.equals(rhs, atol=1e-12)
        for p in (1, 1.5, 2, math.inf):
            assert lp_norm(average(SQ, N, f), p) <= lp_norm(f, p) * (1 + 1e-12)
        assert average(SQ, N, f).sum() == pytest.approx(f.sum(), abs=1e-12)


def test_fractional_examples():
    # I f(x) = sum_k f(x + P(k)) k^-lam, so the single k = 1 term at x = 0 needs f = delta_1
    o = FractionalOrder(0.5)
    r = fractional(X, o, Signal.delta(1), window=(-3, 3))
    assert r.at(0) == 1.0
    r = fractional(X, o, Signal.delta(-1), window=(-3, 3))
    assert r.at(0) == 0.0 and r.at(-2) == 1.0
    f = Signal([1.0, 0, 0, 1.0], 1)     # delta_1 + delta_4
    r = fractional(SQ, o, f, window=(-2, 2))
    assert r.at(0) == pytest.approx(1 + 2**-0.5, rel=1e-15)
    g = Signal([1.0, 0, 0, 1.0], -4)    # delta_-4 + delta_-1
    assert fractional(SQ, o, g, window=(-6, 0)).at(-5) == pytest.approx(1 + 2**-0.5, rel=1e-15)


def test_fractional_truncation_is_exact(rng):
    P = SQ
    f = Signal(rng.random(40), -30)
    window = (-60, 40)
    K = exact_truncation(P, f, window)
    full = fractional(P, FractionalOrder(0.4, K + 50), f, window)
    exact = fractional(P, FractionalOrder(0.4), f, window)
    assert exact.equals(full, atol=1e-13)
    with pytest.warns(TruncationNotExact):
        fractional(P, FractionalOrder(0.4, max(1, K - 2)), f, window)


def test_last_hit_brute(rng):
    for _ in range(60):
        d = int(rng.integers(1, 4))
        coeffs = [int(c) for c in rng.integers(-6, 7, d + 1)]
        coeffs[-1] = int(rng.choice([-2, -1, 1, 2]))
        P = IntPolynomial(tuple(coeffs))
        lo = int(rng.integers(-200, 100))
        hi = lo + int(rng.integers(0, 200))
        brute = max([k for k in range(1, 400) if lo <= P(k) <= hi], default=0)
        assert last_hit(P, lo, hi) == brute


def test_pointwise_average_below_fractional(rng):
    lam = 0.35
    for _ in range(20):
        f = Signal(rng.random(30), int(rng.integers(-10, 10)))
        for N in (4, 16):
            A = average(SQ, N, f)
            I = fractional(SQ, FractionalOrder(lam), f, window=(A.offsets[0], A.upper[0]))
            assert np.all(A.values <= N ** (lam - 1) * I.values * (1 + 1e-12) + 1e-15)


def test_multidim_fractional_examples():
    o = FractionalOrder(0.5)
    r = multidim_fractional(2, o, Signal.delta((1, 1)), window=((-2, -2), (2, 2)))
    assert r.at((0, 0)) == 1.0
    vals = np.zeros((2, 4))
    vals[0, 0] = 1.0      # (1, 1)
    vals[1, 3] = 1.0      # (2, 4)
    f = Signal(vals, (1, 1))
    r = multidim_fractional(2, o, f, window=((-1, -1), (1, 1)))
    assert r.at((0, 0)) == pytest.approx(1 + 2**-0.5, rel=1e-15)


def test_multidim_fractional_dominates_average(rng):
    lam = 0.5
    f = Signal(rng.random((6, 30)), (0, 0))
    N = 4
    A = multidim_average(2, N, f)
    I = multidim_fractional(2, FractionalOrder(lam), f, window=(A.offsets, A.upper))
    assert np.all(A.values <= N ** (lam - 1) * I.values * (1 + 1e-12) + 1e-15)


def test_maximal_examples(rng):
    m = maximal(X, 2, Signal.delta(0))
    assert m.at(-1) == 1.0 and m.at(-2) == 0.5
    with pytest.raises(NegativeInput):
        maximal(X, 2, Signal([-1.0]))
    f = Signal(rng.random(40), -5)
    M = maximal(SQ, 16, f)
    for N in range(1, 17):
        A = average(SQ, N, f).window(M.offsets, M.upper)
        assert np.all(M.values >= A.values)
    xs = M.indices()
    brute = np.max([brute_average(SQ, N, f, xs) for N in range(1, 17)], axis=0)
    assert np.allclose(M.values, brute, atol=1e-13)


def test_shift_sum_sparse_matches_dense(rng):
    f = Signal(rng.random((3, 3)), (0, 1))
    s = np.array([[1, 2], [0, -1], [1, 2]])
    w = np.array([0.5, 2.0, 1.0])
    dense = shift_sum(f, s, w)
    sparse = shift_sum(f.to_sparse(), s, w).to_dense()
    assert dense.equals(sparse, atol=1e-14)
