import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from radonlab.errors import InvalidCollection
from radonlab.poly import IntPolynomial
from radonlab.signal import Signal
from radonlab.averages import maximal
from radonlab.sparse import (Grid, SparseCollection, exact_sparse_max, greedy_collection,
                             lambda_form, local_average, pairing, sparse_trial, validate)


def dyadic(lo, K):
    out = []
    for j in range(K + 1):
        s = 2 ** (K - j)
        out += [(lo + i * s, lo + i * s + s - 1) for i in range(2**j)]
    return out


def test_validate_examples():
    assert validate(SparseCollection.of([(0, 3), (4, 7), (8, 15)]))
    shared = frozenset(range(0, 8))
    assert not validate(SparseCollection.of([(0, 7, shared), (0, 7, shared)]))
    assert not validate(SparseCollection.of([(0, 7, {0, 1})]))          # |E| = |I|/4
    assert validate(SparseCollection.of([(0, 7, {0, 1, 2})]))
    assert not validate(SparseCollection.of([(0, 3, {5, 6})]))          # E outside I


def test_lambda_form_examples(rng):
    ind = Signal(np.ones(8), 0)
    S = SparseCollection.of([(0, 7)])
    assert lambda_form(S, ind, ind, 1, 1, 0) == 8.0
    f = Signal(rng.random(8), 0)
    g = Signal(rng.random(8), 0)
    v = lambda_form(S, f, g, 2, 3, 1.0)
    assert v == pytest.approx(local_average(f, 0, 7, 2) * local_average(g, 0, 7, 3))
    with pytest.raises(InvalidCollection):
        lambda_form(SparseCollection.of([(0, 7, {0})]), f, g, 1, 1)


def test_lambda_form_brute(rng):
    f = Signal(rng.random(256), 0)
    g = Signal(rng.random(256), 0)
    S = SparseCollection.of([(i * 16, i * 16 + 15) for i in range(16)])
    p, q, lam = 1.5, 2.5, 0.3
    ref = 0.0
    for i in range(16):
        a, b = f.values[i * 16:(i + 1) * 16], g.values[i * 16:(i + 1) * 16]
        ref += np.mean(a**p) ** (1 / p) * np.mean(b**q) ** (1 / q) * 16 ** (1 - lam)
    assert lambda_form(S, f, g, p, q, lam) == pytest.approx(ref, rel=1e-13)


def test_pairing_examples(rng):
    X = IntPolynomial.monomial(1)
    g = Signal([3.0, 5.0], -2)
    assert pairing(X, 1, Signal.delta(0), g) == 5.0
    f = Signal(rng.random(20), 0)
    g = Signal(rng.random(60), -40)
    P = IntPolynomial.monomial(2)
    M = maximal(P, 5, f)
    ref = sum(M.at(x) * g.at(x) for x in range(-60, 30))
    assert pairing(P, 5, f, g) == pytest.approx(ref, rel=1e-13)


def test_greedy_constant_is_top_interval():
    c = Signal(np.ones(16), 0)
    res = greedy_collection(c, c, 1.5, 2.5)
    assert [(b.lo, b.hi) for b in res.collection.blocks] == [(0, 15)]


def test_greedy_spike_chain():
    d = Signal(np.r_[1.0, np.zeros(7)], 0)
    res = greedy_collection(d, d, 1, 1, depth=3)
    blocks = [(b.lo, b.hi, sorted(b.E)) for b in res.collection.blocks]
    assert blocks == [(0, 7, [4, 5, 6, 7]), (0, 3, [2, 3]), (0, 1, [1]), (0, 0, [0])]
    assert res.value == pytest.approx(1 / 8 + 1 / 4 + 1 / 2 + 1)


def _feasible(chosen):
    need = [b - a + 1 for a, b in chosen]
    rows, cols = [], []
    r = 0
    for (a, b), n in zip(chosen, need):
        for _ in range(n // 4 + 1):
            rows += [r] * (b - a + 1)
            cols += list(range(a, b + 1))
            r += 1
    if r == 0:
        return True
    m = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(r, 8))
    return int(np.sum(maximum_bipartite_matching(m, perm_type="column") >= 0)) == r


def test_exact_oracle_matches_subset_brute(rng):
    grid = Grid(0, 3, 3)
    ivs = dyadic(0, 3)
    for _ in range(3):
        f = Signal(rng.random(8) ** 2, 0)
        g = Signal(rng.random(8) ** 2, 0)
        p, q, lam = 1.3, 2.0, 0.2
        w = [local_average(f, a, b, p) * local_average(g, a, b, q) * (b - a + 1) ** (1 - lam)
             for a, b in ivs]
        subsets = sorted(((sum(w[i] for i in s), s) for k in range(len(ivs) + 1)
                          for s in itertools.combinations(range(len(ivs)), k)), reverse=True)
        best = next(v for v, s in subsets if _feasible([ivs[i] for i in s]))
        ex = exact_sparse_max(f, g, p, q, grid, lam)
        assert ex.value == pytest.approx(best, rel=1e-12)
        assert validate(ex.collection)
        assert lambda_form(ex.collection, f, g, p, q, lam) == pytest.approx(ex.value, rel=1e-12)


def test_greedy_below_exact_on_16(rng):
    grid = Grid(0, 4, 4)
    for _ in range(10):
        f = Signal(rng.random(16) ** 3, 0)
        g = Signal(rng.random(16) ** 3, 0)
        ex = exact_sparse_max(f, g, 1.5, 2, grid)
        gr = greedy_collection(f, g, 1.5, 2, grid=grid)
        assert validate(ex.collection) and validate(gr.collection)
        assert gr.value <= ex.value * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=40), st.lists(st.floats(0, 10), min_size=1, max_size=40),
       st.integers(0, 6))
def test_greedy_always_valid(fv, gv, depth):
    f = Signal(fv, 0)
    g = Signal(gv, -3)
    res = greedy_collection(f, g, 1.7, 2.2, depth=depth)
    assert validate(res.collection)
    assert res.value >= 0


def test_sparse_trial_reports_ratio(rng):
    f = Signal(rng.random(32), 0)
    g = Signal(rng.random(80), -50)
    t = sparse_trial(IntPolynomial.monomial(2), 6, f, g, 1.6, 2.5)
    assert t.pairing > 0 and t.form > 0 and np.isfinite(t.ratio)
