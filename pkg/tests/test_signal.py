import math

import numpy as np
import pytest

from radonlab.errors import InvalidExponent
from radonlab.signal import (Signal, SparseSignal, add, as_exponent, lp_norm, pointwise_abs, scale,
                             translate)


def test_norm_examples():
    d = Signal.delta(0)
    for p in (1, 1.5, 2, 7, math.inf):
        assert lp_norm(d, p) == 1.0
    ind = Signal.indicator([3, 9, 27, 81])
    for p in (1, 2, 3.5):
        assert lp_norm(ind, p) == pytest.approx(4 ** (1 / p), rel=1e-14)
    assert lp_norm(Signal([3.0, 4.0], -7), 2) == 5.0
    assert lp_norm(Signal.zeros(5), 3) == 0.0


def test_exponent_parsing():
    assert as_exponent("7/4") == 1.75
    assert as_exponent("inf") == math.inf
    with pytest.raises(InvalidExponent):
        as_exponent(0.5)


def test_translate_convention():
    t = translate(Signal.delta(0), 3)
    assert t.at(-3) == 1.0 and t.at(3) == 0.0
    f = Signal([1.0, 2.0, 5.0], 4)
    g = translate(f, 2)
    for x in range(0, 10):
        assert g(x) == f(x + 2)


def test_translate_norm_invariant(rng):
    for _ in range(50):
        f = Signal(rng.normal(size=int(rng.integers(1, 40))), int(rng.integers(-20, 20)))
        s = int(rng.integers(-100, 100))
        for p in (1, 1.7, 2, math.inf):
            assert lp_norm(translate(f, s), p) == lp_norm(f, p)


def test_add_scale_abs():
    assert add(Signal.delta(0), Signal.delta(0)).equals(Signal.delta(0, 2.0))
    f = add(Signal.delta(-2), Signal.delta(3))
    assert f.offsets == (-2,) and f.shape == (6,)
    assert scale(f, -2).at(3) == -2.0
    assert pointwise_abs(scale(f, -2)).at(-2) == 2.0


def test_multidim_window_and_sample(rng):
    v = rng.random((3, 4))
    f = Signal(v, (1, -2))
    assert f.at((2, 0)) == v[1, 2]
    assert f.at((0, 0)) == 0.0
    pts = np.array([[1, -2], [3, 1], [4, 4]])
    assert np.array_equal(f.sample(pts), [v[0, 0], v[2, 3], 0.0])
    w = f.window((0, -3), (5, 5))
    assert w.equals(f) and lp_norm(w, 1.3) == lp_norm(f, 1.3)


def test_norm_monotone_in_p(rng):
    for _ in range(50):
        f = Signal((rng.random(30) < 0.3).astype(float))
        if f.sum() == 0:
            continue
        ps = [1, 1.2, 1.5, 2, 3, 8, math.inf]
        norms = [lp_norm(f, p) for p in ps]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_norm_tends_to_sup(rng):
    for _ in range(20):
        f = Signal(rng.random(20))
        assert abs(lp_norm(f, 1e4) - lp_norm(f, math.inf)) < 1e-6 * lp_norm(f, math.inf) + 1e-3


def test_serialization_round_trip(rng):
    f = Signal(rng.normal(size=(3, 5)), (-1, 7))
    g = Signal.from_json(f.to_json())
    assert g.offsets == f.offsets and np.array_equal(g.values, f.values)
    h = Signal.from_csv(f.to_csv())
    assert h.equals(f)
    one = Signal([0.0, 0.25, 0.0, 1e-300], 10)
    assert Signal.from_csv(one.to_csv()).equals(one)


def test_sparse_matches_dense(rng):
    pts = rng.integers(-5, 5, (40, 2))
    vals = rng.random(40)
    s = SparseSignal(pts, vals)
    d = s.to_dense()
    assert s.sum() == pytest.approx(vals.sum(), rel=1e-14)
    for p in (1, 2, 3):
        assert lp_norm(s, p) == pytest.approx(lp_norm(d, p), rel=1e-13)
    q = rng.integers(-6, 6, (30, 2))
    assert np.allclose(s.sample(q), d.sample(q), rtol=0, atol=1e-15)


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        Signal([1.0, float("nan")])
