import itertools
import math

import numpy as np
import pytest

from radonlab.averages import PolynomialAverage
from radonlab.errors import DegenerateInput, NegativeInput
from radonlab.poly import IntPolynomial
from radonlab.reduce import (QuadraticTriple, abc_normalized_ratio, dyadic_bridge, dyadic_levels,
                             lift_identity_check, projection_lift, quadratic_dilate,
                             quadratic_transfer_check, sublattice_lower_bound)
from radonlab.signal import Signal, lp_norm

CUBE = IntPolynomial.monomial(3)
TETRA = IntPolynomial.parse("0,1/3,1/2,1/6")      # x(x+1)(x+2)/6


def test_dilate_examples(rng):
    assert quadratic_dilate(Signal.delta(0), 1).equals(Signal.delta(0))
    assert quadratic_dilate(Signal.delta(1), 1).equals(Signal.delta(4))
    f = Signal(rng.random(30), -7)
    g = quadratic_dilate(f, 3)
    for p in (1, 1.7, 2, math.inf):
        assert lp_norm(g, p) == lp_norm(f, p)
    assert g.at(12 * -7) == f.at(-7) and g.at(12 * -7 + 1) == 0.0


def test_triple_validation():
    with pytest.raises(DegenerateInput):
        QuadraticTriple(0, 1, 1)
    with pytest.raises(DegenerateInput):
        QuadraticTriple(1, -1, 0)
    assert QuadraticTriple.parse("2,3,1").polynomial(2) == 15


def brute_sides(t, N, f, x):
    P = t.polynomial
    lhs = sum(f.at(x + P(k)) for k in range(1, N + 1)) / N
    L = t.long_length(N)
    y = 4 * t.a * (x + t.c) - t.b**2
    # g(4am) = f(m): only k with 4a | y + k^2 contribute
    acc = 0.0
    for k in range(1, L + 1):
        n = y + k * k
        if n % (4 * t.a) == 0:
            acc += f.at(n // (4 * t.a))
    return lhs, t.factor(N) * acc / L


def test_transfer_matches_brute(rng):
    t = QuadraticTriple(2, 3, 1)
    f = Signal(rng.random(101), -50)
    rep = quadratic_transfer_check(t, 10, f)
    assert rep.ok()
    for x in rng.integers(-200, 60, 25):
        lhs, rhs = brute_sides(t, 10, f, int(x))
        assert lhs <= rhs + 1e-12
    lhs, rhs = brute_sides(t, 10, f, rep.argmin)
    assert rhs - lhs == pytest.approx(rep.min_slack, abs=1e-12)


def test_transfer_delta_tight():
    for a, b, c in ((1, 0, 0), (2, 3, 1), (3, 1, 2)):
        t = QuadraticTriple(a, b, c)
        N = 7
        for k in range(1, N + 1):
            x = -t.polynomial(k)
            lhs, rhs = brute_sides(t, N, Signal.delta(0), x)
            assert lhs >= 1 / N - 1e-15
            assert rhs >= 1 / N - 1e-12


def test_transfer_rejects_signed():
    with pytest.raises(NegativeInput):
        quadratic_transfer_check(QuadraticTriple(1), 4, Signal([1.0, -1.0]))


def test_transfer_norm_form(rng):
    t = QuadraticTriple(1, 2, 3)
    f = Signal(rng.random(40))
    rep = quadratic_transfer_check(t, 8, f, p=1.6)
    assert rep.lhs_norm <= rep.rhs_norm * (1 + 1e-12)
    assert abc_normalized_ratio(t, 8, f, 1.6) > 0


def test_lift_example_cube():
    for N in (2, 3, 4):
        L = projection_lift(Signal.delta(0), CUBE, N)
        assert int(L.multiplicity.sum()) == 4 * N**3
        nz = np.argwhere(L.f.values != 0) + np.asarray(L.f.offsets)
        assert np.all(nz[:, 2] == 0)
        assert nz[:, 0].min() == 1 and nz[:, 0].max() == 2 * N
        assert nz[:, 1].max() == 2 * N**2


@pytest.mark.parametrize("P", [CUBE, TETRA, IntPolynomial.from_coefficients([5, 0, 2, 2])])
def test_lift_identity_and_norms(P, rng):
    dec = P.shifted(-P(0)).decomposition
    for N in (2, 3, 4):
        for r in range(dec.u):
            g = Signal(rng.random(int(rng.integers(1, 12))), int(rng.integers(-6, 6)))
            L = projection_lift(g, P, N, r)
            assert lift_identity_check(L).ok()
            for p in (1, 1.5, 2):
                assert L.norm_from_multiplicity(p) == pytest.approx(lp_norm(L.f, p), rel=1e-12)
            d = P.degree
            assert L.multiplicity.max() <= 2 ** (d - 1) * N ** (d * (d - 1) // 2)


def brute_sublattice(L, q):
    P, N, r, g = L.P, L.N, L.r, L.g
    Q = P.shifted(-P(0))
    u, v, b = Q.decomposition
    d = P.degree
    h = PolynomialAverage(Q, N)(g)
    total = 0.0
    ys = [range(1, N**j // v + 1) for j in range(1, d)]
    for y in itertools.product(*ys):
        B = sum(bj * yj for bj, yj in zip(b, y))
        for yd in range(-3000, 3001):
            n = r + u * (B + b[-1] * yd)
            total += abs(h.at(n)) ** q
    return total


def test_sublattice_bound_against_brute(rng):
    for P, N in ((CUBE, 3), (TETRA, 6), (CUBE, 4)):
        g = Signal(rng.random(10), -3)
        L = projection_lift(g, P, N)
        sb = sublattice_lower_bound(L, 2)
        assert sb.ok()
        assert sb.lhs == pytest.approx(brute_sublattice(L, 2), rel=1e-12)


def test_dyadic_levels():
    assert [dyadic_levels(K) for K in (1, 2, 3, 4, 5, 64, 65)] == [1, 1, 2, 2, 3, 6, 7]


def test_dyadic_bridge_examples(rng):
    rep = dyadic_bridge(IntPolynomial.monomial(2), 0.6, Signal.delta(0), Ns=(4, 16))
    assert rep.ok()
    for lam in (0.3, 0.99):
        f = Signal(rng.random(80), -10)
        rep = dyadic_bridge(IntPolynomial.monomial(2), lam, f, q=2, Ns=(4, 16, 64))
        assert rep.ok() and rep.norm_ratio <= 1
    assert dyadic_bridge(IntPolynomial.monomial(2), 0.5, Signal.delta(0), Ns=(1,), K=1).ok()
