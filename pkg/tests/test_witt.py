import random

import pytest
from hypothesis import given, settings, strategies as st

from iphodge.rings import INTEGERS, Elem, IntegersMod, PolynomialOver, PrimeField
from iphodge.witt import (WittVector, frobenius_W, ghost, restriction, structure_polys, teichmuller, theta_model,
                          verschiebung, witt_add, witt_from_json, witt_identities, witt_mul)

import oracles as O

Z = INTEGERS


def W(p, xs, R=Z):
    return WittVector(R, p, [R(x) for x in xs])


def ints(w):
    return [int(c) for c in w.comps]


def test_addition_example():
    a = W(2, [1, 0])
    assert ints(a + a) == [2, -1]
    assert [int(g.v) for g in ghost(a + a)] == [2, 2]
    assert a + W(2, [0, 0]) == a


def test_F_V_R_examples():
    x = W(3, [2])
    assert ints(frobenius_W(verschiebung(x))) == [6]
    t = Z(5)
    assert frobenius_W(teichmuller(t, 3, 3)) == teichmuller(t ** 3, 3, 2)
    assert ints(restriction(W(2, [4, 7]))) == [4]
    assert ints(verschiebung(W(2, [4, 7]))) == [0, 4, 7]
    with pytest.raises(ValueError):
        frobenius_W(W(2, [1]))


small_vec = st.lists(st.integers(-30, 30), min_size=1, max_size=4)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([2, 3, 5]), small_vec, st.data())
def test_arithmetic_against_ghost_oracle(p, xs, data):
    ys = data.draw(st.lists(st.integers(-30, 30), min_size=len(xs), max_size=len(xs)))
    assert ints(witt_add(W(p, xs), W(p, ys))) == O.witt_add(xs, ys, p)
    assert ints(witt_mul(W(p, xs), W(p, ys))) == O.witt_mul(xs, ys, p)


@pytest.mark.parametrize("p,r", [(2, 1), (2, 3), (2, 5), (3, 2), (3, 4), (5, 3)])
def test_structure_polynomials_agree_with_lift_route(p, r):
    S = structure_polys(p, r)
    rng = random.Random(p * 100 + r)
    for R in (Z, IntegersMod(p ** 3), PolynomialOver(PrimeField(p))):
        for _ in range(15):
            if isinstance(R, PolynomialOver):
                mk = lambda: Elem(R, R.from_list([rng.randrange(p) for _ in range(3)]))
            else:
                mk = lambda: R(rng.randint(-40, 40))
            a = WittVector(R, p, [mk() for _ in range(r)])
            b = WittVector(R, p, [mk() for _ in range(r)])
            assert S.add(a, b) == witt_add(a, b)
            assert S.mul(a, b) == witt_mul(a, b)
            if r >= 2:
                assert S.F(a) == frobenius_W(a)


def test_structure_polynomials_beyond_limit():
    with pytest.raises(ValueError):
        structure_polys(5, 9)


@pytest.mark.parametrize("R", [Z, IntegersMod(8), PolynomialOver(PrimeField(2))])
def test_identity_engine_small(R):
    res = witt_identities(R, 2, 3, 10, seed=4)
    for name, (passed, fails) in res.items():
        assert not fails, name
        assert passed > 0


def test_json_round_trip():
    w = W(3, [1, -2, 7])
    assert witt_from_json(w.to_json()) == w


def test_mismatched_lengths_rejected():
    with pytest.raises(Exception):
        W(2, [1, 2]) + W(2, [1])


@pytest.mark.parametrize("p,k,r", [(2, 1, 1), (2, 3, 3), (3, 2, 2), (5, 2, 1)])
def test_theta_model_identities(p, k, r):
    M = theta_model(k, r, p)
    out = M.check(cases=5, seed=1)
    assert out and all(out.values()), out


def test_theta_model_needs_level():
    with pytest.raises(Exception):
        theta_model(1, 2)
