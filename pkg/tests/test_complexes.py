import random

import pytest
from hypothesis import given, settings, strategies as st

from iphodge.complexes import (ChainMap, CochainComplex, ComplexError, cohomology, complex_from_json,
                               complex_json, cone, identity_map, quasi_iso, tensor_product, tensor_reduce,
                               two_term, validate, zero_complex)
from iphodge.linalg import Matrix
from iphodge.rings import INTEGERS, Elem, q_int, tower
from iphodge.suites import corpus_generate, random_free_complex

import oracles as O

Z = INTEGERS


def int_data(C):
    return C.ranks, [M.a for M in C.diffs]


def test_validate_examples():
    assert validate(two_term(Z, 5)) is None
    bad = CochainComplex(Z, 0, [1, 1, 1], [Matrix.from_ints(Z, [[1]]), Matrix.from_ints(Z, [[1]])], check=False)
    assert validate(bad)[0] == 0
    with pytest.raises(ComplexError):
        CochainComplex(Z, 0, [1, 1, 1], [Matrix.from_ints(Z, [[1]]), Matrix.from_ints(Z, [[1]])])
    assert validate(zero_complex(Z)) is None


def test_cohomology_examples():
    rep = cohomology(two_term(Z, 7))
    assert rep.free_rank(0) == 0 and rep.is_zero(0)
    assert rep.free_rank(1) == 0 and rep.divisor_strings(1) == ["7"]
    rep = cohomology(two_term(Z, 0))
    assert (rep.free_rank(0), rep.free_rank(1)) == (1, 1)
    K = tensor_product(two_term(Z, 2), two_term(Z, 3))
    assert K.ranks == [1, 2, 1]
    assert cohomology(K).acyclic()


def test_tensor_reduce_examples():
    assert tensor_reduce(two_term(Z, 3), 3).diffs[0].is_zero()
    assert tensor_reduce(two_term(Z, 9), 3).diffs[0].is_zero()
    F = tower("F", 2, 0)
    q = F.gen()
    C = two_term(F, q * q - 1)
    assert tensor_reduce(C, (q - 1).v).diffs[0].is_zero()


def test_cone_examples():
    C = two_term(Z, 6)
    assert cohomology(cone(identity_map(C))).acyclic()
    Z0 = CochainComplex(Z, 0, [0, 0], [Matrix(Z, 0, 0)])
    phi = ChainMap(Z0, C, {0: Matrix(Z, 1, 0), 1: Matrix(Z, 1, 0)})
    rep, ref = cohomology(cone(phi)), cohomology(C)
    for n in C.degrees():
        assert rep.free_rank(n) == ref.free_rank(n) and rep.divisor_strings(n) == ref.divisor_strings(n)
    A = CochainComplex(Z, 0, [1], [])
    m = ChainMap(A, A, {0: Matrix.from_ints(Z, [[5]])})
    assert cohomology(cone(m)).divisor_strings(0) == ["5"]


def test_quasi_iso_examples():
    C = two_term(Z, 4)
    assert quasi_iso(identity_map(C)).ok
    F = tower("F", 2, 1)
    N = two_term(F, q_int(3, F))
    Zc = CochainComplex(F, 0, [0, 0], [Matrix(F, 0, 0)])
    phi = ChainMap(N, Zc, {0: Matrix(F, 0, 1), 1: Matrix(F, 0, 1)})
    v = quasi_iso(phi, "junk", (1, 8))
    assert v.ok and [w["divisor"] for w in v.witness] == ["1+q_1^2+q_1^4"]
    assert not quasi_iso(phi).ok
    P = two_term(Z, 5)
    v = quasi_iso(ChainMap(P, CochainComplex(Z, 0, [0, 0], [Matrix(Z, 0, 0)]),
                           {0: Matrix(Z, 0, 1), 1: Matrix(Z, 0, 1)}))
    assert not v.ok and v.witness[0]["divisor"] == "5"


def test_tensor_product_signs():
    R = Z
    T = tensor_product(two_term(R, 2), two_term(R, 3))
    assert T.diffs[0].a == [[2], [3]]
    assert T.diffs[1].a == [[-3, 2]]
    C = two_term(R, 5)
    unit = CochainComplex(R, 0, [1], [])
    assert tensor_product(C, unit).diffs[0] == C.diffs[0]


@pytest.mark.parametrize("seed", range(5))
def test_random_tensor_products(seed):
    rng = random.Random(seed)
    C = random_free_complex(rng, max_rank=3, max_degrees=3)
    D = random_free_complex(rng, max_rank=3, max_degrees=2)
    T = tensor_product(C, D)
    assert validate(T) is None
    assert T.euler() == C.euler() * D.euler()


CORPUS = corpus_generate("random-free-Z", {"cases": 100}, 11)


@pytest.mark.parametrize("i", range(0, 100, 4))
def test_cohomology_against_minors_oracle(i):
    C = CORPUS[i]
    rep = cohomology(C)
    want = O.cohomology_Z(*int_data(C))
    for n, (free, tors) in zip(C.degrees(), want):
        assert rep.free_rank(n) == free
        assert sorted(int(s) for s in rep.divisor_strings(n)) == tors


@pytest.mark.parametrize("p", [2, 3])
def test_reduced_cohomology_against_brute_force(p):
    for C in CORPUS:
        rep = cohomology(tensor_reduce(C, p))
        want = O.betti_mod(*int_data(C), p)
        assert [rep.dimension(n) for n in C.degrees()] == want


def test_corpus_is_valid_and_bounded():
    for C in CORPUS:
        assert validate(C) is None
        assert len(C.ranks) <= 4 and max(C.ranks) <= 5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_quasi_iso_agrees_with_cohomology_comparison(seed):
    # a random automorphism-twisted copy is a quasi-iso; a map killing a
    # nonzero cohomology class is not
    rng = random.Random(seed)
    C = random_free_complex(rng, max_rank=3, max_degrees=3)
    assert quasi_iso(identity_map(C)).ok
    zero = ChainMap(C, C, {n: Matrix(Z, C.rank(n), C.rank(n)) for n in C.degrees()})
    assert quasi_iso(zero).ok == cohomology(C).acyclic()


def test_json_round_trip_and_errors():
    C = CORPUS[3]
    d = complex_json(C)
    C2 = complex_from_json(d)
    assert complex_json(C2) == d
    with pytest.raises(ValueError):
        complex_from_json({"ranks": [1]})
    bad = dict(d, degrees=[0, 9])
    with pytest.raises(ValueError):
        complex_from_json(bad)
