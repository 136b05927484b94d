import random

import pytest
from hypothesis import given, settings, strategies as st

from iphodge.rings import (INTEGERS, RATIONALS, DistinguishedElements, Elem, IntegersMod, PolynomialOver,
                           PrimeField, QuotientRing, RingError, distinguished, divide_exact, element_from_json,
                           element_json, embed, frobenius, gcd, q_int, q_power_minus_one, ring_from_json,
                           specialize_q, tower, unit_in_truncation)

import oracles as O


def coeffs(x):
    """(unit exponent, integer coefficient list) of a tower element."""
    e, cs = x.ring.to_coeffs(x.v)
    return e, [int(c) for c in cs]


def as_list(x):
    e, cs = coeffs(x)
    assert e >= 0
    return O.trim([0] * e + cs)


def test_difference_of_squares():
    R = tower("Z", 2, 1)
    q1 = R.gen()
    assert (q1 + 1) * (q1 - 1) == q1 * q1 - 1


def test_level_embedding_adds_across_levels():
    q = tower("Z", 2, 0).gen()
    q1 = tower("Z", 2, 1).gen()
    s = q + q1
    assert s.ring.k == 1
    assert as_list(s) == [0, 1, 1]


def test_modular_product():
    R = IntegersMod(14)
    assert R(3) * R(5) == R(1)


def test_capability_flags():
    assert not IntegersMod(8).is_domain
    assert IntegersMod(8).is_euclidean or IntegersMod(8).is_unit(3)
    assert PrimeField(5).is_domain
    assert tower("F", 3, 1).is_euclidean
    assert not tower("Z", 3, 1).is_euclidean


def test_divide_exact_examples():
    R = tower("Z", 2, 0)
    q = R.gen()
    assert divide_exact(q ** 3 - 1, q - 1) == 1 + q + q * q
    assert divide_exact(q ** 2 - 1, q ** 3 - 1) is None
    a = 3 * q + 7
    assert divide_exact(a, Elem(R, R.one)) == a
    with pytest.raises(ZeroDivisionError):
        divide_exact(a, Elem(R, R.zero))


def test_gcd_examples():
    R = tower("Z", 2, 0)
    q = R.gen()
    assert gcd(q ** 4 - 1, q ** 6 - 1) == q ** 2 - 1
    a = 2 * q + 4
    assert gcd(a, Elem(R, R.zero)) == a.normalized()
    F = tower("F", 2, 0)
    t = F.gen()
    assert gcd(1 + t, (t - 1) * (1 + t)) == 1 + t


@pytest.mark.parametrize("a,b", [(a, b) for a in range(1, 65, 7) for b in range(1, 65, 5)])
def test_cyclotomic_gcd_against_euclid_oracle(a, b):
    R = tower("Z", 3, 0)
    got = gcd(q_power_minus_one(R, a), q_power_minus_one(R, b))
    want = O.zgcd_poly([-1] + [0] * (a - 1) + [1], [-1] + [0] * (b - 1) + [1])
    assert as_list(got.normalized()) == want


def test_q_int_examples():
    R = tower("Z", 2, 0)
    assert as_list(q_int(3, R)) == [1, 1, 1]
    assert as_list(q_int(1, R)) == [1]
    F = tower("F", 2, 0)
    q = F.gen()
    assert q_int(2, F) == q - 1
    # negative j: -q^j [-j]_q with the monomial tracked
    e, cs = coeffs(q_int(-3, R))
    assert e == -3 and cs == [-1, -1, -1]


@pytest.mark.parametrize("a", range(1, 13))
@pytest.mark.parametrize("b", range(1, 13, 3))
def test_q_int_multiplicative(a, b):
    R = tower("Z", 2, 0)
    lhs = as_list(q_int(a * b, R))
    rhs = O.pmul(O.qint(a, step=b), O.qint(b))
    assert lhs == rhs


@pytest.mark.parametrize("p", [2, 3, 5])
def test_p_q_is_power_of_q_minus_one_mod_p(p):
    F = tower("F", p, 0)
    q = F.gen()
    assert q_int(p, F) == (q - 1) ** (p - 1)


def test_frobenius_examples():
    R1 = tower("Z", 2, 1)
    assert frobenius(R1.gen()) == R1.q()
    mu = q_power_minus_one(tower("Z", 2, 0), 1)
    inv = frobenius(mu, -1)
    assert inv.ring.k == 1 and as_list(inv) == [-1, 1]
    inv2 = frobenius(mu, -2)
    assert inv2.ring.k == 2 and as_list(inv2) == [-1, 1]
    assert frobenius(inv, 1) == embed(mu, 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6),
       st.lists(st.integers(-5, 5), min_size=1, max_size=6),
       st.sampled_from([2, 3]), st.integers(0, 2))
def test_frobenius_is_ring_map(a, b, p, k):
    R = tower("Z", p, k)
    x, y = Elem(R, R.from_poly(a)), Elem(R, R.from_poly(b))
    assert frobenius(x * y) == frobenius(x) * frobenius(y)
    assert frobenius(x + y) == frobenius(x) + frobenius(y)
    assert frobenius(frobenius(x, -1)) == embed(x, k + 1)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_distinguished_examples(p):
    R1 = tower("Z", p, 1)
    assert as_list(distinguished(R1, "xi")) == [1] * p
    for r in (1, 2, 3):
        Rr = tower("Z", p, r)
        assert int(specialize_q(distinguished(Rr, "xi_r", r), 1).v) == p ** r
    phi_xi = DistinguishedElements(R1).phi_xi
    assert as_list(phi_xi) == [1] * p
    with pytest.raises(RingError):
        distinguished(R1, "xi_r", 2)


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_distinguished_against_polynomial_oracle(p, k):
    R = tower("Z", p, k)
    D = DistinguishedElements(R)
    mu = [-1] + [0] * (p ** k - 1) + [1]
    assert as_list(D.mu) == mu
    for r in range(1, k + 1):
        prod = [1]
        for i in range(r):
            # phi^{-i}(xi) = [p] in q_{i+1} = q_k^(p^(k-i-1))
            prod = O.pmul(prod, O.qint(p, step=p ** (k - i - 1)))
        assert as_list(D.xi_r(r)) == prod
        c = [-1] + [0] * (p ** (k - r) - 1) + [1]
        assert O.pmul(prod, c) == mu


def test_unit_in_truncation_examples():
    F = tower("F", 2, 1)
    assert unit_in_truncation(q_int(3, F.at_level(1)), 1, 4)
    q = tower("F", 2, 0).gen()
    assert not unit_in_truncation(q - 1, 1, 1)
    assert unit_in_truncation(Elem(F, F.one), 3, 3)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=6), st.integers(1, 4), st.integers(1, 4))
def test_unit_in_truncation_depends_only_on_value_at_one(cs, n, M):
    F = tower("F", 5, 0)
    h = Elem(F, F.from_poly(cs))
    if F.is_zero(h.v):
        return
    assert unit_in_truncation(h, n, M) == (sum(cs) % 5 != 0)
    assert unit_in_truncation(h, n, M) == unit_in_truncation(h, n + 2, M + 3)


def test_specialize_examples():
    R = tower("Z", 3, 1)
    assert int(specialize_q(q_int(7, R), 1).v) == 7
    assert int(specialize_q(distinguished(R, "mu"), 1).v) == 0
    assert int(specialize_q(distinguished(R, "xi"), 1).v) == 3


@pytest.mark.parametrize("R", [INTEGERS, RATIONALS, IntegersMod(27), PrimeField(5), PolynomialOver(PrimeField(3)),
                               tower("Z", 2, 2), tower("F", 3, 1)])
def test_json_round_trip(R):
    rng = random.Random(1)
    for _ in range(10):
        if hasattr(R, "from_poly"):
            x = Elem(R, R.from_poly([rng.randint(-4, 4) for _ in range(5)], rng.randint(-3, 3)))
        elif hasattr(R, "from_list"):
            x = Elem(R, R.from_list([rng.randint(0, 2) for _ in range(4)]))
        else:
            x = R(rng.randint(-50, 50))
        d = element_json(x)
        assert all(isinstance(c, str) for c in d["coeffs"])
        y = element_from_json(d)
        assert y == x and element_json(y) == d
    assert ring_from_json(R.descriptor()) == R


def test_quotient_ring_round_trip():
    P = PolynomialOver(PrimeField(2))
    Q = QuotientRing(P, P.from_list([1, 1, 1]))
    assert ring_from_json(Q.descriptor()) == Q
    t = Elem(Q, Q.reduce(P.from_list([0, 1])))
    assert t * t * t == Q(1)


def test_tower_needs_matching_prime():
    with pytest.raises(RingError):
        tower("F", 4, 0)
