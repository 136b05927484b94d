from fractions import Fraction

import pytest

from iphodge.complexes import cohomology, tensor_product, two_term
from iphodge.qtorus import (BandError, breuil_kisin_check, classical_de_rham, compare_eta_qdr, frobenius_action,
                            koszul_build, qdr_build, qdr_tensor_check, specialize, total_h1_divisors)
from iphodge.rings import INTEGERS, tower

import oracles as O

F = Fraction


def lst(R, x):
    e, cs = R.to_coeffs(x)
    return O.trim([0] * e + [int(c) for c in cs])


def test_qdr_d1_B2_cohomology():
    R = tower("Z", 2, 0)
    C = qdr_build(1, 2, R)
    got = {w[0]: (cohomology(b).free_rank(1), cohomology(b).divisor_strings(1)) for w, b in C}
    assert got[F(0)] == (1, [])
    assert got[F(1)] == got[F(-1)] == (0, [])
    assert got[F(2)] == got[F(-2)] == (0, ["1+q"])


def test_qdr_unit_block_acyclic():
    C = qdr_build(2, 1, tower("F", 3, 0))
    assert cohomology(C.block((F(1), F(1)))).acyclic()
    assert all(M.is_zero() for M in C.block((F(0), F(0))).diffs)


@pytest.mark.parametrize("d,B", [(1, 3), (2, 2)])
def test_qdr_is_tensor_of_one_variable(d, B):
    assert qdr_tensor_check(qdr_build(d, B, tower("Z", 3, 0))) == []


def test_qdr_block_matches_independent_tensor():
    R = tower("F", 2, 0)
    C = qdr_build(2, 3, R)
    from iphodge.rings import q_int
    w = (F(2), F(-3))
    T = tensor_product(two_term(R, q_int(2, R)), two_term(R, q_int(-3, R)))
    assert T.diffs == C.block(w).diffs


def test_koszul_examples():
    K = koszul_build(1, 1, 2, 2)
    R = K.ring
    assert lst(R, K.block((F(1, 2),)).diffs[0].a[0][0]) == [1, 1]  # q_1 - 1 over GF(2)
    assert all(M.is_zero() for M in K.block((F(0),)).diffs)
    K0 = koszul_build(1, 0, 2, 3, "Z")
    assert [w[0] for w in K0.weights()] == [-2, -1, 0, 1, 2]
    assert lst(K0.ring, K0.block((F(2),)).diffs[0].a[0][0]) == [-1, 0, 1]


def test_koszul_rejects_bad_mode():
    with pytest.raises(ValueError):
        koszul_build(2, 1, 1, 2, "Z")
    with pytest.raises(BandError):
        koszul_build(1, 1, 1, 2).block((F(1, 3),))


def test_compare_worked_blocks():
    K = koszul_build(1, 1, 3, 2)
    ok, items = compare_eta_qdr(K, (1, 8))
    assert ok
    by = {it["weight"]: it for it in items}
    assert by["(1/2)"]["kind"] == "fractional" and by["(1/2)"]["divisors"] == []
    d32 = by["(3/2)"]["divisors"]
    assert [x["divisor"] for x in d32] == ["1+q_1+q_1^2"] and d32[0]["junk_unit"]
    assert by["(2)"]["kind"] == "integral" and by["(2)"]["ok"]


@pytest.mark.parametrize("d,p,k,mode", [(1, 3, 2, "F"), (1, 2, 2, "Z"), (2, 2, 1, "F")])
def test_compare_junk_values_at_one(d, p, k, mode):
    # independent recomputation of h(1) mod p from the printed divisors
    ok, items = compare_eta_qdr(koszul_build(d, k, 3 if d == 1 else 2, p, mode), (1, 8))
    assert ok
    for it in items:
        for x in it.get("divisors", []):
            assert O.peval(O.parse_poly(x["divisor"]), 1, p) != 0


@pytest.mark.parametrize("C", [qdr_build(1, 4, tower("F", 2, 0)), qdr_build(2, 2, tower("Z", 3, 0)),
                               koszul_build(2, 1, 2, 2)])
def test_frobenius_is_semilinear_chain_map(C):
    Phi = frobenius_action(C)
    assert Phi.check() == []
    assert Phi.components


def test_frobenius_overflow():
    Phi = frobenius_action(qdr_build(1, 2, tower("F", 2, 0)))
    assert {"weight": "(2)", "target": "(4)"} in Phi.overflow_report()
    with pytest.raises(BandError):
        Phi.apply((F(2),), 0, [Phi.ring.one])


@pytest.mark.parametrize("base", ["F", "Z"])
@pytest.mark.parametrize("p", [2, 3])
def test_breuil_kisin(base, p):
    C = qdr_build(1, 2 * p, tower(base, p, 0))
    for i in (0, 1):
        ok, items = breuil_kisin_check(C, i, (1, 8))
        assert ok
    with pytest.raises(BandError):
        breuil_kisin_check(qdr_build(1, p - 1, tower(base, p, 0)), 1)


@pytest.mark.parametrize("d,B", [(1, 1), (1, 3), (2, 2)])
def test_q_to_1(d, B):
    rep = specialize(qdr_build(d, B, tower("Z", 2, 0)), "q_to_1")
    assert rep["ok"] and rep["mismatches"] == []
    ref = classical_de_rham(d, B, INTEGERS)
    for w, b in rep["complex"]:
        # weight-j differential is j on the nose (d = 1), or the signed Koszul of w
        if d == 1:
            assert b.diffs[0].a == [[int(w[0])]]
        assert b.diffs == ref.block(w).diffs


def test_q_to_1_mod_2_dimension():
    rep = specialize(qdr_build(1, 2, tower("F", 2, 0)), "q_to_1")
    dim = sum(cohomology(b).dimension(1) for _, b in rep["complex"])
    assert dim == 3


def test_invert_mu_bound():
    rep = specialize(koszul_build(1, 1, 2, 2), "invert_mu")
    assert rep["ok"]
    mu = O.pmod([-1, 0, 1], 2)
    for blk in rep["blocks"]:
        for x in blk["divisors"]:
            assert O.pdivides(O.parse_poly(x["divisor"]), O.ppow(mu, 2), 2)


def test_total_h1_divisors():
    rep = total_h1_divisors(qdr_build(1, 3, tower("F", 3, 0)))
    assert rep.free_rank(1) == 1
    # invariant factors of (+) A/[j]_q, j = +-2, +-3: two copies of lcm([2]_q, [3]_q)
    a, b = O.qint(2), O.qint(3)
    lcm = O.monic(O.pdivmod(O.pmul(a, b, 3), O.pgcd(a, b, 3), 3)[0], 3)
    assert [O.monic(O.parse_poly(s), 3) for s in rep.divisor_strings(1)] == [lcm, lcm]
