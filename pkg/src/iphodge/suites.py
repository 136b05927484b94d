"""Random corpora and the bundled verification suites.

Every suite returns a list of case dicts with a "verdict" in
{"pass", "fail", "skip"}; skips always carry a reason.  Cases are produced
in a fixed order from the seed, so reports are reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .complexes import (CochainComplex, complex_json, cohomology, fmt_weight, tensor_product,
                        two_term, validate)
from .decalage import bockstein, bockstein_squared_zero, eta_bockstein_compare, eta_identities
from .linalg import Matrix
from .rings import (INTEGERS, DistinguishedElements, IntegersMod, PolynomialOver, PrimeField,
                    embed, frobenius, q_int, specialize_q, tower)


class ConfigError(ValueError):
    """A suite or corpus parameter violates a precondition (exit code 2)."""


# --- corpora ------------------------------------------------------------------------

def _unimodular(n, rng, steps=None):
    """A random n x n integer matrix of determinant +-1 and its inverse."""
    g = [[int(i == j) for j in range(n)] for i in range(n)]
    gi = [row[:] for row in g]
    for _ in range(steps if steps is not None else 2 * n):
        if n < 2:
            if rng.random() < 0.5:
                g[0][0] = -g[0][0]
                gi[0][0] = -gi[0][0]
            continue
        i, j = rng.sample(range(n), 2)
        c = rng.choice([-2, -1, 1, 2])
        # g <- E g with E = 1 + c e_ij ; gi <- gi E^-1
        g[i] = [a + c * b for a, b in zip(g[i], g[j])]
        for row in gi:
            row[j] -= c * row[i]
    return g, gi


def _matmul(a, b):
    return [[sum(a[i][t] * b[t][j] for t in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def _direct_sum(R, parts, lo, ndeg):
    """Block-diagonal sum of complexes (each with its own lo) in degrees lo..lo+ndeg-1."""
    ranks = [sum(P.rank(n) for P in parts) for n in range(lo, lo + ndeg)]
    diffs = []
    for n in range(lo, lo + ndeg - 1):
        M = Matrix(R, ranks[n + 1 - lo], ranks[n - lo])
        r0 = c0 = 0
        for P in parts:
            D = P.d(n)
            for i in range(D.rows):
                for j in range(D.cols):
                    M.a[r0 + i][c0 + j] = D.a[i][j]
            r0 += P.rank(n + 1)
            c0 += P.rank(n)
        diffs.append(M)
    return CochainComplex(R, lo, ranks, diffs)


def _change_basis(C, rng):
    """g_{n+1} d_n g_n^-1 with random unimodular g_n."""
    R = C.ring
    gs = [_unimodular(r, rng) if r else ([], []) for r in C.ranks]
    diffs = []
    for i, M in enumerate(C.diffs):
        if M.rows == 0 or M.cols == 0:
            diffs.append(M)
            continue
        a = [[int(x) for x in row] for row in M.a]
        b = _matmul(_matmul(gs[i + 1][0], a), gs[i][1])
        diffs.append(Matrix.from_ints(R, b))
    return CochainComplex(R, C.lo, C.ranks, diffs)


def random_free_complex(rng, max_rank=5, max_degrees=4, max_entry=12):
    """A random bounded complex of free ZZ-modules, d o d = 0 by construction:
    a direct sum of elementary pieces (free summands, two-term complexes
    [ZZ --a--> ZZ], and tensor products of two of those) followed by a
    random unimodular change of basis in every degree."""
    R = INTEGERS
    ndeg = rng.randint(2, max_degrees)
    parts = []
    ranks = [0] * ndeg
    for _ in range(rng.randint(1, 2 * max_rank)):
        kind = rng.random()
        if kind < 0.2:
            n = rng.randrange(ndeg)
            piece = CochainComplex(R, n, [1], [])
        elif kind < 0.8 or ndeg < 3:
            n = rng.randrange(ndeg - 1)
            a = rng.choice([0, 1, -1] + [rng.randint(-max_entry, max_entry) for _ in range(4)])
            piece = two_term(R, a, n)
        else:
            n = rng.randrange(ndeg - 2)
            a = rng.randint(-max_entry // 2, max_entry // 2)
            b = rng.randint(-max_entry // 2, max_entry // 2)
            piece = tensor_product(two_term(R, a, 0), two_term(R, b, 0)).shift_to(n)
        new = [ranks[i] + piece.rank(i) for i in range(ndeg)]
        if max(new) > max_rank:
            continue
        ranks = new
        parts.append(piece)
    if not parts:
        parts.append(CochainComplex(R, 0, [1], []))
    C = _direct_sum(R, parts, 0, ndeg)
    C = _change_basis(C, rng)
    bad = validate(C)
    if bad is not None:
        raise AssertionError("corpus generator produced a non-complex: %s" % bad[1])
    return C


def corpus_generate(kind, params=None, seed=0):
    params = dict(params or {})
    rng = random.Random(seed)
    if kind == "random-free-Z":
        cases = int(params.get("cases", 100))
        return [random_free_complex(rng, int(params.get("max_rank", 5)), int(params.get("max_degrees", 4)))
                for _ in range(cases)]
    if kind == "two-term-p-power":
        p, amax = int(params.get("p", 2)), int(params.get("a_max", 6))
        return [two_term(INTEGERS, p ** a) for a in range(amax + 1)]
    if kind == "koszul-grid":
        from .qtorus import koszul_build
        K = koszul_build(int(params.get("d", 1)), int(params.get("k", 1)), int(params.get("B", 1)),
                         int(params.get("p", 2)), params.get("mode", "F"))
        out = []
        for w in K.weights():
            C = K.block(w)
            out.append(CochainComplex(C.ring, C.lo, C.ranks, C.diffs, weights=[w], check=False))
        return out
    raise ConfigError("unknown corpus kind %r (expected random-free-Z, two-term-p-power, koszul-grid)" % kind)


# --- case helpers ----------------------------------------------------------------------

def _case(name, ok, **extra):
    out = {"case": name, "verdict": "pass" if ok else "fail"}
    out.update(extra)
    return out


def _skip(name, reason, **extra):
    out = {"case": name, "verdict": "skip", "reason": reason}
    out.update(extra)
    return out


# --- suites ----------------------------------------------------------------------------

def suite_eta_bockstein(seed=0, cases=100, primes=(2, 3)):
    out = []
    corpus = corpus_generate("random-free-Z", {"cases": cases}, seed)
    for i, C in enumerate(corpus):
        for p in primes:
            v = eta_bockstein_compare(C, p)
            sq = bockstein_squared_zero(bockstein(C, p))
            ok = v.ok and sq
            extra = {"f": str(p), "witness": v.witness}
            if not ok:
                extra["complex"] = complex_json(C)
            out.append(_case("complex-%d/f=%d" % (i, p), ok, **extra))
    return out


def suite_eta_identities(seed=0, cases=100, pairs=((2, 3), (2, 2), (3, 5))):
    out = []
    corpus = corpus_generate("random-free-Z", {"cases": cases}, seed)
    for i, C in enumerate(corpus):
        for f, g in pairs:
            rep = eta_identities(C, f, g)
            name = "complex-%d/(f,g)=(%d,%d)" % (i, f, g)
            m = rep["multiplicativity"]["ok"]
            bc = rep["base_change"]
            extra = {"multiplicativity": m, "base_change": bc}
            if bc.get("ok") is None:
                ok = m
                if ok:
                    out.append(_skip(name + "/base-change", bc["skipped"]))
                    out.append(_case(name + "/multiplicativity", True))
                    continue
            else:
                ok = m and bc["ok"]
            if not ok:
                extra["complex"] = complex_json(C)
            out.append(_case(name, ok, **extra))
    return out


WITT_PRIMES = (2, 3, 5)
WITT_LENGTHS = (1, 2, 3, 4)


def witt_rings(p):
    return [("Z", INTEGERS), ("Z/p^3", IntegersMod(p ** 3)), ("F_p[t]", PolynomialOver(PrimeField(p), "t"))]


def suite_witt(seed=0, cases=100, primes=WITT_PRIMES, lengths=WITT_LENGTHS):
    from .witt import witt_identities
    out = []
    for p in primes:
        for label, R in witt_rings(p):
            for r in lengths:
                res = witt_identities(R, p, r, cases, seed)
                for name, (passed, fails) in sorted(res.items()):
                    cname = "%s/p=%d/r=%d/%s" % (label, p, r, name)
                    if passed == 0 and not fails:
                        out.append(_skip(cname, "identity needs a longer length"))
                        continue
                    out.append(_case(cname, not fails, checked=str(passed + len(fails)),
                                     counterexample=[repr(f) for f in fails[:1]]))
    return out


def distinguished_checks(p, k, r):
    """The distinguished-element identities at level k for xi_r."""
    R = tower("Z", p, k)
    D = DistinguishedElements(R)
    mu, xr = D.mu, D.xi_r(r)
    checks = {}
    checks["mu_factor"] = mu == xr * D.phi_inv_mu(r)
    R1 = tower("Z", p, 1)
    xi1 = R1.from_poly([1] * p)
    from .rings import Elem
    prod = Elem(R, R.one)
    for i in range(r):
        prod = prod * embed(frobenius(Elem(R1, xi1), -i), k)
    checks["xi_r_product"] = prod == xr
    checks["xi_r_at_1"] = int(specialize_q(xr, 1).v) == p ** r
    if k >= 1:
        checks["phi_xi"] = frobenius(D.xi) == embed(q_int(p, R.at_level(0)), k)
    F = tower("F", p, 0)
    q1 = F.from_poly([-1, 1])
    checks["p_q_mod_p"] = F.eq(q_int(p, F).v, F.pow(q1, p - 1))
    return checks


def suite_distinguished(primes=WITT_PRIMES, kmax=4):
    out = []
    for p in primes:
        for k in range(1, kmax + 1):
            for r in range(1, k + 1):
                for name, ok in sorted(distinguished_checks(p, k, r).items()):
                    out.append(_case("p=%d/k=%d/r=%d/%s" % (p, k, r, name), ok))
    return out


TORUS_GRID = [(d, p, k, "F") for d in (1, 2) for p in (2, 3) for k in (0, 1, 2)] + \
             [(1, p, k, "Z") for p in (2, 3) for k in (0, 1, 2)]


def suite_torus(junk=(1, 8), B=3, grid=TORUS_GRID):
    from .qtorus import compare_eta_qdr, koszul_build
    out = []
    for d, p, k, mode in grid:
        K = koszul_build(d, k, B, p, mode)
        ok, items = compare_eta_qdr(K, junk)
        for it in items:
            name = "%s/d=%d/p=%d/k=%d/w=%s" % (mode, d, p, k, it["weight"])
            if it["ok"]:
                out.append(_case(name, True, kind=it["kind"]))
            else:
                out.append(_case(name, False, detail=it))
    return out


def suite_invert_mu(B=3, grid=TORUS_GRID):
    from .qtorus import koszul_build, specialize
    out = []
    for d, p, k, mode in grid:
        rep = specialize(koszul_build(d, k, B, p, mode), "invert_mu")
        for it in rep["blocks"]:
            out.append(_case("%s/d=%d/p=%d/k=%d/w=%s" % (mode, d, p, k, it["weight"]), it["ok"],
                             divisors=it["divisors"]))
    return out


def suite_q_to_1(dims=(1, 2), bands=(1, 2, 3), primes=(2, 3)):
    from .qtorus import qdr_build, specialize
    out = []
    for base in ("Z", "F"):
        for p in primes:
            for d in dims:
                for B in bands:
                    rep = specialize(qdr_build(d, B, tower(base, p, 0)), "q_to_1")
                    out.append(_case("%s/p=%d/d=%d/B=%d" % (base, p, d, B), rep["ok"], mismatches=rep["mismatches"]))
    return out


def suite_breuil_kisin(junk=(1, 8), primes=(2, 3)):
    from .qtorus import breuil_kisin_check, qdr_build
    out = []
    for base in ("F", "Z"):
        for p in primes:
            C = qdr_build(1, 2 * p, tower(base, p, 0))
            for i in (0, 1):
                ok, items = breuil_kisin_check(C, i, junk)
                out.append(_case("%s/p=%d/B=%d/i=%d" % (base, p, 2 * p, i), ok,
                                 detail=[it for it in items if it["cokernel"]]))
    return out


FV_GRID = [(d, p, r) for d in (1, 2) for p in (2, 3) for r in (1, 2, 3)]


def suite_fv_axioms(seed=0, B=3, grid=FV_GRID, full_band=False):
    from .fvproc import TorusDga, axioms_check, improved_process, weight_sample
    out = []
    for d, p, r in grid:
        D = TorusDga(d, B, p, r)
        ws = D.weights() if full_band else weight_sample(D, seed=seed)
        rep = axioms_check(improved_process(D, r), ws, seed=seed).to_json()
        for name, it in rep["axioms"].items():
            cname = "d=%d/p=%d/r=%d/%s" % (d, p, r, name)
            if it["checked"] == 0:
                out.append(_skip(cname, it.get("skip_reason", "not applicable"), weights=str(len(ws))))
            else:
                out.append(_case(cname, it["pass"], checked=str(it["checked"]), weights=str(len(ws)),
                                 counterexample=it["counterexample"]))
    return out


def suite_fv_rewrite(seed=0, B=3, grid=FV_GRID, junk=(1, 8), full_band=False):
    from .fvproc import TorusDga, compare_pre_improved, rewrite_as_eta, weight_sample
    out = []
    for d, p, r in grid:
        D = TorusDga(d, B, p, r)
        ws = D.weights() if full_band else weight_sample(D, seed=seed)
        ok, items = rewrite_as_eta(D, r, ws)
        bad = [it for it in items if not it["ok"]]
        out.append(_case("d=%d/p=%d/r=%d/rewrite" % (d, p, r), ok, weights=str(len(ws)), failures=bad[:3]))
        ok2, items2 = compare_pre_improved(D, r, junk, ws)
        bad2 = [it for it in items2 if not it["ok"]]
        out.append(_case("d=%d/p=%d/r=%d/pre-vs-improved" % (d, p, r), ok2, weights=str(len(ws)),
                         failures=bad2[:3]))
    return out


def suite_fitting(primes=(2, 3), B=4):
    """H^1 of the d = 1 q-de Rham complex over GF(p)[q]: blockwise divisors
    against the closed form [|j|]_q (units dropped, weight 0 free)."""
    from .qtorus import qdr_build
    out = []
    for p in primes:
        F = tower("F", p, 0)
        C = qdr_build(1, B, F)
        for w in C.weights():
            j = int(w[0])
            rep = cohomology(C.block(w))
            got = (rep.free_rank(1), rep.divisor_strings(1))
            if j == 0:
                want = (1, [])
            elif abs(j) == 1:
                want = (0, [])
            else:
                want = (0, [F.to_str(F.normalize(q_int(abs(j), F).v))])
            out.append(_case("p=%d/j=%d" % (p, j), got == want, got=[str(got[0]), got[1]]))
    return out


SUITES = {
    "eta-bockstein": lambda a: suite_eta_bockstein(a.seed, a.cases),
    "eta-identities": lambda a: suite_eta_identities(a.seed, a.cases),
    "witt": lambda a: suite_witt(a.seed, a.cases),
    "distinguished": lambda a: suite_distinguished(),
    "torus": lambda a: suite_torus(a.trunc),
    "q-to-1": lambda a: suite_q_to_1(),
    "invert-mu": lambda a: suite_invert_mu(),
    "breuil-kisin": lambda a: suite_breuil_kisin(a.trunc),
    "fv-axioms": lambda a: suite_fv_axioms(a.seed),
    "fv-rewrite": lambda a: suite_fv_rewrite(a.seed, junk=a.trunc),
    "fitting": lambda a: suite_fitting(),
}


def run_suite(name, args):
    if name == "all":
        out = []
        for key in SUITES:
            out.extend({**c, "case": key + ":" + c["case"]} for c in SUITES[key](args))
        return out
    if name not in SUITES:
        raise ConfigError("unknown suite %r" % name)
    return SUITES[name](args)
