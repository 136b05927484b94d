"""The decalage functor L eta_f, Bockstein complexes and their comparisons.

Lη_f N^n = {x in f^e N^n : dx in f^(e+1) N^(n+1)} with e = n - (lowest degree).
Since x = f^e y and N is free over a domain, the condition is d y in f N, so
each degree is f^e times the lattice returned by ``solve_in_submodule``.
"""

from __future__ import annotations

from .complexes import (ChainMap, CochainComplex, ComplexError, PresentedComplex,
                        PresentedMap, QuasiIsoVerdict, acyclicity_verdict,
                        cohomology_groups, presented_cone, presented_reduce)
from .linalg import Matrix, same_span, solve, solve_in_submodule
from .rings import Elem, RingError


def _raw(R, f):
    if isinstance(f, (Elem, int)):
        return R.coerce(f)
    return f


def _check_regular(R, f):
    if R.is_zero(f):
        raise RingError("f must be a non-zero divisor")
    if not R.is_domain:
        raise RingError("decalage needs a domain (got %s)" % R.name())


class EtaResult:
    def __init__(self, complex, inclusion, powers, lattices, f):
        self.complex = complex
        self.inclusion = inclusion
        self.powers = powers        # degree -> exponent of f
        self.lattices = lattices    # degree -> basis of {y : d y in f N}
        self.f = f

    def basis(self, n):
        """Columns: the chosen basis of Lη_f N^n inside N^n."""
        return self.inclusion.comp(n)


def eta(N, f):
    R = N.ring
    f = _raw(R, f)
    _check_regular(R, f)
    lo = N.lo
    powers, lattices, E = {}, {}, {}
    for n in N.degrees():
        e = n - lo
        d = N.d(n)
        if d.rows == 0:
            S = Matrix.identity(R, N.rank(n))
        else:
            S = solve_in_submodule(d, f)
        fe = R.pow(f, e)
        powers[n], lattices[n] = e, S
        E[n] = S.scale(fe)
    diffs = []
    for n in range(lo, N.hi):
        M = solve(E[n + 1], N.d(n) @ E[n])
        if M is None:
            raise AssertionError("Lη differential does not restrict (degree %d)" % n)
        diffs.append(M)
    L = CochainComplex(R, lo, N.ranks, diffs, check=False)
    inc = ChainMap(L, N, E)
    res = EtaResult(L, inc, powers, lattices, f)
    _assert_defining(N, res)
    return res


def _assert_defining(N, res):
    R = N.ring
    f = res.f
    for n in N.degrees():
        fe = R.pow(f, res.powers[n])
        fe1 = R.mul(fe, f)
        B = res.basis(n)
        dB = N.d(n) @ B
        for j in range(B.cols):
            for x in B.column(j):
                if R.divide_exact(x, fe) is None:
                    raise AssertionError("Lη basis vector not in f^n N^n")
            for x in dB.column(j):
                if not R.is_zero(x) and R.divide_exact(x, fe1) is None:
                    raise AssertionError("Lη basis vector has dx outside f^(n+1) N^(n+1)")


def eta_nat(N, f):
    """The inclusion Lη_f N -> N, with a certificate that it becomes a
    quasi-isomorphism after inverting f (every cone divisor divides f^T,
    T <= 2 * top degree)."""
    R = N.ring
    res = eta(N, f)
    phi = res.inclusion
    P = presented_cone(_free_map(phi))
    groups = cohomology_groups(P)
    T = 2 * max(N.hi - N.lo, 1)
    witness, ok = [], True
    for n in sorted(groups):
        for h in groups[n].divisors:
            t = _power_dividing(R, h, res.f, T)
            witness.append({"degree": n, "divisor": R.to_str(R.normalize(h)), "f_power": t})
            if t is None:
                ok = False
    return phi, {"inverts_f": ok, "bound": T, "divisors": witness}


def _power_dividing(R, h, f, T):
    """Least t <= T with h | f^t, or None."""
    if R.is_zero(h):
        return None
    ft = R.one
    for t in range(T + 1):
        if R.divides(h, ft):
            return t
        ft = R.mul(ft, f)
    return None


def _free_map(phi):
    S, T = phi.source, phi.target
    PS = PresentedComplex(S.ring, S.lo, S.ranks, S.diffs, [None] * len(S.ranks), check=False)
    PT = PresentedComplex(T.ring, T.lo, T.ranks, T.diffs, [None] * len(T.ranks), check=False)
    return PresentedMap(PS, PT, phi.components)


class BocksteinComplex:
    """(H^*(N/f), Bockstein) as a presented complex over the base ring."""

    def __init__(self, N, f, groups, presented):
        self.N, self.f = N, f
        self.groups = groups
        self.presented = presented

    def matrix(self, n):
        return self.presented.d(n)

    def divisors(self, n):
        H = self.groups.get(n)
        return [] if H is None else H.divisors


def _bock_vector(N, f, n, x):
    """Lift x (a cocycle mod f), apply d, divide by f."""
    R = N.ring
    dx = N.d(n).apply(x)
    y = []
    for c in dx:
        q = R.divide_exact(c, f)
        if q is None:
            raise AssertionError("Bockstein lift failure: dx not divisible by f")
        y.append(q)
    return y


def bockstein(N, f):
    R = N.ring
    f = _raw(R, f)
    _check_regular(R, f)
    groups = cohomology_groups(presented_reduce(N, f))
    degs = list(N.degrees())
    ranks = [groups[n].ngens if n in groups else 0 for n in degs]
    diffs = []
    for n in degs[:-1]:
        H0, H1 = groups.get(n), groups.get(n + 1)
        M = Matrix(R, ranks[n + 1 - N.lo], ranks[n - N.lo])
        if H0 is not None and H1 is not None:
            for j in range(H0.ngens):
                x = H0.gens.column(j)
                c = H1.reduce(H1.coords(_bock_vector(N, f, n, x)))
                for i, v in enumerate(c):
                    M.a[i][j] = v
                _check_lift_independence(N, f, n, x, c, H1)
        diffs.append(M)
    rels = []
    for n in degs:
        H = groups.get(n)
        rels.append(Matrix.diag(R, list(H.divisors)) if H is not None else Matrix(R, 0, 0))
    P = PresentedComplex(R, N.lo, ranks, diffs, rels, check=True)
    return BocksteinComplex(N, f, groups, P)


def _check_lift_independence(N, f, n, x, c, H1):
    # another lift x + f*w and another representative x + d z give the same class
    R = N.ring
    s = N.rank(n)
    w = [R.one] * s
    alt = [R.add(a, R.mul(f, b)) for a, b in zip(x, w)]
    if n - 1 >= N.lo and N.rank(n - 1):
        z = [R.one] * N.rank(n - 1)
        dz = N.d(n - 1).apply(z)
        alt = [R.add(a, b) for a, b in zip(alt, dz)]
    c2 = H1.coords(_bock_vector(N, f, n, alt))
    diff = [R.sub(a, b) for a, b in zip(c, c2)]
    if not H1.coords_zero(diff):
        raise AssertionError("Bockstein depends on the chosen lift")


def bockstein_squared_zero(B):
    P = B.presented
    R = P.ring
    for n in P.degrees():
        dd = P.d(n + 1) @ P.d(n)
        L = P.rel(n + 2)
        for col in dd.columns():
            for i, x in enumerate(col):
                if not R.divides(L.a[i][i], x):
                    return False
    return True


def eta_bockstein_compare(N, f):
    """Certify Lη_f N (x) A/f  ~  (H^*(N/f), Bock) via the map f^n v -> [v]."""
    R = N.ring
    f = _raw(R, f)
    E = eta(N, f)
    B = bockstein(N, f)
    src = presented_reduce(E.complex, f)
    tgt = B.presented
    comps = {}
    for n in N.degrees():
        H = B.groups.get(n)
        S = E.lattices[n]
        M = Matrix(R, tgt.rank(n), S.cols)
        if H is not None:
            for j in range(S.cols):
                c = H.reduce(H.coords(S.column(j)))
                for i, v in enumerate(c):
                    M.a[i][j] = v
        comps[n] = M
    phi = PresentedMap(src, tgt, comps)
    bad = phi.check()
    if bad is not None:
        return QuasiIsoVerdict(False, "exact", [{"degree": bad, "error": "comparison map is not a chain map"}])
    return acyclicity_verdict(presented_cone(phi), "exact")


def _compose(psi, phi):
    S, T = phi.source, psi.target
    return ChainMap(S, T, {n: psi.comp(n) @ phi.comp(n) for n in phi.degrees()}, check=False)


def eta_identities(N, f, g):
    """Multiplicativity Lη_fg = Lη_f Lη_g (as subcomplexes of N) and the
    base change (Lη_f N)/g ~ Lη_{f mod g}(N/g).

    Base change is certified when f mod g is a unit of A/(g) (the map
    Lη_f N -> N reduced mod g must then be a quasi-isomorphism); when f mod g
    is a zero divisor the case is skipped and the reason recorded.
    """
    R = N.ring
    f, g = _raw(R, f), _raw(R, g)
    report = {}
    Efg = eta(N, R.mul(f, g))
    Eg = eta(N, g)
    Ef = eta(Eg.complex, f)
    comp = _compose(Eg.inclusion, Ef.inclusion)
    mult_ok = True
    for n in N.degrees():
        if not same_span(Efg.basis(n), comp.comp(n)):
            mult_ok = False
    report["multiplicativity"] = {"ok": mult_ok}
    gg = R.gcd(f, g)
    if not R.is_unit(gg):
        report["base_change"] = {"ok": None, "skipped": "f mod g is a zero divisor in A/(g) (gcd %s)" % R.to_str(R.normalize(gg))}
        return report
    # hypothesis: H^0(N/g) has no f-torsion
    groups = cohomology_groups(presented_reduce(N, g))
    H0 = groups.get(N.lo)
    if H0 is not None:
        for e in H0.divisors:
            if not R.is_zero(e) and not R.is_unit(R.gcd(e, f)):
                report["base_change"] = {"ok": None, "skipped": "H^0(N/gN) has f-torsion"}
                return report
    Ef_full = eta(N, f)
    src = presented_reduce(Ef_full.complex, g)
    tgt = presented_reduce(N, g)
    phi = PresentedMap(src, tgt, Ef_full.inclusion.components)
    verdict = acyclicity_verdict(presented_cone(phi), "exact")
    report["base_change"] = {"ok": verdict.ok, "witness": verdict.witness}
    return report
