"""Bounded cochain complexes of finite free modules and their cohomology.

Cohomology over a quotient ring A/(m) is computed over A itself by adding
the relations m * ambient in every degree; the same "presented complex" is
used for the Bockstein complex, whose terms are cohomology modules rather
than free modules.
"""

from __future__ import annotations

from .linalg import (Matrix, Subquotient, kernel, matrix_from_json, matrix_json,
                     preimage)
from .rings import (INTEGERS, Elem, Integers, IntegersMod, PolynomialOver,
                    QuotientRing, RingError, TowerRing, ring_from_json,
                    unit_in_truncation)


class ComplexError(ValueError):
    def __init__(self, msg, degree=None):
        ValueError.__init__(self, msg)
        self.degree = degree


class CochainComplex:
    """Terms ring^ranks[i] in degrees lo .. lo+len(ranks)-1.

    diffs[i] is the matrix of d^{lo+i} : C^{lo+i} -> C^{lo+i+1}.
    """

    def __init__(self, ring, lo, ranks, diffs, weights=None, check=True):
        self.ring = ring
        self.lo = lo
        self.ranks = list(ranks)
        if len(diffs) != max(len(self.ranks) - 1, 0):
            raise ComplexError("need one differential per pair of adjacent degrees")
        self.diffs = list(diffs)
        self.weights = weights
        if check:
            bad = validate(self)
            if bad is not None:
                raise ComplexError(bad[1], bad[0])

    @property
    def hi(self):
        return self.lo + len(self.ranks) - 1

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def rank(self, n):
        i = n - self.lo
        return self.ranks[i] if 0 <= i < len(self.ranks) else 0

    def d(self, n):
        i = n - self.lo
        if 0 <= i < len(self.diffs):
            return self.diffs[i]
        return Matrix(self.ring, self.rank(n + 1), self.rank(n))

    def euler(self):
        return sum((-1) ** n * self.rank(n) for n in self.degrees())

    def shift_to(self, lo):
        return CochainComplex(self.ring, lo, self.ranks, self.diffs, self.weights, check=False)

    def map_entries(self, fn, ring):
        return CochainComplex(ring, self.lo, self.ranks, [M.map(fn, ring) for M in self.diffs],
                              self.weights, check=False)

    def __repr__(self):
        return "CochainComplex(%s, lo=%d, ranks=%s)" % (self.ring.name(), self.lo, self.ranks)


def validate(C):
    """None if C is a complex, else (degree, message) for the first failure."""
    for i, M in enumerate(C.diffs):
        n = C.lo + i
        if M.ring != C.ring:
            return n, "differential in degree %d over the wrong ring" % n
        if (M.rows, M.cols) != (C.ranks[i + 1], C.ranks[i]):
            return n, "differential in degree %d has shape %dx%d, expected %dx%d" % (
                n, M.rows, M.cols, C.ranks[i + 1], C.ranks[i])
    for i in range(len(C.diffs) - 1):
        if not (C.diffs[i + 1] @ C.diffs[i]).is_zero():
            return C.lo + i, "d^%d o d^%d != 0" % (C.lo + i + 1, C.lo + i)
    return None


def zero_complex(ring, lo=0):
    return CochainComplex(ring, lo, [], [])


def two_term(ring, c, lo=0):
    """[ring --c--> ring] in degrees lo, lo+1."""
    c = ring.coerce(c) if not _is_raw(ring, c) else c
    return CochainComplex(ring, lo, [1, 1], [Matrix(ring, 1, 1, [[c]])])


def _is_raw(ring, c):
    return not isinstance(c, (Elem, int))


class ChainMap:
    """components[n] : source^n -> target^n."""

    def __init__(self, source, target, components, check=True):
        self.source, self.target = source, target
        self.components = dict(components)
        if check:
            bad = self.check()
            if bad is not None:
                raise ComplexError("not a chain map: square at degree %d fails" % bad, bad)

    def comp(self, n):
        M = self.components.get(n)
        if M is None:
            return Matrix(self.source.ring, self.target.rank(n), self.source.rank(n))
        return M

    def degrees(self):
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        return range(lo, hi + 1)

    def check(self):
        S, T = self.source, self.target
        for n in self.degrees():
            if not (T.d(n) @ self.comp(n) == self.comp(n + 1) @ S.d(n)):
                return n
        return None


def identity_map(C):
    return ChainMap(C, C, {n: Matrix.identity(C.ring, C.rank(n)) for n in C.degrees()})


def _block(ring, blocks, rows, cols):
    # blocks: 2x2 list of matrices (or None for zero), rows/cols: block sizes
    M = Matrix(ring, sum(rows), sum(cols))
    r0 = 0
    for bi, br in enumerate(blocks):
        c0 = 0
        for bj, B in enumerate(br):
            if B is not None:
                for i in range(B.rows):
                    for j in range(B.cols):
                        M.a[r0 + i][c0 + j] = B.a[i][j]
            c0 += cols[bj]
        r0 += rows[bi]
    return M


def cone(phi):
    """cone^n = S^{n+1} + T^n with d = [[-d_S, 0], [phi, d_T]]."""
    S, T = phi.source, phi.target
    R = S.ring
    lo = min(S.lo - 1, T.lo)
    hi = max(S.hi - 1, T.hi)
    if S.hi < S.lo and T.hi < T.lo:
        return zero_complex(R)
    ranks = [S.rank(n + 1) + T.rank(n) for n in range(lo, hi + 1)]
    diffs = []
    for n in range(lo, hi):
        rows = [S.rank(n + 2), T.rank(n + 1)]
        cols = [S.rank(n + 1), T.rank(n)]
        diffs.append(_block(R, [[-S.d(n + 1), None], [phi.comp(n + 1), T.d(n)]], rows, cols))
    return CochainComplex(R, lo, ranks, diffs)


def tensor_product(C, D):
    """Signed tensor product; degree n = sum over j ascending of C^{n-j} (x) D^j,
    basis ordered C-index major, sign (-1)^{deg c} on the D-differential."""
    R = C.ring
    if C.ring != D.ring:
        raise RingError("tensor product needs a common ring")
    if not C.ranks or not D.ranks:
        return zero_complex(R)
    lo, hi = C.lo + D.lo, C.hi + D.hi

    def layout(n):
        out, off = {}, 0
        for j in range(D.lo, D.hi + 1):
            i = n - j
            if C.lo <= i <= C.hi:
                out[j] = off
                off += C.rank(i) * D.rank(j)
        return out, off

    lays = {n: layout(n) for n in range(lo, hi + 2)}
    ranks = [lays[n][1] for n in range(lo, hi + 1)]
    diffs = []
    for n in range(lo, hi):
        src, nsrc = lays[n]
        dst, ndst = lays[n + 1]
        M = Matrix(R, ndst, nsrc)
        for j, off in src.items():
            i = n - j
            rc, rd = C.rank(i), D.rank(j)
            # d_C (x) 1 : C^i (x) D^j -> C^{i+1} (x) D^j
            if j in dst and i + 1 <= C.hi:
                dC = C.d(i)
                o2 = dst[j]
                for a in range(rc):
                    for b in range(rd):
                        for a2 in range(C.rank(i + 1)):
                            x = dC.a[a2][a]
                            if not R.is_zero(x):
                                M.a[o2 + a2 * rd + b][off + a * rd + b] = x
            # (-1)^i 1 (x) d_D : C^i (x) D^j -> C^i (x) D^{j+1}
            if j + 1 in dst and j + 1 <= D.hi:
                dD = D.d(j)
                o2 = dst[j + 1]
                rd2 = D.rank(j + 1)
                for a in range(rc):
                    for b in range(rd):
                        for b2 in range(rd2):
                            x = dD.a[b2][b]
                            if not R.is_zero(x):
                                M.a[o2 + a * rd2 + b2][off + a * rd + b] = R.neg(x) if i % 2 else x
        diffs.append(M)
    return CochainComplex(R, lo, ranks, diffs)


def quotient_ring(R, f):
    """R/(f) as a ring object (f raw, regular, non-unit)."""
    if R.is_zero(f):
        raise RingError("cannot reduce modulo zero")
    if R.is_unit(f):
        raise RingError("reduction modulo a unit gives the zero ring")
    if isinstance(R, Integers):
        return IntegersMod(abs(f))
    if isinstance(R, (PolynomialOver, TowerRing)):
        if not R.is_domain:
            raise RingError("tensor_reduce needs a regular element")
        return QuotientRing(R, f)
    raise RingError("cannot form the quotient of %s" % R.name())


def tensor_reduce(C, f):
    """C (x)_A A/(f) for a free complex C and a regular f."""
    R = C.ring
    f = R.coerce(f) if isinstance(f, (Elem, int)) else f
    Q = quotient_ring(R, f)
    if isinstance(Q, IntegersMod):
        fn = lambda x: x % Q.m
    else:
        fn = Q.reduce
    return C.map_entries(fn, Q)


# --- presented complexes -------------------------------------------------------

class PresentedComplex:
    """A complex of finitely presented modules over a base ring A.

    In degree n the module is A^ranks / span(rel[n]); diffs are matrices on
    the ambient free modules sending relations into relations.
    """

    def __init__(self, ring, lo, ranks, diffs, rels, check=True):
        self.ring = ring
        self.lo = lo
        self.ranks = list(ranks)
        self.diffs = list(diffs)
        self.rels = list(rels)
        if check:
            self._check()

    hi = CochainComplex.hi
    degrees = CochainComplex.degrees
    rank = CochainComplex.rank
    d = CochainComplex.d

    def rel(self, n):
        i = n - self.lo
        if 0 <= i < len(self.rels):
            return self.rels[i]
        return None

    def _check(self):
        from .linalg import in_span
        for n in self.degrees():
            d, L = self.d(n), self.rel(n + 1)
            for M in ([self.rel(n)] if self.rel(n) is not None else []):
                for c in M.columns():
                    img = d.apply(c)
                    if not _in_rel(self.ring, L, img):
                        raise ComplexError("differential does not preserve relations at degree %d" % n, n)
            dd = self.d(n + 1) @ d
            for c in dd.columns():
                if not _in_rel(self.ring, self.rel(n + 2), c):
                    raise ComplexError("d o d != 0 modulo relations at degree %d" % n, n)


def _in_rel(R, L, v):
    from .linalg import in_span
    if all(R.is_zero(x) for x in v):
        return True
    if L is None or L.cols == 0:
        return False
    return in_span(L, v)


def presented(C):
    """A free complex over R -> presented complex over the lift base of R."""
    R = C.ring
    A, m = R.lift_base()
    if m is None:
        return PresentedComplex(R, C.lo, C.ranks, C.diffs, [None] * len(C.ranks), check=False)
    lift = R.lift if hasattr(R, "lift") else (lambda x: x)
    diffs = [M.map(lift, A) for M in C.diffs]
    rels = [Matrix.diag(A, [m] * r) for r in C.ranks]
    return PresentedComplex(A, C.lo, C.ranks, diffs, rels, check=False)


def presented_reduce(C, f):
    """Free complex C over a domain A, viewed over A/(f) without leaving A."""
    R = C.ring
    rels = [Matrix.diag(R, [f] * r) for r in C.ranks]
    return PresentedComplex(R, C.lo, C.ranks, C.diffs, rels, check=False)


class PresentedMap:
    def __init__(self, source, target, components):
        self.source, self.target = source, target
        self.components = dict(components)

    def comp(self, n):
        M = self.components.get(n)
        if M is None:
            return Matrix(self.source.ring, self.target.rank(n), self.source.rank(n))
        return M

    degrees = ChainMap.degrees

    def check(self):
        R = self.source.ring
        S, T = self.source, self.target
        for n in self.degrees():
            lhs = T.d(n) @ self.comp(n)
            rhs = self.comp(n + 1) @ S.d(n)
            for c in (lhs - rhs).columns():
                if not _in_rel(R, T.rel(n + 1), c):
                    return n
            L = S.rel(n)
            if L is not None:
                for c in (self.comp(n) @ L).columns():
                    if not _in_rel(R, T.rel(n), c):
                        return n
        return None


def as_presented_map(phi):
    """A chain map of free complexes over R -> a map of presented complexes."""
    PS, PT = presented(phi.source), presented(phi.target)
    R = phi.source.ring
    lift = R.lift if hasattr(R, "lift") else (lambda x: x)
    A = PS.ring
    comps = {n: phi.comp(n).map(lift, A) for n in phi.degrees()}
    return PresentedMap(PS, PT, comps)


def presented_cone(phi):
    S, T = phi.source, phi.target
    R = S.ring
    lo = min(S.lo - 1, T.lo)
    hi = max(S.hi - 1, T.hi)
    ranks = [S.rank(n + 1) + T.rank(n) for n in range(lo, hi + 1)]
    diffs, rels = [], []
    for n in range(lo, hi):
        rows = [S.rank(n + 2), T.rank(n + 1)]
        cols = [S.rank(n + 1), T.rank(n)]
        diffs.append(_block(R, [[-S.d(n + 1), None], [phi.comp(n + 1), T.d(n)]], rows, cols))
    for n in range(lo, hi + 1):
        a, b = S.rel(n + 1), T.rel(n)
        ra, rb = S.rank(n + 1), T.rank(n)
        a = a if a is not None else Matrix(R, ra, 0)
        b = b if b is not None else Matrix(R, rb, 0)
        rels.append(_block(R, [[a, None], [None, b]], [ra, rb], [a.cols, b.cols]))
    return PresentedComplex(R, lo, ranks, diffs, rels, check=False)


# --- cohomology ------------------------------------------------------------------

def cohomology_groups(P):
    """{n: Subquotient} for a presented complex."""
    A = P.ring
    out = {}
    for n in P.degrees():
        s = P.rank(n)
        if s == 0:
            continue
        d = P.d(n)
        if d.rows == 0:
            Z = Matrix.identity(A, s)
        else:
            L = P.rel(n + 1)
            Z = preimage(d, L) if L is not None and L.cols else kernel(d)
        gens = []
        dp = P.d(n - 1)
        if dp.cols:
            gens.extend(dp.columns())
        L = P.rel(n)
        if L is not None:
            gens.extend(L.columns())
        B = Matrix.from_columns(A, s, gens) if gens else None
        if Z.cols == 0:
            continue
        H = Subquotient(Z, B)
        H.den = B
        out[n] = H
    return out


class CohomologyReport:
    """Per-degree cohomology of a complex over ring (computed over its lift base)."""

    def __init__(self, ring, groups, degrees):
        self.ring = ring
        self.base, self.modulus = ring.lift_base()
        self.groups = groups
        self.degrees = list(degrees)

    def group(self, n):
        return self.groups.get(n)

    def _split(self, n):
        A, m = self.base, self.modulus
        H = self.groups.get(n)
        if H is None:
            return 0, []
        free, tors = 0, []
        for d in H.divisors:
            if A.is_zero(d) or (m is not None and A.associates(d, m)):
                free += 1
            else:
                tors.append(d)
        return free, tors

    def free_rank(self, n):
        return self._split(n)[0]

    def torsion(self, n):
        return [Elem(self.base, d) for d in self._split(n)[1]]

    def divisor_strings(self, n):
        A = self.base
        return [A.to_str(A.normalize(d)) for d in self._split(n)[1]]

    def is_zero(self, n):
        H = self.groups.get(n)
        return H is None or H.ngens == 0

    def acyclic(self):
        return all(self.is_zero(n) for n in self.degrees)

    def dimension(self, n):
        """Dimension over the prime field, for finite-dimensional coefficient algebras."""
        R, A, m = self.ring, self.base, self.modulus
        if isinstance(R, IntegersMod) and R.is_field:
            return self.groups[n].ngens if n in self.groups else 0
        if isinstance(R, QuotientRing) and A.base.is_field:
            H = self.groups.get(n)
            if H is None:
                return 0
            return sum(_degree(A, d) for d in H.divisors)
        return None

    def euler(self):
        return sum((-1) ** n * self.free_rank(n) for n in self.degrees)

    def to_json(self):
        out = []
        for n in self.degrees:
            item = {"degree": n, "free_rank": self.free_rank(n), "divisors": self.divisor_strings(n)}
            dim = self.dimension(n)
            if dim is not None:
                item["dimension"] = dim
            out.append(item)
        return {"ring": self.ring.descriptor(), "groups": out}


def _degree(A, d):
    P = d[1] if isinstance(A, TowerRing) else d
    return P.degree()


def cohomology(C):
    """Cohomology of a free complex (any supported ring) or a presented complex."""
    if isinstance(C, PresentedComplex):
        return CohomologyReport(C.ring, cohomology_groups(C), C.degrees())
    P = presented(C)
    return CohomologyReport(C.ring, cohomology_groups(P), C.degrees())


# --- quasi-isomorphisms ---------------------------------------------------------

class QuasiIsoVerdict:
    def __init__(self, ok, mode, witness):
        self.ok = ok
        self.mode = mode
        self.witness = witness

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"quasi_iso": self.ok, "mode": self.mode, "witness": self.witness}

    def __repr__(self):
        return "QuasiIsoVerdict(%s, %s, %s)" % (self.ok, self.mode, self.witness)


def acyclicity_verdict(P, mode="exact", junk=None):
    """Decide acyclicity of a presented complex (exact, or up to junk units)."""
    groups = cohomology_groups(P)
    A = P.ring
    witness = []
    ok = True
    for n in sorted(groups):
        H = groups[n]
        for d in H.divisors:
            s = A.to_str(A.normalize(d))
            witness.append({"degree": n, "divisor": s})
            if mode == "exact":
                ok = False
            else:
                if A.is_zero(d) or not isinstance(A, TowerRing):
                    ok = False
                elif not unit_in_truncation(Elem(A, d), junk[0], junk[1]):
                    ok = False
    return QuasiIsoVerdict(ok, mode if mode == "exact" else "up_to_junk(%d,%d)" % tuple(junk), witness)


def quasi_iso(phi, mode="exact", junk=None):
    """Is phi a quasi-isomorphism?  Decided by acyclicity of its cone.

    mode 'junk' accepts cone cohomology whose annihilators are units in the
    (p, q_k - 1)-adic truncation with exponents junk = (n, M).
    """
    if mode not in ("exact", "junk"):
        raise ValueError("mode must be 'exact' or 'junk'")
    if mode == "junk" and junk is None:
        raise ValueError("junk mode needs truncation exponents (n, M)")
    if isinstance(phi, PresentedMap):
        P = presented_cone(phi)
    else:
        P = presented_cone(as_presented_map(phi))
    return acyclicity_verdict(P, mode, junk)


# --- weight-graded complexes -----------------------------------------------------

class WeightGradedComplex:
    """Block family: weight (tuple of Fractions) -> CochainComplex."""

    def __init__(self, ring, blocks, band=None):
        self.ring = ring
        self.blocks = dict(blocks)
        self.band = band

    def weights(self):
        return sorted(self.blocks)

    def block(self, w):
        if w not in self.blocks:
            raise ComplexError("weight %s outside the band" % (fmt_weight(w),))
        return self.blocks[w]

    def __iter__(self):
        for w in self.weights():
            yield w, self.blocks[w]

    def total(self):
        """The direct sum of all blocks as one complex (block diagonal)."""
        ws = self.weights()
        if not ws:
            return zero_complex(self.ring)
        blocks = {w: self.block(w) for w in ws}
        lo = min(blocks[w].lo for w in ws)
        hi = max(blocks[w].hi for w in ws)
        ranks = [sum(blocks[w].rank(n) for w in ws) for n in range(lo, hi + 1)]
        diffs = []
        R = self.ring
        for n in range(lo, hi):
            M = Matrix(R, ranks[n + 1 - lo], ranks[n - lo])
            r0 = c0 = 0
            for w in ws:
                B = blocks[w]
                D = B.d(n)
                for i in range(D.rows):
                    for j in range(D.cols):
                        M.a[r0 + i][c0 + j] = D.a[i][j]
                r0 += B.rank(n + 1)
                c0 += B.rank(n)
            diffs.append(M)
        return CochainComplex(R, lo, ranks, diffs, weights=ws, check=False)


def fmt_weight(w):
    return "(" + ",".join(str(x) for x in w) + ")"


# --- JSON ---------------------------------------------------------------------------

def complex_json(C):
    out = {"ring": C.ring.descriptor(), "degrees": [C.lo, C.hi], "ranks": C.ranks,
           "differentials": [matrix_json(M) for M in C.diffs]}
    if C.weights is not None:
        out["weights"] = [[str(x) for x in w] for w in C.weights]
    return out


def complex_from_json(d):
    if not isinstance(d, dict) or "ring" not in d or "ranks" not in d:
        raise ValueError("complex JSON needs 'ring' and 'ranks'")
    R = ring_from_json(d["ring"])
    ranks = [int(r) for r in d["ranks"]]
    lo = int(d.get("degrees", [0])[0])
    if "degrees" in d and int(d["degrees"][1]) != lo + len(ranks) - 1:
        raise ValueError("degree range does not match ranks")
    diffs = [matrix_from_json(m, R) for m in d.get("differentials", [])]
    return CochainComplex(R, lo, ranks, diffs)
