"""q-de Rham complexes of Laurent tori and the finite-level Koszul model.

Both objects are weight graded: every differential preserves the exponent
w of the monomial U^w, so each is a family of small Koszul complexes, one
per weight.  Degree-n basis vectors of a block are labelled by subsets S of
{0..d-1} with |S| = n (the wedge of dlog U_i, i in S), ordered as in the
iterated tensor product of one-variable complexes.

The Koszul model at level k carries the product
    (a U^w e_S)(b U^w' e_T) = a b q^(sum_{i in S} w'_i) sign(S, T) U^(w+w') e_(S u T)
The q-power twist is the usual cup-product twist of group cochains; without
it the Leibniz rule fails.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .complexes import (ChainMap, CochainComplex, ComplexError, WeightGradedComplex,
                        cohomology, cohomology_groups, fmt_weight, presented,
                        quasi_iso, tensor_product, two_term)
from .decalage import eta, eta_nat
from .linalg import Matrix, Subquotient
from .rings import (Elem, Integers, PrimeField, RingError, TowerRing, q_int,
                    tower, unit_in_truncation)
from .workers import ordered_map


class BandError(ComplexError):
    pass


# --- Koszul blocks ---------------------------------------------------------------

_LABELS = {}


def koszul_labels(d):
    """labels[n] = list of sorted tuples S, |S| = n, in tensor-product order."""
    if d in _LABELS:
        return _LABELS[d]
    labels = {0: [()]}
    for m in range(d):
        new = {}
        for n in range(m + 2):
            out = [S for S in labels.get(n, [])]
            out += [S + (m,) for S in labels.get(n - 1, [])]
            new[n] = out
        labels = new
    _LABELS[d] = labels
    return labels


def _sign_insert(S, i):
    return -1 if sum(1 for j in S if j < i) % 2 else 1


def koszul_complex(R, scalars):
    """Koszul complex of raw scalars (c_0..c_{d-1}): d e_S = sum_i c_i e_i ^ e_S."""
    d = len(scalars)
    labels = koszul_labels(d)
    index = {n: {S: j for j, S in enumerate(labels[n])} for n in range(d + 1)}
    ranks = [len(labels[n]) for n in range(d + 1)]
    diffs = []
    for n in range(d):
        M = Matrix(R, ranks[n + 1], ranks[n])
        for j, S in enumerate(labels[n]):
            for i in range(d):
                if i in S or R.is_zero(scalars[i]):
                    continue
                T = tuple(sorted(S + (i,)))
                c = scalars[i]
                M.a[index[n + 1][T]][j] = c if _sign_insert(S, i) > 0 else R.neg(c)
        diffs.append(M)
    return CochainComplex(R, 0, ranks, diffs, check=False)


def wedge_sign(S, T):
    """Sign of the permutation sorting S ++ T, or 0 if they overlap."""
    if set(S) & set(T):
        return 0
    seq = list(S) + list(T)
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return -1 if inv % 2 else 1


class _LazyGraded(WeightGradedComplex):
    """Weight-graded complex whose blocks are built on first access."""

    def __init__(self, ring, weights, builder, band=None):
        WeightGradedComplex.__init__(self, ring, {}, band)
        self._weights = sorted(weights)
        self._wset = set(self._weights)
        self._builder = builder

    def weights(self):
        return list(self._weights)

    def in_band(self, w):
        return w in self._wset

    def block(self, w):
        if w not in self._wset:
            raise BandError("weight %s outside the band" % fmt_weight(w))
        b = self.blocks.get(w)
        if b is None:
            b = self._builder(w)
            self.blocks[w] = b
        return b

    def __iter__(self):
        for w in self._weights:
            yield w, self.block(w)


# --- q-de Rham complex -------------------------------------------------------------

class QdRComplex(_LazyGraded):
    """q-Omega of Z[U_1^{+-1}..U_d^{+-1}] truncated to the weight band |w_i| <= B.

    Block w: Koszul complex on ([w_1]_q, ..., [w_d]_q) on the basis U^w dlog U_S.
    """

    kind = "qdr"

    def __init__(self, d, B, ring):
        if d < 1 or B < 1:
            raise ValueError("need d >= 1 and B >= 1")
        if not isinstance(ring, TowerRing):
            raise RingError("q-de Rham complexes live over a tower ring")
        self.d, self.B = d, B
        self.p = ring.p
        ws = [tuple(Fraction(x) for x in t) for t in itertools.product(range(-B, B + 1), repeat=d)]
        _LazyGraded.__init__(self, ring, ws, self._build, band=B)

    def scalar(self, j):
        return q_int(int(j), self.ring).v

    def _build(self, w):
        return koszul_complex(self.ring, [self.scalar(x) for x in w])

    def frobenius_multiplier(self, n):
        """phi(U^w dlog U_S) = [p]_q^|S| U^{pw} dlog U_S."""
        R = self.ring
        return R.pow(q_int(self.p, R).v, n)


def qdr_build(d, B, ring):
    return QdRComplex(d, B, ring)


def qdr_tensor_check(C):
    """Every block of C equals the tensor product of one-variable blocks."""
    R = C.ring
    bad = []
    for w in C.weights():
        T = two_term(R, C.scalar(w[0]))
        for x in w[1:]:
            T = tensor_product(T, two_term(R, C.scalar(x)))
        blk = C.block(w)
        if T.ranks != blk.ranks or any(not (a == b) for a, b in zip(T.diffs, blk.diffs)):
            bad.append(fmt_weight(w))
    return bad


# --- Koszul model of the torus ----------------------------------------------------

class TorusKoszul(_LazyGraded):
    """Koszul model of Z_p^d acting on the p^k-root Laurent algebra.

    Weights w in (p^-k Z)^d with |w_i| <= B; block w is the Koszul complex on
    (q^{w_1} - 1, ..., q^{w_d} - 1), q^{w_i} = q_k^{p^k w_i}.
    """

    kind = "koszul"

    def __init__(self, d, k, B, p, mode="F"):
        if mode not in ("F", "Z"):
            raise ValueError("mode must be 'F' (GF(p)[q_k]) or 'Z' (ZZ[q_k])")
        if mode == "Z" and d != 1:
            raise ValueError("exact ZZ[q_k] mode is only supported for d = 1")
        if d < 1 or B < 1 or k < 0:
            raise ValueError("need d >= 1, B >= 1, k >= 0")
        self.d, self.k, self.B, self.p, self.mode = d, k, B, p, mode
        R = tower(mode, p, k)
        self.scale = p ** k
        N = B * self.scale
        ws = [tuple(Fraction(x, self.scale) for x in t)
              for t in itertools.product(range(-N, N + 1), repeat=d)]
        _LazyGraded.__init__(self, R, ws, self._build, band=B)

    def numerators(self, w):
        out = []
        for x in w:
            n = x * self.scale
            if n.denominator != 1:
                raise BandError("weight %s is not in (p^-%d Z)^d" % (fmt_weight(w), self.k))
            out.append(int(n))
        return out

    def scalar(self, x):
        R = self.ring
        n = int(x * self.scale)
        return R.sub(R.mono(n), R.one)

    def _build(self, w):
        self.numerators(w)
        return koszul_complex(self.ring, [self.scalar(x) for x in w])

    def twist(self, S, w2):
        """q^(sum_{i in S} w2_i) as a raw unit."""
        n = sum(int(w2[i] * self.scale) for i in S)
        return self.ring.mono(n)

    def frobenius_multiplier(self, n):
        return self.ring.one

    # elements of the dga: dicts (w, S) -> raw coefficient
    def element(self, w, n, vec):
        labels = koszul_labels(self.d)[n]
        return {(w, S): c for S, c in zip(labels, vec) if not self.ring.is_zero(c)}

    def vector(self, elem, w, n):
        R = self.ring
        labels = koszul_labels(self.d)[n]
        out = []
        for S in labels:
            out.append(elem.get((w, S), R.zero))
        extra = [key for key in elem if key[0] != w or len(key[1]) != n]
        if any(not R.is_zero(elem[key]) for key in extra):
            raise ValueError("element is not homogeneous of weight %s, degree %d" % (fmt_weight(w), n))
        return out

    def multiply(self, x, y):
        R = self.ring
        out = {}
        for (w1, S), a in x.items():
            for (w2, T), b in y.items():
                s = wedge_sign(S, T)
                if s == 0:
                    continue
                w = tuple(u + v for u, v in zip(w1, w2))
                if not self.in_band(w):
                    raise BandError("product weight %s overflows the band" % fmt_weight(w))
                c = R.mul(R.mul(a, b), self.twist(S, w2))
                if s < 0:
                    c = R.neg(c)
                key = (w, tuple(sorted(S + T)))
                out[key] = R.add(out.get(key, R.zero), c)
        return {k_: v for k_, v in out.items() if not R.is_zero(v)}

    def differential(self, x):
        R = self.ring
        out = {}
        for (w, S), a in x.items():
            for i in range(self.d):
                if i in S:
                    continue
                c = R.mul(a, self.scalar(w[i]))
                if _sign_insert(S, i) < 0:
                    c = R.neg(c)
                key = (w, tuple(sorted(S + (i,))))
                out[key] = R.add(out.get(key, R.zero), c)
        return {k_: v for k_, v in out.items() if not R.is_zero(v)}


def koszul_build(d, k, B, p, mode="F"):
    return TorusKoszul(d, k, B, p, mode)


def _is_integral(w):
    return all(x.denominator == 1 for x in w)


def _junk_ok(R, h, junk):
    return not R.is_zero(h) and unit_in_truncation(Elem(R, h), junk[0], junk[1])


# --- comparison L eta_mu K  ~  q-Omega --------------------------------------------

def _compare_block(K, Q, w, junk):
    R = K.ring
    mu = R.sub(R.mono(K.scale), R.one)
    blk = K.block(w)
    E = eta(blk, mu)
    item = {"weight": fmt_weight(w)}
    if _is_integral(w):
        T = Q.block(w)
        comps = {}
        for n in blk.degrees():
            mn = R.pow(mu, n)
            comps[n] = E.basis(n).map(lambda x, mn=mn: _div(R, x, mn), R)
        psi = ChainMap(E.complex, T, comps, check=False)
        bad = psi.check()
        if bad is not None:
            item.update(kind="integral", ok=False, error="comparison is not a chain map in degree %d" % bad)
            return item
        v = quasi_iso(psi, "exact")
        item.update(kind="integral", ok=v.ok, cone=v.witness)
        return item
    rep = cohomology(E.complex)
    divs, ok = [], True
    for n in rep.degrees:
        H = rep.group(n)
        if H is None:
            continue
        for h in H.divisors:
            good = _junk_ok(R, h, junk)
            ok = ok and good
            divs.append({"degree": n, "divisor": R.to_str(R.normalize(h)) if not R.is_zero(h) else "0",
                         "junk_unit": good})
    item.update(kind="fractional", ok=ok, divisors=divs)
    return item


def _div(R, x, m):
    y = R.divide_exact(x, m)
    if y is None:
        raise AssertionError("L eta_mu basis vector not divisible by mu^n")
    return y


def compare_eta_qdr(K, junk=(1, 1), weights=None):
    """Certify L eta_mu(K) ~ q-Omega on integral weights, junk elsewhere.

    Returns (verdict, per-weight items in sorted weight order).
    """
    if not isinstance(K, TorusKoszul):
        raise ValueError("compare needs a TorusKoszul model")
    Q = qdr_build(K.d, K.B, K.ring)
    ws = K.weights() if weights is None else sorted(weights)
    for w in ws:
        if not K.in_band(w):
            raise BandError("weight %s outside the band" % fmt_weight(w))
    items = ordered_map(lambda w: _compare_block(K, Q, w, junk), ws)
    return all(it["ok"] for it in items), items


# --- Frobenius ------------------------------------------------------------------------

class FrobeniusAction:
    """phi-semilinear map C_w -> C_{pw}: x |-> Phi_n phi(x) on degree n."""

    def __init__(self, C):
        self.C = C
        self.p = C.p
        self.ring = C.ring
        self.components = {}
        self.overflow = []
        for w in C.weights():
            pw = tuple(self.p * x for x in w)
            if not C.in_band(pw):
                self.overflow.append(w)
                continue
            blk = C.block(w)
            self.components[w] = {n: Matrix.diag(self.ring, [C.frobenius_multiplier(n)] * blk.rank(n))
                                  for n in blk.degrees()}

    def target(self, w):
        return tuple(self.p * x for x in w)

    def phi(self, x):
        return self.ring.frobenius_raw(x, 1)

    def apply(self, w, n, vec):
        if w not in self.components:
            raise BandError("phi(U^w) overflows the band at weight %s" % fmt_weight(w))
        return self.components[w][n].apply([self.phi(x) for x in vec])

    def check(self):
        """Weights where the semilinear chain-map square fails (should be empty)."""
        bad = []
        for w, comps in sorted(self.components.items()):
            S, T = self.C.block(w), self.C.block(self.target(w))
            for n in S.degrees():
                if n + 1 > S.hi:
                    continue
                lhs = T.d(n) @ comps[n]
                rhs = comps[n + 1] @ S.d(n).map(self.phi, self.ring)
                if not (lhs == rhs):
                    bad.append((fmt_weight(w), n))
        return bad

    def overflow_report(self):
        return [{"weight": fmt_weight(w), "target": fmt_weight(self.target(w))} for w in self.overflow]


def frobenius_action(C):
    return FrobeniusAction(C)


# --- Breuil-Kisin property ----------------------------------------------------------

def breuil_kisin_check(C, i, junk=(1, 1)):
    """Cokernel of the linearized phi on H^i of a d = 1 q-de Rham complex.

    For every target weight w' of the band, the image of A (x)_phi H^i(w'/p)
    (when w'/p is an integral weight) is divided out of H^i(w'); each
    cokernel divisor h must divide [p]_q^i times a junk unit.
    """
    if not isinstance(C, QdRComplex) or C.d != 1:
        raise ValueError("the Breuil-Kisin check runs on d = 1 q-de Rham complexes")
    if i not in (0, 1):
        raise ValueError("degree must be 0 or 1")
    if C.B < C.p:
        raise BandError("band too small: need B >= p (B=%d, p=%d)" % (C.B, C.p))
    R = C.ring
    Phi = FrobeniusAction(C)
    pq = R.pow(q_int(C.p, R).v, i)
    items, ok = [], True
    for wt in C.weights():
        blk = C.block(wt)
        groups = cohomology_groups(presented(blk))
        H = groups.get(i)
        if H is None:
            continue
        src = []
        if wt[0].numerator % C.p == 0:
            w = (wt[0] / C.p,)
            Hs = cohomology_groups(presented(C.block(w))).get(i)
            if Hs is not None:
                for g in Hs.gens.columns():
                    src.append(Phi.apply(w, i, g))
        den = [c for c in blk.d(i - 1).columns()] if i - 1 >= blk.lo else []
        Den = Matrix.from_columns(R, blk.rank(i), den + src) if den + src else None
        coker = Subquotient(H.Num, Den)
        divs = []
        for h in coker.divisors:
            if R.is_zero(h):
                good = False
                divs.append({"divisor": "0", "ok": False})
            else:
                g = R.gcd(h, pq)
                rest = R.divide_exact(h, g)
                good = _junk_ok(R, rest, junk)
                divs.append({"divisor": R.to_str(R.normalize(h)), "ok": good})
            ok = ok and good
        items.append({"weight": fmt_weight(wt), "from": fmt_weight((wt[0] / C.p,)) if src else None,
                      "cokernel": divs})
    return ok, items


# --- specializations ----------------------------------------------------------------

def classical_de_rham(d, B, base):
    """de Rham complex of base[U^{+-1}] in the band: d(U^w dlog U_S) = sum_i w_i dlog U_i ^ U^w dlog U_S."""
    out = {}
    labels = koszul_labels(d)
    for t in itertools.product(range(-B, B + 1), repeat=d):
        ranks = [len(labels[n]) for n in range(d + 1)]
        diffs = []
        for n in range(d):
            M = Matrix(base, ranks[n + 1], ranks[n])
            for j, S in enumerate(labels[n]):
                for i in range(d):
                    s = wedge_sign((i,), S)
                    if s == 0:
                        continue
                    T = tuple(sorted(S + (i,)))
                    M.a[labels[n + 1].index(T)][j] = base.from_int(s * t[i])
            diffs.append(M)
        out[tuple(Fraction(x) for x in t)] = CochainComplex(base, 0, ranks, diffs)
    return WeightGradedComplex(base, out, band=B)


def specialize(C, mode):
    if mode == "q_to_1":
        return _q_to_1(C)
    if mode == "invert_mu":
        return _invert_mu(C)
    raise ValueError("mode must be 'invert_mu' or 'q_to_1'")


def _q_to_1(C):
    if not isinstance(C, QdRComplex):
        raise ValueError("q -> 1 specialization runs on q-de Rham complexes")
    R = C.ring
    base = R.base
    ev = lambda x: R.evaluate(x, 1)
    at_one = {}
    for w in C.weights():
        at_one[w] = C.block(w).map_entries(ev, base)
    S = WeightGradedComplex(base, at_one, band=C.B)
    ref = classical_de_rham(C.d, C.B, base)
    bad = []
    for w in C.weights():
        a, b = S.block(w), ref.block(w)
        if a.ranks != b.ranks or any(not (x == y) for x, y in zip(a.diffs, b.diffs)):
            bad.append(fmt_weight(w))
    return {"mode": "q_to_1", "ok": not bad, "mismatches": bad, "complex": S}


def _invert_mu(C):
    R = C.ring
    mu = R.sub(R.mono(R.p ** R.k), R.one)

    def one(w):
        _, rep = eta_nat(C.block(w), mu)
        return {"weight": fmt_weight(w), "ok": rep["inverts_f"] and rep["bound"] <= 2 * C.d,
                "bound": rep["bound"], "divisors": rep["divisors"]}

    items = ordered_map(one, C.weights())
    return {"mode": "invert_mu", "ok": all(it["ok"] for it in items), "blocks": items}


def total_h1_divisors(C):
    """Elementary divisors of H^1 of the whole (block-diagonal) complex."""
    rep = cohomology(C.total())
    return rep
