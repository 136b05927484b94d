"""Truncated p-typical Witt vectors and the theta-side dictionary.

Arithmetic lifts components to a p-torsion-free ring (ZZ, ZZ[t], ZZ[q_k]),
solves the ghost recursion there exactly and reduces back.  Because the Witt
structure polynomials have integer coefficients this agrees with evaluating
them over the original ring, including rings where p is a zero divisor.
The universal polynomials themselves are generated (with an integrality
check) for small (p, r) by :class:`WittStructurePolys`, which the tests use
as an independent second route.
"""

from __future__ import annotations

import random
import threading

import flint

from .rings import (INTEGERS, DistinguishedElements, Elem, Integers, IntegersMod,
                    PolynomialOver, QuotientRing, Rationals, RingError, TowerRing,
                    embed, frobenius, tower)


class IntegralityError(ArithmeticError):
    pass


# --- lifting to a p-torsion-free ring ------------------------------------------

def _lift_context(R, p=None, r=None):
    """(L, lift, reduce) with reduce: L -> R a ring map and L suitable for the
    ghost recursion.

    L is p-torsion-free (ZZ, ZZ[t], ZZ[q_k]) in general.  When p^n = 0 in R
    and the length r is known, L is ZZ/p^(n+r-1) (or a polynomial ring over
    it): the component x_i is then determined modulo p^(n+r-1-i) >= p^n,
    which is all R can see, and coefficients stay small.
    """
    if isinstance(R, (Integers, Rationals)):
        ident = lambda x: x
        return R, ident, ident
    if isinstance(R, IntegersMod):
        m = R.m
        P = _precision_modulus(R, p, r)
        if P is not None:
            return IntegersMod(P), int, lambda x: x % m
        return INTEGERS, int, lambda x: x % m
    if isinstance(R, PolynomialOver):
        if isinstance(R.base, (Integers, Rationals)):
            ident = lambda x: x
            return R, ident, ident
        P = _precision_modulus(R.base, p, r)
        L = PolynomialOver(INTEGERS if P is None else IntegersMod(P), R.var)
        return (L, lambda x: L.kit.make(R.kit.coeffs(x)),
                lambda y: R.kit.make(L.kit.coeffs(y)))
    if isinstance(R, TowerRing):
        if isinstance(R.base, Integers):
            ident = lambda x: x
            return R, ident, ident
        L = TowerRing(INTEGERS, R.p, R.k)
        return (L, lambda x: (x[0], L.kit.make(R.kit.coeffs(x[1]))),
                lambda y: R._norm(y[0], R.kit.make(L.kit.coeffs(y[1]))))
    if isinstance(R, QuotientRing):
        L, lb, rb = _lift_context(R.base)
        return L, lambda x: lb(R.lift(x)), lambda y: R.reduce(rb(y))
    raise RingError("no lift known for %s" % R.name())


def _precision_modulus(C, p, r):
    # C = ZZ/p^n (n >= 1) -> p^(n+r-1); None when that does not apply
    if p is None or r is None or not isinstance(C, IntegersMod) or C.local is None:
        return None
    q, n = C.local
    if q != p:
        return None
    return p ** (n + r - 1)


def _div_pow(L, v, n):
    """v / n in L, asserting exactness (n a positive integer)."""
    if n == 1:
        return v
    if isinstance(L, IntegersMod):
        if v % n:
            raise IntegralityError("inexact division by %d" % n)
        return v // n
    if isinstance(L, Integers):
        q, r = divmod(v, n)
        if r:
            raise IntegralityError("inexact division by %d" % n)
        return q
    if isinstance(L, Rationals):
        return v / n
    if isinstance(L, TowerRing):
        return (v[0], _div_poly(L, v[1], n))
    return _div_poly(L, v, n)


def _div_poly(L, P, n):
    cs = L.kit.coeffs(P)
    out = []
    for c in cs:
        q, r = divmod(int(c), n)
        if r:
            raise IntegralityError("inexact division by %d" % n)
        out.append(q)
    return L.kit.make(out)


def ghost_raw(L, p, xs):
    """Ghost components sum_{j<=i} p^j x_j^(p^(i-j)) over L."""
    out = []
    # powers[j] holds x_j^(p^(i-j)) for the current i
    powers = list(xs)
    for i in range(len(xs)):
        s = L.zero
        for j in range(i + 1):
            s = L.add(s, L.mul(L.from_int(p ** j), powers[j]))
        out.append(s)
        powers = [L.pow(x, p) if j <= i else x for j, x in enumerate(powers)]
    return out


def solve_ghost(L, p, gs):
    """Witt components with the given ghost components (exact over L)."""
    xs = []
    for i, g in enumerate(gs):
        s = g
        for j, x in enumerate(xs):
            s = L.sub(s, L.mul(L.from_int(p ** j), L.pow(x, p ** (i - j))))
        xs.append(_div_pow(L, s, p ** i))
    return xs


class WittVector:
    """(x_0, ..., x_{r-1}) in W_r(R), p-typical."""

    __slots__ = ("ring", "p", "comps")

    def __init__(self, ring, p, comps):
        self.ring = ring
        self.p = p
        self.comps = tuple(ring.coerce(c) if isinstance(c, (Elem, int)) else c for c in comps)
        if not self.comps:
            raise ValueError("Witt vectors need length >= 1")

    @property
    def length(self):
        return len(self.comps)

    def components(self):
        return [Elem(self.ring, c) for c in self.comps]

    def _same(self, other):
        if not isinstance(other, WittVector) or other.p != self.p or other.ring != self.ring:
            raise RingError("Witt vectors over different rings or primes")
        if other.length != self.length:
            raise RingError("Witt vectors of different lengths")

    def __eq__(self, other):
        if not isinstance(other, WittVector):
            return False
        return (self.p == other.p and self.length == other.length and self.ring == other.ring
                and all(self.ring.eq(a, b) for a, b in zip(self.comps, other.comps)))

    def __hash__(self):
        return hash((self.p, self.length))

    def __add__(self, other):
        return witt_add(self, other)

    def __mul__(self, other):
        if isinstance(other, int):
            return witt_mul(self, from_integer(self.ring, self.p, self.length, other))
        return witt_mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return witt_neg(self)

    def __sub__(self, other):
        return witt_add(self, witt_neg(other))

    def __repr__(self):
        return "W%d(%s)[%s]" % (self.length, self.ring.name(), ", ".join(self.ring.to_str(c) for c in self.comps))

    def to_json(self):
        from .rings import raw_json
        return {"p": str(self.p), "ring": self.ring.descriptor(),
                "components": [raw_json(self.ring, c) for c in self.comps]}


def witt_from_json(d, ring=None):
    from .rings import raw_from_json, ring_from_json
    R = ring if ring is not None else ring_from_json(d["ring"])
    p = int(d["p"])
    comps = [raw_from_json(R, c) if isinstance(c, dict) else R.from_coeffs(0, [c]) for c in d["components"]]
    return WittVector(R, p, comps)


def _via_ghost(vectors, combine, out_len=None):
    R, p = vectors[0].ring, vectors[0].p
    L, lift, red = _lift_context(R, p, vectors[0].length)
    ghosts = [ghost_raw(L, p, [lift(c) for c in v.comps]) for v in vectors]
    gs = combine(L, ghosts)
    if out_len is not None:
        gs = gs[:out_len]
    xs = solve_ghost(L, p, gs)
    return WittVector(R, p, [red(x) for x in xs])


def ghost(w):
    """Ghost components, computed in the lift and reduced to the ring."""
    R = w.ring
    L, lift, red = _lift_context(R, w.p, w.length)
    return [Elem(R, red(g)) for g in ghost_raw(L, w.p, [lift(c) for c in w.comps])]


def witt_add(a, b):
    a._same(b)
    return _via_ghost([a, b], lambda L, g: [L.add(x, y) for x, y in zip(*g)])


def witt_mul(a, b):
    a._same(b)
    return _via_ghost([a, b], lambda L, g: [L.mul(x, y) for x, y in zip(*g)])


def witt_neg(a):
    return _via_ghost([a], lambda L, g: [L.neg(x) for x in g[0]])


def from_integer(R, p, r, n):
    """The image of the integer n in W_r(R)."""
    L, lift, red = _lift_context(R, p, r)
    xs = solve_ghost(L, p, [L.from_int(n)] * r)
    return WittVector(R, p, [red(x) for x in xs])


def zero(R, p, r):
    return WittVector(R, p, [R.zero] * r)


def one(R, p, r):
    return WittVector(R, p, [R.one] + [R.zero] * (r - 1))


def teichmuller(x, p, r):
    R = x.ring
    return WittVector(R, p, [x.v] + [R.zero] * (r - 1))


def frobenius_W(w):
    """F : W_r -> W_{r-1}, ghost_i(F w) = ghost_{i+1}(w)."""
    if w.length < 2:
        raise ValueError("F needs length >= 2")
    return _via_ghost([w], lambda L, g: g[0][1:])


def verschiebung(w):
    """V : W_{r-1} -> W_r, prepends a zero component."""
    return WittVector(w.ring, w.p, [w.ring.zero] + list(w.comps))


def restriction(w):
    """R : W_r -> W_{r-1}, drops the last component."""
    if w.length < 2:
        raise ValueError("R needs length >= 2")
    return WittVector(w.ring, w.p, w.comps[:-1])


def random_witt(R, p, r, rng, size=None):
    return WittVector(R, p, [random_element(R, rng, size) for _ in range(r)])


def random_element(R, rng, size=None):
    if isinstance(R, Integers):
        b = size or 50
        return rng.randint(-b, b)
    if isinstance(R, IntegersMod):
        return rng.randrange(R.m)
    if isinstance(R, PolynomialOver):
        deg = size or 3
        c = R.base
        if isinstance(c, IntegersMod):
            cs = [rng.randrange(c.m) for _ in range(deg + 1)]
        else:
            cs = [rng.randint(-5, 5) for _ in range(deg + 1)]
        return R.kit.make(cs)
    if isinstance(R, TowerRing):
        deg = size or 3
        if isinstance(R.base, Integers):
            cs = [rng.randint(-5, 5) for _ in range(deg + 1)]
        else:
            cs = [rng.randrange(R.p) for _ in range(deg + 1)]
        return R._norm(rng.randint(-2, 2), R.kit.make(cs))
    if isinstance(R, QuotientRing):
        return R.reduce(random_element(R.base, rng, size))
    raise RingError("no random elements for %s" % R.name())


# --- universal structure polynomials ----------------------------------------------

_STRUCT_CACHE = {}
_STRUCT_LOCK = threading.Lock()

# the sum/product polynomials grow very fast; beyond these lengths the
# generation time and memory are out of desk scale
STRUCTURE_LIMITS = {2: 5, 3: 4, 5: 4}


class WittStructurePolys:
    """Universal integral polynomials S_i (sum), P_i (product), F_i over ZZ
    in variables x_0..x_{r-1}, y_0..y_{r-1}."""

    def __init__(self, p, r):
        self.p, self.r = p, r
        names = tuple("x%d" % i for i in range(r)) + tuple("y%d" % i for i in range(r))
        self.ctx = flint.fmpz_mpoly_ctx.get(names, "lex")
        gens = self.ctx.gens()
        self.x, self.y = list(gens[:r]), list(gens[r:])
        self.sum = self._solve(lambda gx, gy: [a + b for a, b in zip(gx, gy)], r)
        self.prod = self._solve(lambda gx, gy: [a * b for a, b in zip(gx, gy)], r)
        self.frob = self._solve(lambda gx, gy: gx[1:], r - 1) if r >= 2 else []

    def _ghost(self, v):
        p = self.p
        out = []
        for i in range(len(v)):
            s = self.ctx.from_dict({})
            for j in range(i + 1):
                s = s + (p ** j) * v[j] ** (p ** (i - j))
            out.append(s)
        return out

    def _solve(self, combine, n):
        p = self.p
        gs = combine(self._ghost(self.x), self._ghost(self.y))[:n]
        out = []
        for i, g in enumerate(gs):
            s = g
            for j, z in enumerate(out):
                s = s - (p ** j) * z ** (p ** (i - j))
            d = {}
            for mono, c in s.to_dict().items():
                c = int(c)
                if c % (p ** i):
                    raise IntegralityError("structure polynomial %d not integral (p=%d)" % (i, p))
                d[mono] = c // p ** i
            out.append(self.ctx.from_dict(d))
        return out

    def _eval(self, P, R, vals):
        # vals: raw values for x_0..x_{r-1}, y_0..y_{r-1}
        cache = {}
        total = R.zero
        for mono, c in P.to_dict().items():
            t = R.from_int(int(c))
            for v, e in enumerate(mono):
                if e:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = R.pow(vals[v], e)
                    t = R.mul(t, cache[key])
            total = R.add(total, t)
        return total

    def add(self, a, b):
        R = a.ring
        vals = list(a.comps) + list(b.comps)
        return WittVector(R, self.p, [self._eval(P, R, vals) for P in self.sum])

    def mul(self, a, b):
        R = a.ring
        vals = list(a.comps) + list(b.comps)
        return WittVector(R, self.p, [self._eval(P, R, vals) for P in self.prod])

    def F(self, a):
        R = a.ring
        vals = list(a.comps) + [R.zero] * self.r
        return WittVector(R, self.p, [self._eval(P, R, vals) for P in self.frob])


def structure_polys(p, r):
    """Cached universal polynomials (thread safe, built once per (p, r))."""
    if r > STRUCTURE_LIMITS.get(p, 1):
        raise ValueError("structure polynomials for p=%d, r=%d are beyond desk scale" % (p, r))
    key = (p, r)
    with _STRUCT_LOCK:
        S = _STRUCT_CACHE.get(key)
        if S is None:
            S = WittStructurePolys(p, r)
            _STRUCT_CACHE[key] = S
    return S


# --- identity engine ------------------------------------------------------------

def witt_identities(R, p, r, cases, seed=0):
    """Check ghost homomorphism, FV = p, V(F(x)y) = xV(y), F[x] = [x^p],
    RF = FR, RV = VR on random inputs.  Returns {name: (passed, failures)}."""
    rng = random.Random(seed)
    names = ["ghost_add", "ghost_mul", "FV_p", "V_projection", "F_teich", "RF_FR", "RV_VR"]
    res = {n: [0, []] for n in names}

    def record(name, ok, data):
        if ok:
            res[name][0] += 1
        elif len(res[name][1]) < 3:
            res[name][1].append(data)

    for _ in range(cases):
        a = random_witt(R, p, r, rng)
        b = random_witt(R, p, r, rng)
        ga, gb = ghost(a), ghost(b)
        record("ghost_add", ghost(a + b) == [x + y for x, y in zip(ga, gb)], (a, b))
        record("ghost_mul", ghost(a * b) == [x * y for x, y in zip(ga, gb)], (a, b))
        if r >= 2:
            x = WittVector(R, p, a.comps[:r - 1])
            record("FV_p", frobenius_W(verschiebung(x)) == x * p, (x,))
            y = WittVector(R, p, b.comps[:r - 1])
            record("V_projection", verschiebung(frobenius_W(a) * y) == a * verschiebung(y), (a, y))
            t = Elem(R, a.comps[0])
            record("F_teich", frobenius_W(teichmuller(t, p, r)) == teichmuller(t ** p, p, r - 1), (t,))
        if r >= 3:
            record("RF_FR", restriction(frobenius_W(a)) == frobenius_W(restriction(a)), (a,))
        if r >= 2:
            z = WittVector(R, p, b.comps[:r - 1])
            lhs = restriction(verschiebung(z))
            rhs = verschiebung(restriction(z)) if r >= 3 else WittVector(R, p, [R.zero])
            record("RV_VR", lhs == rhs, (z,))
    return {n: (v[0], v[1]) for n, v in res.items()}


# --- theta-side model -----------------------------------------------------------------

class ThetaModel:
    """A/(xi_r) with R = projection, F = phi, V = xi * phi^{-1}.

    Elements are tower elements (any level >= k); F keeps the level and V
    raises it by one.  ``red(x, s)`` is the canonical representative of x
    modulo xi_s.
    """

    def __init__(self, p, k, r, base="F"):
        if not (k >= r >= 1):
            raise RingError("theta model needs k >= r >= 1")
        self.p, self.k, self.r = p, k, r
        self.A = tower(base, p, k)
        self._dist = {}
        # xi_{s-1} | xi_s and xi * phi^{-1}(xi_{s-1}) = xi_s (at level k+1)
        for s in range(1, r + 1):
            a, b = self.xi(s, k), self.xi(s - 1, k)
            if a.divide_exact(b) is None:
                raise AssertionError("xi_%d does not divide xi_%d" % (s - 1, s))
            if self.xi(1, k + 1) * frobenius(self.xi(s - 1, k), -1) != self.xi(s, k + 1):
                raise AssertionError("xi * phi^-1(xi_%d) != xi_%d" % (s - 1, s))
            # phi(xi_s) = xi_{s-1} * phi(xi)
            if frobenius(self.xi(s, k)).divide_exact(self.xi(s - 1, k)) is None:
                raise AssertionError("phi(xi_%d) not divisible by xi_%d" % (s, s - 1))

    def ring(self, level):
        return self.A.at_level(level)

    def dist(self, level):
        D = self._dist.get(level)
        if D is None:
            D = self._dist[level] = DistinguishedElements(self.ring(level))
        return D

    def xi(self, s, level=None):
        return self.dist(self.k if level is None else level).xi_r(s)

    def quotient(self, s, level):
        return QuotientRing(self.ring(level), self.xi(s, level).v)

    def red(self, x, s):
        if s == 0:
            return Elem(x.ring, x.ring.zero)
        Q = self.quotient(s, x.ring.k)
        return Elem(x.ring, Q.lift(Q.reduce(x.v)))

    def eq(self, x, y, s):
        """x == y in A/(xi_s)."""
        level = max(x.ring.k, y.ring.k)
        d = embed(x, level) - embed(y, level)
        return d.divide_exact(self.xi(s, level)) is not None

    def R_bar(self, x, s):
        return self.red(x, s - 1)

    def F_bar(self, x, s):
        return self.red(frobenius(x), s - 1)

    def V_bar(self, x, s):
        """A/(xi_{s-1}) -> A/(xi_s) (one level up)."""
        y = frobenius(x, -1)
        return self.red(self.xi(1, y.ring.k) * y, s)

    def random(self, rng, level=None):
        R = self.ring(self.k if level is None else level)
        deg = self.xi(self.r, R.k).v[1].degree()
        cs = [rng.randrange(self.p) if isinstance(R.base, IntegersMod) else rng.randint(-3, 3)
              for _ in range(max(deg, 1))]
        return Elem(R, R.from_poly(cs))

    def check(self, cases=20, seed=0):
        """FV = p, VF = xi, V(F(x)y) = xV(y), RF = FR, RV = VR on random inputs."""
        rng = random.Random(seed)
        r = self.r
        out = {}

        def rec(name, ok):
            out[name] = out.get(name, True) and ok

        for _ in range(cases):
            for s in range(1, r + 1):
                x = self.random(rng)
                y = self.random(rng)
                if s >= 2:
                    rec("FV_p", self.eq(self.F_bar(self.V_bar(x, s), s), x * self.p, s - 1))
                    rec("V_projection", self.eq(self.V_bar(self.F_bar(x, s) * y, s), x * self.V_bar(y, s), s))
                rec("VF_xi", self.eq(self.V_bar(self.F_bar(x, s), s), x * self.xi(1), s))
                if s >= 3:
                    rec("RF_FR", self.eq(self.R_bar(self.F_bar(x, s), s - 1), self.F_bar(self.R_bar(x, s), s - 1), s - 2))
                if s >= 2:
                    rec("RV_VR", self.eq(self.R_bar(self.V_bar(x, s), s), self.V_bar(self.R_bar(x, s - 1), s - 1), s - 1))
                rec("xi_r_zero", self.eq(self.xi(s), Elem(self.A, self.A.zero), s))
        return out


def theta_model(k, r, p=2, base="F"):
    return ThetaModel(p, k, r, base)
