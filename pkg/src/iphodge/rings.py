"""Exact coefficient rings.

Every ring works on *raw* values (ints, Fractions, flint polynomials, small
tuples) and exposes arithmetic as methods; :class:`Elem` wraps a raw value
together with its ring for the public API.  The tower ring ``TowerRing`` is
the finite-level model ``base[q_k^{+-1}]`` of A_inf with ``q = q_k^(p^k)``.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from math import gcd as igcd

import flint


class RingError(ValueError):
    """Descriptor mismatch or an operation the ring does not support."""


class NotDivisible(ArithmeticError):
    pass


def _is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _prime_power(m):
    """Return (p, n) if m = p^n with n >= 1, else None."""
    if m < 2:
        return None
    p = 2
    while p * p <= m and m % p:
        p += 1
    if m % p:
        p = m
    n, t = 0, m
    while t % p == 0:
        t //= p
        n += 1
    return (p, n) if t == 1 else None


# --- polynomial kits -------------------------------------------------------
# A kit knows how to build flint polynomials over one coefficient ring.

class _PolyKit:
    def __init__(self, coeff_ring):
        self.cr = coeff_ring
        if isinstance(coeff_ring, Integers):
            self.make = lambda cs: flint.fmpz_poly([int(c) for c in cs])
            self.conv = int
        elif isinstance(coeff_ring, Rationals):
            self.make = lambda cs: flint.fmpq_poly([flint.fmpq(Fraction(c).numerator, Fraction(c).denominator) for c in cs])
            self.conv = lambda c: Fraction(int(c.p), int(c.q))
        elif isinstance(coeff_ring, IntegersMod):
            m = coeff_ring.m
            self.make = lambda cs: flint.nmod_poly([int(c) % m for c in cs], m)
            self.conv = int
        else:
            raise RingError("unsupported polynomial coefficient ring %r" % (coeff_ring,))
        self.zero = self.make([])
        self.one = self.make([1])
        self.x = self.make([0, 1])

    def coeffs(self, P):
        return [self.conv(c) for c in P.coeffs()]

    def inflate(self, P, n):
        if n == 1:
            return P
        cs = self.coeffs(P)
        out = [0] * ((len(cs) - 1) * n + 1 if cs else 0)
        for i, c in enumerate(cs):
            out[i * n] = c
        return self.make(out)

    def low_order(self, P):
        # index of the lowest nonzero coefficient (P != 0)
        s = 0
        while P[s] == 0:
            s += 1
        return s


# --- base class -------------------------------------------------------------

class Ring:
    is_domain = False
    is_field = False
    is_euclidean = False
    has_gcd = False

    # subclasses define: zero, one, from_int, add, sub, neg, mul, is_zero,
    # eq, key, divide_exact, is_unit, to_str, descriptor

    def __call__(self, value):
        return Elem(self, self.coerce(value))

    def coerce(self, value):
        if isinstance(value, Elem):
            if value.ring == self:
                return value.v
            return self.embed_from(value)
        if isinstance(value, int):
            return self.from_int(value)
        raise RingError("cannot coerce %r into %s" % (value, self))

    def embed_from(self, e):
        raise RingError("descriptor mismatch: %s vs %s" % (e.ring, self))

    def elem(self, raw):
        return Elem(self, raw)

    def pow(self, a, n):
        if n < 0:
            return self.pow(self.inverse(a), -n)
        result, base = self.one, a
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def inverse(self, a):
        r = self.divide_exact(self.one, a)
        if r is None:
            raise NotDivisible("%s is not a unit" % self.to_str(a))
        return r

    def divides(self, a, b):
        """True iff a | b."""
        if self.is_zero(a):
            return self.is_zero(b)
        return self.divide_exact(b, a) is not None

    def associates(self, a, b):
        return self.divides(a, b) and self.divides(b, a)

    def canonical_unit(self, a):
        return self.one

    def normalize(self, a):
        return self.mul(a, self.canonical_unit(a))

    def norm(self, a):
        raise RingError("%s has no Euclidean norm" % self)

    def divmod(self, a, b):
        raise RingError("%s has no division with remainder" % self)

    def gcd(self, a, b):
        return self.xgcd(a, b)[0]

    def xgcd(self, a, b):
        raise RingError("gcd unsupported over %s" % self)

    def lift_base(self):
        """(A, m) with self = A/(m); m is None for rings that are not quotients."""
        return self, None

    def characteristic_prime(self):
        return None

    def _dkey(self):
        k = self.__dict__.get("_dk")
        if k is None:
            k = self.__dict__["_dk"] = repr(self.descriptor())
        return k

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Ring) and type(self) is type(other) and self._dkey() == other._dkey()

    def __hash__(self):
        return hash(self._dkey())

    def __repr__(self):
        return self.name()

    def name(self):
        return str(self.descriptor())

    # JSON helpers: (unit_exp, coefficient list) <-> raw
    def to_coeffs(self, a):
        return 0, [a]

    def from_coeffs(self, e, cs):
        if e != 0 or len(cs) > 1:
            raise RingError("malformed element for %s" % self)
        return self.from_int(0) if not cs else self.parse_scalar(cs[0])

    def parse_scalar(self, s):
        return self.from_int(int(s))


class Integers(Ring):
    is_domain = True
    is_euclidean = True
    has_gcd = True
    zero, one = 0, 1

    def descriptor(self):
        return {"kind": "Integers"}

    def name(self):
        return "ZZ"

    def from_int(self, n):
        return int(n)

    add = staticmethod(lambda a, b: a + b)
    sub = staticmethod(lambda a, b: a - b)
    mul = staticmethod(lambda a, b: a * b)
    neg = staticmethod(lambda a: -a)
    is_zero = staticmethod(lambda a: a == 0)
    eq = staticmethod(lambda a, b: a == b)
    key = staticmethod(lambda a: a)

    def divide_exact(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero")
        q, r = divmod(a, b)
        return q if r == 0 else None

    def is_unit(self, a):
        return a in (1, -1)

    def canonical_unit(self, a):
        return -1 if a < 0 else 1

    def norm(self, a):
        return abs(a)

    def divmod(self, a, b):
        return divmod(a, b)

    def xgcd(self, a, b):
        x0, x1, y0, y1 = 1, 0, 0, 1
        r0, r1 = a, b
        while r1:
            q = r0 // r1
            r0, r1 = r1, r0 - q * r1
            x0, x1 = x1, x0 - q * x1
            y0, y1 = y1, y0 - q * y1
        if r0 < 0:
            r0, x0, y0 = -r0, -x0, -y0
        return r0, x0, y0

    def to_str(self, a):
        return str(a)


class Rationals(Ring):
    is_domain = True
    is_field = True
    is_euclidean = True
    has_gcd = True
    zero, one = Fraction(0), Fraction(1)

    def descriptor(self):
        return {"kind": "Rationals"}

    def name(self):
        return "QQ"

    def from_int(self, n):
        return Fraction(n)

    add = staticmethod(lambda a, b: a + b)
    sub = staticmethod(lambda a, b: a - b)
    mul = staticmethod(lambda a, b: a * b)
    neg = staticmethod(lambda a: -a)
    is_zero = staticmethod(lambda a: a == 0)
    eq = staticmethod(lambda a, b: a == b)
    key = staticmethod(lambda a: a)

    def embed_from(self, e):
        if isinstance(e.ring, Integers):
            return Fraction(e.v)
        return Ring.embed_from(self, e)

    def divide_exact(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero")
        return a / b

    def is_unit(self, a):
        return a != 0

    def canonical_unit(self, a):
        return 1 / a if a != 0 else Fraction(1)

    def norm(self, a):
        return 0

    def divmod(self, a, b):
        return a / b, Fraction(0)

    def xgcd(self, a, b):
        if a != 0:
            return Fraction(1), 1 / a, Fraction(0)
        if b != 0:
            return Fraction(1), Fraction(0), 1 / b
        return Fraction(0), Fraction(1), Fraction(0)

    def to_str(self, a):
        return str(a)

    def parse_scalar(self, s):
        return Fraction(s)


class IntegersMod(Ring):
    """Z/m.  A chain ring (valuation pivoting) when m is a prime power."""

    def __init__(self, m):
        m = int(m)
        if m < 2:
            raise RingError("modulus must be >= 2")
        self.m = m
        self.zero, self.one = 0, 1
        self.local = _prime_power(m)
        self.is_field = _is_prime(m)
        self.is_domain = self.is_field
        self.is_euclidean = self.local is not None
        self.has_gcd = self.is_euclidean

    def descriptor(self):
        return {"kind": "IntegersMod", "m": str(self.m)}

    def name(self):
        return "ZZ/%d" % self.m

    def from_int(self, n):
        return int(n) % self.m

    def add(self, a, b):
        return (a + b) % self.m

    def sub(self, a, b):
        return (a - b) % self.m

    def mul(self, a, b):
        return (a * b) % self.m

    def neg(self, a):
        return (-a) % self.m

    is_zero = staticmethod(lambda a: a == 0)
    eq = staticmethod(lambda a, b: a == b)
    key = staticmethod(lambda a: a)

    def embed_from(self, e):
        if isinstance(e.ring, Integers):
            return e.v % self.m
        return Ring.embed_from(self, e)

    def characteristic_prime(self):
        return self.local[0] if self.local else None

    def valuation(self, a):
        p, n = self.local
        if a == 0:
            return n
        v = 0
        while a % p == 0:
            a //= p
            v += 1
        return v

    def divide_exact(self, a, b):
        b %= self.m
        if b == 0:
            raise ZeroDivisionError("division by zero")
        g = igcd(b, self.m)
        if a % g:
            return None
        mg = self.m // g
        return (a // g) * pow(b // g, -1, mg) % mg

    def is_unit(self, a):
        return igcd(a, self.m) == 1

    def canonical_unit(self, a):
        if self.local is None or a == 0:
            return 1
        p = self.local[0]
        v = self.valuation(a)
        return pow(a // p ** v, -1, self.m)

    def norm(self, a):
        if self.local is None:
            raise RingError("Z/%d is not a chain ring" % self.m)
        return self.valuation(a)

    def divmod(self, a, b):
        if self.valuation(a) >= self.valuation(b):
            return self.divide_exact(a, b), 0
        return 0, a

    def xgcd(self, a, b):
        if self.local is None:
            raise RingError("gcd unsupported over Z/%d" % self.m)
        if a == 0 and b == 0:
            return 0, 1, 0
        if self.valuation(a) <= self.valuation(b):
            u = self.canonical_unit(a)
            return self.mul(a, u), u, 0
        u = self.canonical_unit(b)
        return self.mul(b, u), 0, u

    def lift_base(self):
        return INTEGERS, self.m

    def to_str(self, a):
        return str(a)


class PrimeField(IntegersMod):
    def __init__(self, p):
        IntegersMod.__init__(self, p)
        if not self.is_field:
            raise RingError("%d is not prime" % p)
        self.p = int(p)

    def descriptor(self):
        return {"kind": "PrimeField", "p": str(self.m)}

    def name(self):
        return "GF(%d)" % self.m

    def canonical_unit(self, a):
        return pow(a, -1, self.m) if a else 1

    def norm(self, a):
        return 0

    def divmod(self, a, b):
        return a * pow(b, -1, self.m) % self.m, 0

    def xgcd(self, a, b):
        if a:
            return 1, pow(a, -1, self.m), 0
        if b:
            return 1, 0, pow(b, -1, self.m)
        return 0, 1, 0

    def lift_base(self):
        return self, None


def _poly_str(cs, var, shift=0):
    terms = []
    for i, c in enumerate(cs):
        if c == 0:
            continue
        e = i + shift
        if e == 0:
            mono = ""
        elif e == 1:
            mono = var
        else:
            mono = "%s^%d" % (var, e)
        if not mono:
            t = str(c)
        elif c == 1:
            t = mono
        elif c == -1:
            t = "-" + mono
        else:
            t = "%s*%s" % (c, mono)
        terms.append(t)
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


class PolynomialOver(Ring):
    """base[var] for base in {ZZ, QQ, ZZ/m, GF(p)}, backed by flint."""

    def __init__(self, base, var="t"):
        self.base = base
        self.var = var
        self.kit = _PolyKit(base)
        self.zero, self.one = self.kit.zero, self.kit.one
        self.is_domain = base.is_domain
        self.is_euclidean = base.is_field
        self.has_gcd = base.is_field

    def descriptor(self):
        return {"kind": "PolynomialOver", "base": self.base.descriptor(), "variable": self.var}

    def name(self):
        return "%s[%s]" % (self.base.name(), self.var)

    def from_int(self, n):
        return self.kit.make([n])

    def gen(self):
        return Elem(self, self.kit.x)

    def from_list(self, cs):
        return self.kit.make(cs)

    add = staticmethod(lambda a, b: a + b)
    sub = staticmethod(lambda a, b: a - b)
    mul = staticmethod(lambda a, b: a * b)
    neg = staticmethod(lambda a: -a)
    is_zero = staticmethod(lambda a: a.degree() < 0)
    eq = staticmethod(lambda a, b: a == b)

    def key(self, a):
        return tuple(self.kit.coeffs(a))

    def embed_from(self, e):
        if e.ring == self.base or isinstance(e.ring, Integers):
            return self.kit.make([e.v if e.ring == self.base else self.base.from_int(e.v)])
        return Ring.embed_from(self, e)

    def characteristic_prime(self):
        return self.base.characteristic_prime()

    def divide_exact(self, a, b):
        if b.degree() < 0:
            raise ZeroDivisionError("division by zero")
        if isinstance(self.base, Integers):
            qq, rr = divmod(flint.fmpq_poly(a), flint.fmpq_poly(b))
            if rr != 0 or qq.denom() != 1:
                return None
            return qq.numer()
        if not self.base.is_field:
            lc = int(b[b.degree()])
            if igcd(lc, self.base.m) != 1:
                raise RingError("exact division by a non-monic polynomial over %s" % self.base.name())
        qq, rr = divmod(a, b)
        return qq if rr == 0 else None

    def is_unit(self, a):
        if a.degree() != 0:
            return False
        return self.base.is_unit(self.kit.conv(a[0]))

    def canonical_unit(self, a):
        if a.degree() < 0:
            return self.one
        lc = self.kit.conv(a[a.degree()])
        if isinstance(self.base, Integers):
            return self.kit.make([-1 if lc < 0 else 1])
        if self.base.is_field:
            return self.kit.make([self.base.inverse(lc)])
        return self.one

    def norm(self, a):
        if not self.is_euclidean:
            raise RingError("%s is not Euclidean" % self.name())
        return a.degree()

    def divmod(self, a, b):
        if not self.is_euclidean:
            raise RingError("%s is not Euclidean" % self.name())
        return divmod(a, b)

    def xgcd(self, a, b):
        if not self.is_euclidean:
            raise RingError("gcd unsupported over %s" % self.name())
        if a.degree() < 0 and b.degree() < 0:
            return self.zero, self.one, self.zero
        g, s, t = a.xgcd(b)
        return g, s, t

    def to_str(self, a):
        return _poly_str(self.kit.coeffs(a), self.var)

    def to_coeffs(self, a):
        return 0, self.kit.coeffs(a)

    def from_coeffs(self, e, cs):
        if e != 0:
            raise RingError("unit_exp must be 0 for %s" % self.name())
        return self.kit.make([self.base.parse_scalar(c) for c in cs])

    def evaluate(self, a, value):
        return self.base.from_int(0) if a.degree() < 0 else self.kit.conv(a(value))


class TowerRing(Ring):
    """base[q_k^{+-1}] with q = q_k^(p^k); base is ZZ or GF(p).

    Raw values are pairs (e, P) meaning q_k^e * P(q_k) with P(0) != 0,
    or (0, 0) for zero.  Elements of different levels of the same tower are
    embedded to the larger level automatically (q_k = q_{k+1}^p).
    """

    is_domain = True

    def __init__(self, base, p, k=0):
        if not isinstance(base, (Integers, PrimeField)):
            raise RingError("tower base must be ZZ or GF(p)")
        if isinstance(base, PrimeField) and base.p != p:
            raise RingError("tower prime must match the base field")
        if not _is_prime(p) or k < 0:
            raise RingError("bad tower parameters")
        self.base, self.p, self.k = base, int(p), int(k)
        self.kit = _PolyKit(base)
        self.zero = (0, self.kit.zero)
        self.one = (0, self.kit.one)
        self.is_euclidean = isinstance(base, PrimeField)
        self.has_gcd = True
        self.var = "q" if k == 0 else "q_%d" % k

    def descriptor(self):
        return {"kind": "TowerRing", "base": self.base.descriptor(), "p": str(self.p), "k": str(self.k)}

    def name(self):
        return "%s[%s]" % (self.base.name(), self.var)

    def at_level(self, k):
        return TowerRing(self.base, self.p, k)

    def same_tower(self, other):
        return isinstance(other, TowerRing) and other.base == self.base and other.p == self.p

    # construction
    def mono(self, e, c=1):
        return self._norm(e, self.kit.make([c]))

    def from_int(self, n):
        return self._norm(0, self.kit.make([n]))

    def from_poly(self, cs, e=0):
        return self._norm(e, self.kit.make(cs))

    def gen(self):
        return Elem(self, (1, self.kit.one))

    def q(self):
        """q = q_k^(p^k)."""
        return Elem(self, (self.p ** self.k, self.kit.one))

    def _norm(self, e, P):
        if P.degree() < 0:
            return self.zero
        if P[0] != 0:
            return (e, P)
        s = self.kit.low_order(P)
        return (e + s, P.right_shift(s))

    def embed_raw(self, a, levels):
        """Raw value a of level k viewed at level k + levels."""
        if levels == 0:
            return a
        n = self.p ** levels
        return (a[0] * n, self.kit.inflate(a[1], n))

    def embed_from(self, e):
        r = e.ring
        if isinstance(r, TowerRing) and self.same_tower(r) and r.k <= self.k:
            return self.embed_raw(e.v, self.k - r.k)
        if r == self.base:
            return self.from_int(int(e.v))
        if isinstance(r, Integers):
            return self.from_int(e.v)
        return Ring.embed_from(self, e)

    # arithmetic
    def add(self, a, b):
        if a[1].degree() < 0:
            return b
        if b[1].degree() < 0:
            return a
        ea, eb = a[0], b[0]
        if ea == eb:
            return self._norm(ea, a[1] + b[1])
        if ea < eb:
            return (ea, a[1] + b[1].left_shift(eb - ea))
        return (eb, a[1].left_shift(ea - eb) + b[1])

    def neg(self, a):
        return (a[0], -a[1])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if a[1].degree() < 0 or b[1].degree() < 0:
            return self.zero
        return (a[0] + b[0], a[1] * b[1])

    def is_zero(self, a):
        return a[1].degree() < 0

    def eq(self, a, b):
        return a[0] == b[0] and a[1] == b[1] or (a[1].degree() < 0 and b[1].degree() < 0)

    def key(self, a):
        return (a[0], tuple(self.kit.coeffs(a[1])))

    def characteristic_prime(self):
        return self.base.characteristic_prime()

    def divide_exact(self, a, b):
        if b[1].degree() < 0:
            raise ZeroDivisionError("division by zero")
        if a[1].degree() < 0:
            return self.zero
        if isinstance(self.base, Integers):
            qq, rr = divmod(flint.fmpq_poly(a[1]), flint.fmpq_poly(b[1]))
            if rr != 0 or qq.denom() != 1:
                return None
            return (a[0] - b[0], qq.numer())
        qq, rr = divmod(a[1], b[1])
        if rr != 0:
            return None
        return (a[0] - b[0], qq)

    def is_unit(self, a):
        P = a[1]
        return P.degree() == 0 and self.base.is_unit(self.kit.conv(P[0]))

    def inverse(self, a):
        if not self.is_unit(a):
            raise NotDivisible("%s is not a unit" % self.to_str(a))
        c = self.kit.conv(a[1][0])
        return (-a[0], self.kit.make([self.base.inverse(c)]))

    def canonical_unit(self, a):
        P = a[1]
        if P.degree() < 0:
            return self.one
        lc = self.kit.conv(P[P.degree()])
        if isinstance(self.base, Integers):
            c = -1 if lc < 0 else 1
        else:
            c = self.base.inverse(lc)
        return (-a[0], self.kit.make([c]))

    def norm(self, a):
        if not self.is_euclidean:
            raise RingError("ZZ tower is not Euclidean")
        return a[1].degree()

    def divmod(self, a, b):
        if not self.is_euclidean:
            raise RingError("ZZ tower is not Euclidean")
        if a[1].degree() < 0:
            return self.zero, self.zero
        qq, rr = divmod(a[1], b[1])
        return self._norm(a[0] - b[0], qq), self._norm(a[0], rr)

    def xgcd(self, a, b):
        if self.is_zero(a) and self.is_zero(b):
            return self.zero, self.one, self.zero
        if self.is_zero(b):
            u = self.canonical_unit(a)
            return self.mul(a, u), u, self.zero
        if self.is_zero(a):
            u = self.canonical_unit(b)
            return self.mul(b, u), self.zero, u
        if self.is_euclidean:
            g, s, t = a[1].xgcd(b[1])
            return (0, g), self._norm(-a[0], s), self._norm(-b[0], t)
        return _cyclotomic_xgcd(self, a, b)

    def gcd(self, a, b):
        if not self.is_euclidean and not (self.is_zero(a) or self.is_zero(b)):
            return _cyclotomic_gcd(self, a, b)
        return self.xgcd(a, b)[0]

    # tower structure
    def frobenius_raw(self, a, power=1):
        """phi^power; negative powers land in the level k+|power| ring."""
        if power >= 0:
            n = self.p ** power
            return (a[0] * n, self.kit.inflate(a[1], n))
        return a  # same data, reinterpreted at a higher level

    def evaluate(self, a, value):
        """Substitute q_k = value (an int of the base ring)."""
        P = a[1]
        if P.degree() < 0:
            return self.base.from_int(0)
        v = self.kit.conv(P(value))
        if a[0] >= 0:
            w = value ** a[0]
        else:
            if isinstance(self.base, Integers):
                if value not in (1, -1):
                    raise RingError("q_k = %d is not invertible" % value)
                w = value ** (-a[0])
            else:
                w = pow(value, a[0], self.base.m)
        return self.base.from_int(v * w)

    def to_str(self, a):
        return _poly_str(self.kit.coeffs(a[1]), self.var, a[0])

    def to_coeffs(self, a):
        return a[0], self.kit.coeffs(a[1])

    def from_coeffs(self, e, cs):
        return self._norm(int(e), self.kit.make([int(c) for c in cs]))


# --- gcd over ZZ[q_k] for cyclotomic-monomial shapes ------------------------

_GCD_CACHE = {}
_GCD_LOCK = threading.Lock()


def _cyclo_factor(R, P):
    """P (with P(0) != 0) = c * prod Phi_n^m; returns (c, {n: m}) or None."""
    key = tuple(R.kit.coeffs(P))
    with _GCD_LOCK:
        if key in _GCD_CACHE:
            return _GCD_CACHE[key]
    c, facs = P.factor()
    out = {}
    c = int(c)
    for f, m in facs:
        if f[f.degree()] < 0:
            f = -f
            c = -c if m % 2 else c
        n = f.is_cyclotomic()
        if not n:
            out = None
            break
        out[n] = out.get(n, 0) + m
    res = None if out is None else (c, out)
    with _GCD_LOCK:
        _GCD_CACHE[key] = res
    return res


def _cyclotomic_gcd(R, a, b):
    fa, fb = _cyclo_factor(R, a[1]), _cyclo_factor(R, b[1])
    if fa is None or fb is None:
        raise RingError("gcd over ZZ[q_k] only supports cyclotomic-monomial shapes")
    g = R.kit.make([igcd(fa[0], fb[0])])
    for n in sorted(set(fa[1]) & set(fb[1])):
        g = g * flint.fmpz_poly.cyclotomic(n) ** min(fa[1][n], fb[1][n])
    return R.normalize((0, g))


def _cyclotomic_xgcd(R, a, b):
    g = _cyclotomic_gcd(R, a, b)
    a1 = R.divide_exact(a, g)
    b1 = R.divide_exact(b, g)
    A, B = flint.fmpq_poly(a1[1]), flint.fmpq_poly(b1[1])
    h, s, t = A.xgcd(B)
    if h != 1:
        raise RingError("gcd over ZZ[q_k] failed to be coprime after division")
    if s.denom() != 1 or t.denom() != 1:
        raise RingError("ideal (%s, %s) is not principal in ZZ[q_k]" % (R.to_str(a), R.to_str(b)))
    # s*a1 + t*b1 = 1 with a1 = q^ea * A
    return g, (-a1[0], s.numer()), (-b1[0], t.numer())


class QuotientRing(Ring):
    """base/(modulus) for base a polynomial ring or a tower ring.

    Raw values are polynomials of degree < deg(modulus) in the base variable.
    When the modulus is a power of an irreducible pi the ring is a chain ring
    and supports Smith forms with valuation pivoting.
    """

    def __init__(self, base, modulus):
        if isinstance(modulus, Elem):
            modulus = base.coerce(modulus)
        if not isinstance(base, (PolynomialOver, TowerRing)):
            raise RingError("quotient base must be a polynomial or tower ring")
        if base.is_zero(modulus) or base.is_unit(modulus):
            raise RingError("modulus must be a nonzero non-unit")
        self.base = base
        self.modulus = base.normalize(modulus)
        self.tower = isinstance(base, TowerRing)
        self.kit = base.kit
        M = self.modulus[1] if self.tower else self.modulus
        lc = self.kit.conv(M[M.degree()])
        if not base.base.is_unit(lc):
            raise RingError("modulus must have a unit leading coefficient")
        self.M = M
        self.zero, self.one = self.kit.zero, self.kit.one % M
        self.local = None
        self._qinv = None
        fp = base.base.is_field
        self.is_field = False
        if fp:
            _, facs = M.factor()
            if len(facs) == 1:
                pi, N = facs[0]
                self.local = (pi, N)
                self.is_field = N == 1
        self.is_domain = self.is_field
        self.is_euclidean = self.local is not None
        self.has_gcd = self.is_euclidean

    def descriptor(self):
        return {"kind": "QuotientRing", "base": self.base.descriptor(),
                "modulus": element_json(self.base.elem(self.modulus))}

    def name(self):
        return "%s/(%s)" % (self.base.name(), self.base.to_str(self.modulus))

    def lift_base(self):
        return self.base, self.modulus

    def characteristic_prime(self):
        return self.base.characteristic_prime()

    def _qinverse(self):
        if self._qinv is None:
            x = self.kit.x
            g, s, t = flint.fmpq_poly(x).xgcd(flint.fmpq_poly(self.M)) if isinstance(self.base.base, Integers) else x.xgcd(self.M)
            if g != 1:
                raise RingError("q is not invertible modulo %s" % self.base.to_str(self.modulus))
            if isinstance(self.base.base, Integers):
                if s.denom() != 1:
                    raise RingError("q is not invertible modulo %s over ZZ" % self.base.to_str(self.modulus))
                s = s.numer()
            self._qinv = s % self.M
        return self._qinv

    def reduce(self, b):
        """Base raw value -> quotient raw value."""
        if not self.tower:
            return b % self.M
        e, P = b
        P = P % self.M
        if e > 0:
            P = P.left_shift(e) % self.M
        elif e < 0:
            P = (P * pow_mod(self._qinverse(), -e, self.M)) % self.M
        return P

    def lift(self, a):
        """Quotient raw -> canonical base raw representative."""
        if not self.tower:
            return a
        return self.base._norm(0, a)

    def from_int(self, n):
        return self.kit.make([n]) % self.M

    def embed_from(self, e):
        if e.ring == self.base:
            return self.reduce(e.v)
        try:
            return self.reduce(self.base.coerce(e))
        except RingError:
            return Ring.embed_from(self, e)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return (a * b) % self.M

    def is_zero(self, a):
        return a.degree() < 0

    def eq(self, a, b):
        return a == b

    def key(self, a):
        return tuple(self.kit.coeffs(a))

    def _field_base(self):
        if not self.base.base.is_field:
            raise RingError("operation needs a field base in %s" % self.name())

    def divide_exact(self, a, b):
        if b.degree() < 0:
            raise ZeroDivisionError("division by zero")
        if not self.base.base.is_field:
            Bq, Mq = flint.fmpq_poly(b), flint.fmpq_poly(self.M)
            g, s, _ = Bq.xgcd(Mq)
            if g != 1 or s.denom() != 1:
                raise RingError("division by a non-unit over %s" % self.name())
            return (a * s.numer()) % self.M
        g, s, _ = b.xgcd(self.M)
        qq, rr = divmod(a, g)
        if rr != 0:
            return None
        m1 = self.M // g
        return (qq * s) % m1 % self.M

    def is_unit(self, a):
        if a.degree() < 0:
            return False
        if not self.base.base.is_field:
            g, s, _ = flint.fmpq_poly(a).xgcd(flint.fmpq_poly(self.M))
            return g == 1 and s.denom() == 1
        return a.gcd(self.M) == 1

    def valuation(self, a):
        pi, N = self.local
        if a.degree() < 0:
            return N
        v = 0
        while v < N:
            qq, rr = divmod(a, pi)
            if rr != 0:
                break
            a = qq
            v += 1
        return v

    def canonical_unit(self, a):
        if self.local is None or a.degree() < 0:
            return self.one
        pi, N = self.local
        v = self.valuation(a)
        target = pi ** v % self.M
        return self.divide_exact(target, a)

    def norm(self, a):
        if self.local is None:
            raise RingError("%s is not a chain ring" % self.name())
        return self.valuation(a)

    def divmod(self, a, b):
        if self.valuation(a) >= self.valuation(b):
            return self.divide_exact(a, b), self.zero
        return self.zero, a

    def xgcd(self, a, b):
        if self.local is None:
            raise RingError("gcd unsupported over %s" % self.name())
        if self.is_zero(a) and self.is_zero(b):
            return self.zero, self.one, self.zero
        if self.valuation(a) <= self.valuation(b):
            u = self.canonical_unit(a)
            return self.mul(a, u), u, self.zero
        u = self.canonical_unit(b)
        return self.mul(b, u), self.zero, u

    def to_str(self, a):
        return _poly_str(self.kit.coeffs(a), self.base.var)

    def to_coeffs(self, a):
        return 0, self.kit.coeffs(a)

    def from_coeffs(self, e, cs):
        if self.tower:
            return self.reduce(self.base.from_coeffs(e, cs))
        return self.reduce(self.base.from_coeffs(e, cs))


def pow_mod(P, n, M):
    result = (M ** 0) % M
    base = P % M
    while n:
        if n & 1:
            result = (result * base) % M
        n >>= 1
        if n:
            base = (base * base) % M
    return result


INTEGERS = Integers()
RATIONALS = Rationals()


# --- public element wrapper -------------------------------------------------

def _common(a, b):
    if isinstance(b, int):
        return a.ring, a.v, a.ring.from_int(b)
    if not isinstance(b, Elem):
        raise RingError("cannot combine %r with %r" % (a, b))
    if a.ring == b.ring:
        return a.ring, a.v, b.v
    ra, rb = a.ring, b.ring
    if isinstance(ra, TowerRing) and ra.same_tower(rb):
        R = ra if ra.k >= rb.k else rb
        return R, R.coerce(a), R.coerce(b)
    for R in (ra, rb):
        try:
            return R, R.coerce(a), R.coerce(b)
        except RingError:
            pass
    raise RingError("descriptor mismatch: %s vs %s" % (ra, rb))


class Elem:
    """An element of a ring (immutable)."""

    __slots__ = ("ring", "v")

    def __init__(self, ring, v):
        self.ring = ring
        self.v = v

    def __add__(self, o):
        R, x, y = _common(self, o)
        return Elem(R, R.add(x, y))

    __radd__ = __add__

    def __sub__(self, o):
        R, x, y = _common(self, o)
        return Elem(R, R.sub(x, y))

    def __rsub__(self, o):
        R, x, y = _common(self, o)
        return Elem(R, R.sub(y, x))

    def __mul__(self, o):
        R, x, y = _common(self, o)
        return Elem(R, R.mul(x, y))

    __rmul__ = __mul__

    def __neg__(self):
        return Elem(self.ring, self.ring.neg(self.v))

    def __pow__(self, n):
        return Elem(self.ring, self.ring.pow(self.v, n))

    def __eq__(self, o):
        try:
            R, x, y = _common(self, o)
        except RingError:
            return False
        return R.eq(x, y)

    def __hash__(self):
        return hash((self.ring.name(), self.ring.key(self.v)))

    def is_zero(self):
        return self.ring.is_zero(self.v)

    def is_unit(self):
        return self.ring.is_unit(self.v)

    def divide_exact(self, o):
        """self / o, or None when o does not divide self."""
        R, x, y = _common(self, o)
        c = R.divide_exact(x, y)
        return None if c is None else Elem(R, c)

    def __truediv__(self, o):
        c = self.divide_exact(o)
        if c is None:
            raise NotDivisible("%s is not divisible by %s" % (self, o))
        return c

    def normalized(self):
        return Elem(self.ring, self.ring.normalize(self.v))

    def __str__(self):
        return self.ring.to_str(self.v)

    def __repr__(self):
        return "Elem(%s, %s)" % (self.ring.name(), self)


def divide_exact(a, b):
    return a.divide_exact(b)


def gcd(a, b):
    R, x, y = _common(a, b)
    if not R.has_gcd:
        raise RingError("gcd unsupported over %s" % R.name())
    return Elem(R, R.normalize(R.gcd(x, y)))


def xgcd(a, b):
    R, x, y = _common(a, b)
    g, s, t = R.xgcd(x, y)
    return Elem(R, g), Elem(R, s), Elem(R, t)


# --- tower operations ---------------------------------------------------------

def tower(base, p, k=0):
    """ZZ[q_k] if base == 'Z' or ZZ, GF(p)[q_k] if base == 'F' or a PrimeField."""
    if base in ("Z", "ZZ") or isinstance(base, Integers):
        return TowerRing(INTEGERS, p, k)
    return TowerRing(PrimeField(p), p, k)


def _need_tower(a):
    if not isinstance(a.ring, TowerRing):
        raise RingError("%s is not a tower ring" % a.ring.name())
    return a.ring


def frobenius(a, power=1):
    """phi^power(a); q_k -> q_k^p.  Negative powers raise the level."""
    R = _need_tower(a)
    if power >= 0:
        return Elem(R, R.frobenius_raw(a.v, power))
    return Elem(R.at_level(R.k - power), a.v)


def embed(a, k):
    """View a tower element at level k >= its level."""
    R = _need_tower(a)
    if k < R.k:
        raise RingError("cannot embed level %d into level %d" % (R.k, k))
    return Elem(R.at_level(k), R.embed_raw(a.v, k - R.k))


def descend(a):
    """Write a at the smallest level it is defined over."""
    R = _need_tower(a)
    e, P = a.v
    k = R.k
    while k > 0:
        cs = R.kit.coeffs(P)
        if e % R.p or any(c for i, c in enumerate(cs) if i % R.p):
            break
        P = R.kit.make(cs[::R.p])
        e //= R.p
        k -= 1
    return Elem(R.at_level(k), (e, P))


def q_int(j, ring):
    """[j]_q = (q^j - 1)/(q - 1) in a tower ring (q = q_k^(p^k))."""
    R = ring
    n = R.p ** R.k
    if j == 0:
        return Elem(R, R.zero)
    if j > 0:
        cs = [0] * (n * (j - 1) + 1)
        for i in range(j):
            cs[i * n] = 1
        return Elem(R, R.from_poly(cs))
    pos = q_int(-j, R)
    return Elem(R, R.neg(R.mul(R.mono(j * n), pos.v)))


def q_power_minus_one(ring, num):
    """q_k^num - 1 (num may be negative)."""
    R = ring
    return Elem(R, R.sub(R.mono(num), R.one))


def specialize_q(h, value):
    """Substitute q_k = value (value in the base ring)."""
    R = _need_tower(h)
    v = value.v if isinstance(value, Elem) else value
    return Elem(R.base, R.evaluate(h.v, v))


def unit_in_truncation(h, n, M):
    """Is h a unit in (base/p^n)[q_k]/((q_k - 1)^M)?

    That ring is local with residue field GF(p) (maximal ideal (p, q_k - 1)),
    so the answer is whether h(1) is nonzero mod p; n, M >= 1 only matter in
    that the truncation is nonzero.
    """
    R = _need_tower(h)
    if n < 1 or M < 1:
        return True  # the zero ring: everything is a unit
    return R.evaluate(h.v, 1) % R.p != 0


class DistinguishedElements:
    """mu, xi, xi_r, phi(xi) at a fixed tower level, identities checked."""

    def __init__(self, ring):
        R = _need_tower(Elem(ring, ring.zero))
        self.ring = R
        self.p, self.k = R.p, R.k
        self.mu = q_power_minus_one(R, R.p ** R.k)
        self.phi_xi = q_int(R.p, R.at_level(0))
        self._xi = {}
        if self.k >= 1:
            self.xi = self.xi_r(1)
            if frobenius(self.xi) != embed(self.phi_xi, self.k):
                raise AssertionError("phi(xi) != [p]_q")
        else:
            self.xi = None

    def phi_inv_mu(self, r):
        """phi^{-r}(mu) = q_r - 1, written at this level."""
        if r > self.k:
            raise RingError("level %d too low for phi^-%d(mu)" % (self.k, r))
        R = self.ring
        return q_power_minus_one(R, R.p ** (self.k - r))

    def xi_r(self, r):
        if r > self.k:
            raise RingError("xi_%d needs level >= %d (have %d)" % (r, r, self.k))
        if r in self._xi:
            return self._xi[r]
        R = self.ring
        if r == 0:
            x = Elem(R, R.one)
        else:
            x = self.mu / self.phi_inv_mu(r)
            # product formula: xi_r = prod_{i<r} phi^{-i}(xi)
            prod = Elem(R, R.one)
            R1 = R.at_level(1)
            xi1 = Elem(R1, R1.from_poly([1] * R.p))
            for i in range(r):
                prod = prod * embed(frobenius(xi1, -i), self.k)
            if prod != x or x * self.phi_inv_mu(r) != self.mu:
                raise AssertionError("distinguished element identities failed at r=%d" % r)
        self._xi[r] = x
        return x


def distinguished(ring, which, r=None):
    D = DistinguishedElements(ring)
    if which == "mu":
        return D.mu
    if which == "xi":
        if D.xi is None:
            raise RingError("xi needs level >= 1")
        return D.xi
    if which == "xi_r":
        return D.xi_r(r)
    if which == "phi_xi":
        return embed(D.phi_xi, ring.k)
    raise RingError("unknown distinguished element %r" % which)


# --- JSON --------------------------------------------------------------------

def ring_json(R):
    return R.descriptor()


def ring_from_json(d):
    kind = d.get("kind")
    if kind == "Integers":
        return INTEGERS
    if kind == "Rationals":
        return RATIONALS
    if kind == "IntegersMod":
        return IntegersMod(int(d["m"]))
    if kind == "PrimeField":
        return PrimeField(int(d["p"]))
    if kind == "PolynomialOver":
        return PolynomialOver(ring_from_json(d["base"]), d.get("variable", "t"))
    if kind == "TowerRing":
        return TowerRing(ring_from_json(d["base"]), int(d["p"]), int(d["k"]))
    if kind == "QuotientRing":
        base = ring_from_json(d["base"])
        m = element_from_json(d["modulus"], base)
        return QuotientRing(base, m.v)
    raise RingError("unknown ring kind %r" % kind)


def raw_json(R, a):
    e, cs = R.to_coeffs(a)
    return {"unit_exp": str(e), "coeffs": [str(c) for c in cs]}


def raw_from_json(R, d):
    return R.from_coeffs(int(d.get("unit_exp", "0")), [c for c in d["coeffs"]])


def element_json(x):
    out = {"ring": x.ring.descriptor()}
    out.update(raw_json(x.ring, x.v))
    return out


def element_from_json(d, ring=None):
    R = ring if ring is not None else ring_from_json(d["ring"])
    return Elem(R, raw_from_json(R, d))
