"""Exact matrices over the rings of :mod:`iphodge.rings`.

Smith forms use Bezout row/column operations, so they run over Euclidean
domains, the chain rings ZZ/p^n and A/(pi^N), and over ZZ[q_k] as long as the
gcds met along the way are cyclotomic-monomial.  Every Smith form carries
U, V and their inverses, and the certificate U*A*V = D is checked before the
result is returned.
"""

from __future__ import annotations

from .rings import Elem, RingError, raw_json, raw_from_json, ring_from_json


class Matrix:
    """rows x cols matrix of raw ring values (row-major lists)."""

    __slots__ = ("ring", "rows", "cols", "a")

    def __init__(self, ring, rows, cols, a=None):
        self.ring = ring
        self.rows, self.cols = rows, cols
        if a is None:
            z = ring.zero
            a = [[z] * cols for _ in range(rows)]
        elif len(a) != rows or any(len(r) != cols for r in a):
            raise ValueError("matrix shape mismatch")
        self.a = a

    @classmethod
    def identity(cls, ring, n):
        M = cls(ring, n, n)
        for i in range(n):
            M.a[i][i] = ring.one
        return M

    @classmethod
    def from_ints(cls, ring, rows):
        rows = [list(r) for r in rows]
        nr = len(rows)
        nc = len(rows[0]) if rows else 0
        return cls(ring, nr, nc, [[ring.coerce(x) for x in r] for r in rows])

    @classmethod
    def diag(cls, ring, entries, rows=None, cols=None):
        n = len(entries)
        M = cls(ring, n if rows is None else rows, n if cols is None else cols)
        for i, x in enumerate(entries):
            M.a[i][i] = x
        return M

    @classmethod
    def hstack(cls, ring, mats, rows):
        out = [[] for _ in range(rows)]
        cols = 0
        for M in mats:
            if M.rows != rows:
                raise ValueError("hstack row mismatch")
            for i in range(rows):
                out[i].extend(M.a[i])
            cols += M.cols
        return cls(ring, rows, cols, out)

    @classmethod
    def from_columns(cls, ring, rows, columns):
        M = cls(ring, rows, len(columns))
        for j, c in enumerate(columns):
            for i in range(rows):
                M.a[i][j] = c[i]
        return M

    def copy(self):
        return Matrix(self.ring, self.rows, self.cols, [list(r) for r in self.a])

    def entry(self, i, j):
        return Elem(self.ring, self.a[i][j])

    def column(self, j):
        return [self.a[i][j] for i in range(self.rows)]

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def submatrix(self, rows=None, cols=None):
        rows = range(self.rows) if rows is None else list(rows)
        cols = range(self.cols) if cols is None else list(cols)
        return Matrix(self.ring, len(rows), len(cols), [[self.a[i][j] for j in cols] for i in rows])

    def transpose(self):
        return Matrix(self.ring, self.cols, self.rows, [list(c) for c in zip(*self.a)] if self.rows else [[] for _ in range(self.cols)])

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch %dx%d @ %dx%d" % (self.rows, self.cols, other.rows, other.cols))
        R = self.ring
        add, mul, isz = R.add, R.mul, R.is_zero
        z = R.zero
        oa = other.a
        out = []
        for row in self.a:
            new = [z] * other.cols
            for k, x in enumerate(row):
                if isz(x):
                    continue
                ok = oa[k]
                for j in range(other.cols):
                    y = ok[j]
                    if not isz(y):
                        new[j] = add(new[j], mul(x, y))
            out.append(new)
        return Matrix(R, self.rows, other.cols, out)

    def apply(self, v):
        R = self.ring
        out = []
        for row in self.a:
            s = R.zero
            for x, y in zip(row, v):
                if not R.is_zero(x) and not R.is_zero(y):
                    s = R.add(s, R.mul(x, y))
            out.append(s)
        return out

    def __add__(self, other):
        R = self.ring
        return Matrix(R, self.rows, self.cols, [[R.add(x, y) for x, y in zip(r, s)] for r, s in zip(self.a, other.a)])

    def __sub__(self, other):
        R = self.ring
        return Matrix(R, self.rows, self.cols, [[R.sub(x, y) for x, y in zip(r, s)] for r, s in zip(self.a, other.a)])

    def __neg__(self):
        R = self.ring
        return Matrix(R, self.rows, self.cols, [[R.neg(x) for x in r] for r in self.a])

    def scale(self, c):
        R = self.ring
        return Matrix(R, self.rows, self.cols, [[R.mul(c, x) for x in r] for r in self.a])

    def map(self, fn, ring=None):
        return Matrix(ring or self.ring, self.rows, self.cols, [[fn(x) for x in r] for r in self.a])

    def is_zero(self):
        isz = self.ring.is_zero
        return all(isz(x) for r in self.a for x in r)

    def __eq__(self, other):
        if not isinstance(other, Matrix) or (self.rows, self.cols) != (other.rows, other.cols):
            return False
        eq = self.ring.eq
        return all(eq(x, y) for r, s in zip(self.a, other.a) for x, y in zip(r, s))

    def __hash__(self):
        return hash((self.rows, self.cols))

    def to_strs(self):
        return [[self.ring.to_str(x) for x in r] for r in self.a]

    def __repr__(self):
        return "Matrix(%s, %s)" % (self.ring.name(), self.to_strs())


def is_identity(M):
    R = M.ring
    for i in range(M.rows):
        for j in range(M.cols):
            x = M.a[i][j]
            if i == j:
                if not R.eq(x, R.one):
                    return False
            elif not R.is_zero(x):
                return False
    return True


# --- Smith normal form --------------------------------------------------------

class SmithForm:
    """U * A * V = D, with D diagonal and d_1 | d_2 | ... ."""

    def __init__(self, A, U, V, D, Uinv, Vinv, rank):
        self.A, self.U, self.V, self.D = A, U, V, D
        self.Uinv, self.Vinv = Uinv, Vinv
        self.rank = rank
        self.certified = False

    @property
    def diagonal(self):
        return [self.D.a[i][i] for i in range(min(self.D.rows, self.D.cols))]

    @property
    def divisors(self):
        """The nonzero diagonal entries d_1 | ... | d_rank."""
        return self.diagonal[:self.rank]

    def certify(self):
        A, U, V, D = self.A, self.U, self.V, self.D
        R = A.ring
        if not (U @ A @ V == D):
            raise AssertionError("Smith certificate U*A*V = D failed")
        if not is_identity(U @ self.Uinv) or not is_identity(self.V @ self.Vinv):
            raise AssertionError("Smith certificate: transforms not invertible")
        for i in range(D.rows):
            for j in range(D.cols):
                if i != j and not R.is_zero(D.a[i][j]):
                    raise AssertionError("Smith form not diagonal")
        ds = self.diagonal
        for i in range(len(ds) - 1):
            if not R.divides(ds[i], ds[i + 1]):
                raise AssertionError("Smith divisibility chain broken")
        self.certified = True
        return self


def smith_form(A, transforms=True):
    """Smith normal form of A with certificate.

    Pivot choice is deterministic: least norm (valuation on chain rings,
    degree on polynomial rings, |.| on ZZ), then lexicographic position.
    """
    R = A.ring
    m, n = A.rows, A.cols
    D = A.copy().a
    U = Matrix.identity(R, m).a
    Ui = Matrix.identity(R, m).a
    V = Matrix.identity(R, n).a
    Vi = Matrix.identity(R, n).a
    isz, add, mul, neg, sub = R.is_zero, R.add, R.mul, R.neg, R.sub
    euclid = R.is_euclidean

    def norm(x):
        if euclid:
            return R.norm(x)
        # ZZ[q_k]: degree, then the size of the leading coefficient
        P = x[1]
        return (P.degree(), abs(int(P[P.degree()])))

    def row_comb(rows, i, j, a, b, c, d):
        # (row_i, row_j) <- (a row_i + b row_j, c row_i + d row_j)
        ri, rj = rows[i], rows[j]
        for k in range(len(ri)):
            x, y = ri[k], rj[k]
            if isz(x) and isz(y):
                continue
            ri[k] = add(mul(a, x), mul(b, y))
            rj[k] = add(mul(c, x), mul(d, y))

    def col_comb(rows, i, j, a, b, c, d):
        # (col_i, col_j) <- (a col_i + b col_j, c col_i + d col_j)
        for r in rows:
            x, y = r[i], r[j]
            if isz(x) and isz(y):
                continue
            r[i] = add(mul(a, x), mul(b, y))
            r[j] = add(mul(c, x), mul(d, y))

    one, zero = R.one, R.zero

    def row_op(i, j, a, b, c, d, ia, ib, ic, id_):
        # apply E = [[a,b],[c,d]] on rows i,j; E^-1 = [[ia,ib],[ic,id_]]
        row_comb(D, i, j, a, b, c, d)
        if transforms:
            row_comb(U, i, j, a, b, c, d)
            col_comb(Ui, i, j, ia, ic, ib, id_)

    def col_op(i, j, a, b, c, d, ia, ib, ic, id_):
        # new col_i = a col_i + b col_j ; new col_j = c col_i + d col_j
        col_comb(D, i, j, a, b, c, d)
        if transforms:
            col_comb(V, i, j, a, b, c, d)
            row_comb(Vi, i, j, ia, ib, ic, id_)

    t = 0
    rank = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            Di = D[i]
            for j in range(t, n):
                x = Di[j]
                if not isz(x):
                    k = (norm(x), i, j)
                    if best is None or k < best:
                        best = k
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            D[t], D[pi] = D[pi], D[t]
            if transforms:
                U[t], U[pi] = U[pi], U[t]
                for r in Ui:
                    r[t], r[pi] = r[pi], r[t]
        if pj != t:
            for r in D:
                r[t], r[pj] = r[pj], r[t]
            if transforms:
                for r in V:
                    r[t], r[pj] = r[pj], r[t]
                Vi[t], Vi[pj] = Vi[pj], Vi[t]
        while True:
            dirty = False
            for i in range(t + 1, m):
                b = D[i][t]
                if isz(b):
                    continue
                a = D[t][t]
                q = R.divide_exact(b, a)
                if q is not None:
                    # row_i -= q row_t
                    row_op(t, i, one, zero, neg(q), one, one, zero, q, one)
                else:
                    g, s, x = R.xgcd(a, b)
                    a1, b1 = R.divide_exact(a, g), R.divide_exact(b, g)
                    row_op(t, i, s, x, neg(b1), a1, a1, neg(x), b1, s)
                    dirty = True
            for j in range(t + 1, n):
                b = D[t][j]
                if isz(b):
                    continue
                a = D[t][t]
                q = R.divide_exact(b, a)
                if q is not None:
                    # col_j -= q col_t ; V^-1: row_t += q row_j
                    col_op(t, j, one, zero, neg(q), one, one, q, zero, one)
                else:
                    g, s, x = R.xgcd(a, b)
                    a1, b1 = R.divide_exact(a, g), R.divide_exact(b, g)
                    # new col_t = s col_t + x col_j ; new col_j = -b1 col_t + a1 col_j
                    col_op(t, j, s, x, neg(b1), a1, a1, b1, neg(x), s)
                    dirty = True
            if dirty:
                continue
            if any(not isz(D[i][t]) for i in range(t + 1, m)):
                continue
            # make the pivot divide the remaining block
            a = D[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if not isz(D[i][j]) and R.divide_exact(D[i][j], a) is None:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            # row_t += row_bad
            row_op(t, bad, one, one, zero, one, one, neg(one), zero, one)
        u = R.canonical_unit(D[t][t])
        if not R.eq(u, one):
            ui = R.inverse(u)
            D[t] = [mul(u, x) for x in D[t]]
            if transforms:
                U[t] = [mul(u, x) for x in U[t]]
                for r in Ui:
                    r[t] = mul(r[t], ui)
        rank += 1
        t += 1
    S = SmithForm(A, Matrix(R, m, m, U), Matrix(R, n, n, V), Matrix(R, m, n, D),
                  Matrix(R, m, m, Ui), Matrix(R, n, n, Vi), rank)
    if transforms:
        S.certify()
    return S


def hermite_form(A):
    """Column-style Hermite form: a basis of the column span of A.

    Returns a matrix H whose columns form a basis of the span of the
    columns of A, in echelon shape (column j has its leading entry in a row
    strictly below the leading entry of column j-1), with entries above each
    pivot reduced when the ring has division with remainder.  The result is
    canonical over ZZ, K[x] and chain rings, which makes it usable for
    equality of lattices.
    """
    R = A.ring
    cols = [c for c in A.columns()]
    m = A.rows
    isz = R.is_zero
    basis = []
    row = 0
    work = [list(c) for c in cols]
    while row < m and work:
        nz = [c for c in work if not isz(c[row])]
        rest = [c for c in work if isz(c[row])]
        if not nz:
            row += 1
            continue
        # combine all columns with a nonzero entry in this row into one pivot
        piv = nz[0]
        for c in nz[1:]:
            a, b = piv[row], c[row]
            q = R.divide_exact(b, a)
            if q is not None:
                c2 = [R.sub(y, R.mul(q, x)) for x, y in zip(piv, c)]
                rest.append(c2)
                continue
            q = R.divide_exact(a, b)
            if q is not None:
                c2 = [R.sub(x, R.mul(q, y)) for x, y in zip(piv, c)]
                piv = c
                rest.append(c2)
                continue
            g, s, x = R.xgcd(a, b)
            a1, b1 = R.divide_exact(a, g), R.divide_exact(b, g)
            newp = [R.add(R.mul(s, u), R.mul(x, v)) for u, v in zip(piv, c)]
            other = [R.sub(R.mul(a1, v), R.mul(b1, u)) for u, v in zip(piv, c)]
            piv = newp
            rest.append(other)
        u = R.canonical_unit(piv[row])
        piv = [R.mul(u, x) for x in piv]
        basis.append((row, piv))
        work = [c for c in rest if any(not isz(x) for x in c)]
        row += 1
    # reduce above pivots
    if R.is_euclidean:
        for bi in range(len(basis)):
            prow, pv = basis[bi]
            for bj in range(bi):
                r2, v2 = basis[bj]
                x = v2[prow]
                if isz(x):
                    continue
                q, _ = R.divmod(x, pv[prow])
                if not isz(q):
                    basis[bj] = (r2, [R.sub(y, R.mul(q, z)) for y, z in zip(v2, pv)])
    return Matrix.from_columns(R, m, [v for _, v in basis])


# --- lattice toolkit ------------------------------------------------------------

def kernel(M):
    """Basis (as columns) of {x : M x = 0}, over a domain."""
    S = smith_form(M)
    return S.V.submatrix(cols=range(S.rank, M.cols))


def span_basis(G):
    """A basis of the column span of G (over a domain)."""
    S = smith_form(G)
    R = G.ring
    B = S.Uinv.submatrix(cols=range(S.rank))
    ds = S.divisors
    return Matrix(R, B.rows, len(ds), [[R.mul(B.a[i][j], ds[j]) for j in range(len(ds))] for i in range(B.rows)])


class Solver:
    """Solve M x = b repeatedly, using one Smith form of M."""

    def __init__(self, M):
        self.M = M
        self.S = smith_form(M)

    def solve(self, b):
        """Some x with M x = b, or None."""
        S, R = self.S, self.M.ring
        c = S.U.apply(b)
        y = [R.zero] * self.M.cols
        for i in range(len(c)):
            if i < S.rank:
                q = R.divide_exact(c[i], S.D.a[i][i])
                if q is None:
                    return None
                y[i] = q
            elif not R.is_zero(c[i]):
                return None
        return S.V.apply(y)


def solve(M, B):
    """X with M X = B (columnwise), or None if some column has no solution."""
    sv = Solver(M)
    cols = []
    for b in B.columns():
        x = sv.solve(b)
        if x is None:
            return None
        cols.append(x)
    return Matrix.from_columns(M.ring, M.cols, cols)


def preimage(M, L):
    """Basis of {x : M x in span(L)} (over a domain)."""
    R = M.ring
    if L is None or L.cols == 0:
        return kernel(M)
    aug = Matrix.hstack(R, [M, -L], M.rows)
    K = kernel(aug)
    P = K.submatrix(rows=range(M.cols))
    if P.cols == 0:
        return P
    return span_basis(P)


def solve_in_submodule(A, f):
    """Basis of {x : A x in f * ambient}.

    From a Smith form U A V = D the condition reads d_i y_i in (f) for
    y = V^-1 x, so the lattice is V * diag(f / gcd(d_i, f)); coordinates
    beyond the rank are unconstrained.
    """
    R = A.ring
    S = smith_form(A)
    n = A.cols
    cols = []
    for j in range(n):
        vj = S.V.column(j)
        if j < S.rank:
            d = S.D.a[j][j]
            g = R.gcd(d, f)
            c = R.divide_exact(f, g)
            cols.append([R.mul(c, x) for x in vj])
        else:
            cols.append(vj)
    return Matrix.from_columns(R, n, cols)


def in_span(B, v):
    """Is v in the column span of B?"""
    if B.cols == 0:
        return all(B.ring.is_zero(x) for x in v)
    return Solver(B).solve(v) is not None


def same_span(A, B):
    return all(in_span(A, c) for c in B.columns()) and all(in_span(B, c) for c in A.columns())


# --- module presentations ---------------------------------------------------------

class ModulePresentation:
    """Cokernel of a relation matrix: generators are columns, one relation
    per row (module = R^cols / rowspace(relations))."""

    def __init__(self, ring, relations):
        self.ring = ring
        self.relations = relations
        self._divs = None

    @property
    def ngens(self):
        return self.relations.cols

    def _compute(self):
        if self._divs is None:
            R = self.ring
            S = smith_form(self.relations.transpose())
            diag = S.divisors
            nz = [d for d in diag if not R.is_zero(d)]
            self._chain = nz
            self._divs = [d for d in nz if not R.is_unit(d)]
            self._free = self.ngens - len(nz)
        return self._divs

    def elementary_divisors(self):
        """(non-unit divisor chain, free rank)."""
        self._compute()
        return [Elem(self.ring, d) for d in self._divs], self._free

    def fitting_ideal(self, i):
        """Generator of Fitt_i: product of the first (n - i) entries of the
        zero-padded invariant-factor chain."""
        R = self.ring
        self._compute()
        n = self.ngens
        if i >= n:
            return Elem(R, R.one)
        chain = list(self._chain) + [R.zero] * (n - len(self._chain))
        g = R.one
        for d in chain[:n - i]:
            g = R.mul(g, d)
        return Elem(R, R.normalize(g))


def elementary_divisors(M):
    return M.elementary_divisors()


def fitting_ideals(M, i):
    return M.fitting_ideal(i)


class Subquotient:
    """Num / Den for lattices Den <= Num in a free module A^s.

    Num is given by a basis (full column rank); Den by generators.  After a
    Smith form of Den written in Num-coordinates, generators of the quotient
    are columns of Num * P^-1 and the i-th one has annihilator divisors[i]
    (zero means free).  Unit divisors are dropped.
    """

    def __init__(self, Num, Den):
        R = Num.ring
        self.ring = R
        self.Num = Num
        self.num_solver = Solver(Num)
        a = Num.cols
        if Den is None or Den.cols == 0:
            C = Matrix(R, a, 0)
        else:
            cols = []
            for c in Den.columns():
                x = self.num_solver.solve(c)
                if x is None:
                    raise AssertionError("denominator lattice not contained in numerator")
                cols.append(x)
            C = Matrix.from_columns(R, a, cols)
        S = smith_form(C)
        diag = S.diagonal + [R.zero] * (a - min(C.rows, C.cols))
        diag = diag[:a]
        keep = [i for i in range(a) if not R.is_unit(diag[i])]
        self.keep = keep
        self.divisors = [diag[i] for i in keep]
        self.P = S.U
        G = Num @ S.Uinv
        self.gens = G.submatrix(cols=keep)

    @property
    def ngens(self):
        return len(self.keep)

    @property
    def free_rank(self):
        R = self.ring
        return sum(1 for d in self.divisors if R.is_zero(d))

    def torsion(self):
        R = self.ring
        return [d for d in self.divisors if not R.is_zero(d)]

    def coords(self, z):
        """Coordinates of z (an element of Num) on the generators (unreduced)."""
        x = self.num_solver.solve(z)
        if x is None:
            raise AssertionError("vector is not in the numerator lattice")
        y = self.P.apply(x)
        return [y[i] for i in self.keep]

    def reduce(self, c):
        R = self.ring
        out = []
        for x, d in zip(c, self.divisors):
            if R.is_zero(d):
                out.append(x)
            elif R.is_euclidean:
                out.append(R.divmod(x, d)[1])
            else:
                out.append(x)
        return out

    def coords_zero(self, c):
        R = self.ring
        return all(R.divides(d, x) for x, d in zip(c, self.divisors))

    def in_den(self, z):
        return self.coords_zero(self.coords(z))

    def presentation(self):
        R = self.ring
        n = self.ngens
        rel = Matrix(R, n, n)
        for i, d in enumerate(self.divisors):
            rel.a[i][i] = d
        return ModulePresentation(R, rel)


# --- JSON ------------------------------------------------------------------------

def matrix_json(M):
    return {"ring": M.ring.descriptor(), "rows": M.rows, "cols": M.cols,
            "entries": [[raw_json(M.ring, x) for x in r] for r in M.a]}


def matrix_from_json(d, ring=None):
    R = ring if ring is not None else ring_from_json(d["ring"])
    rows, cols = int(d["rows"]), int(d["cols"])
    ent = d["entries"]
    if len(ent) != rows or any(len(r) != cols for r in ent):
        raise ValueError("matrix entries do not match the declared shape")
    return Matrix(R, rows, cols, [[_entry_from_json(R, x) for x in r] for r in ent])


def _entry_from_json(R, x):
    if isinstance(x, str):
        return R.from_coeffs(0, [x])
    if isinstance(x, dict):
        return raw_from_json(R, x)
    raise ValueError("matrix entries must be strings or element objects")
