"""Conjugating finitely generated subgroups of SL(n, Q) into SL(n, Z).

A group H is conjugate into GL(n, Z) exactly when it has a common
denominator d with dH integral. Given one, the lattice spanned by H Z^n is
H-invariant and lies in (1/d) Z^n; any basis of it conjugates H into
integral matrices. The lattice is found by closing Z^n under the
generators and their inverses, with Hermite normal forms keeping the
bases canonical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from .exactmat import DeterminantError, IntMat


class IntegralityError(ValueError):
    """The input could not be certified as conjugate into SL(n, Z)."""


class DegenerateAlgebraError(ValueError):
    """The span of the group is not the full matrix algebra."""


class RatMat:
    """An n x n matrix of exact fractions."""

    __slots__ = ("n", "entries")

    def __init__(self, n, entries):
        entries = tuple(Fraction(x) for x in entries)
        if len(entries) != n * n:
            raise ValueError(f"expected {n * n} entries, got {len(entries)}")
        self.n = n
        self.entries = entries

    @classmethod
    def from_rows(cls, rows):
        return cls(len(rows), [x for r in rows for x in r])

    @classmethod
    def from_columns(cls, cols):
        n = len(cols)
        return cls(n, [cols[j][i] for i in range(n) for j in range(n)])

    @classmethod
    def identity(cls, n):
        return cls(n, [int(i == j) for i in range(n) for j in range(n)])

    @classmethod
    def of(cls, x):
        if isinstance(x, RatMat):
            return x
        if isinstance(x, IntMat):
            return cls(x.n, x.entries)
        return cls.from_rows(x)

    def rows(self):
        n = self.n
        return [list(self.entries[i * n:(i + 1) * n]) for i in range(n)]

    def columns(self):
        n = self.n
        return [tuple(self.entries[i * n + j] for i in range(n)) for j in range(n)]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.n + j]

    def __matmul__(self, other):
        other = RatMat.of(other)
        n = self.n
        a, b = self.entries, other.entries
        return RatMat(n, [sum(a[i * n + k] * b[k * n + j] for k in range(n))
                          for i in range(n) for j in range(n)])

    def __sub__(self, other):
        other = RatMat.of(other)
        return RatMat(self.n, [x - y for x, y in zip(self.entries, other.entries)])

    def scale(self, c):
        return RatMat(self.n, [c * x for x in self.entries])

    def act(self, vec):
        n = self.n
        return tuple(sum(self.entries[i * n + k] * vec[k] for k in range(n)) for i in range(n))

    def trace(self):
        return sum(self.entries[i * self.n + i] for i in range(self.n))

    def det(self):
        return _gauss(self.rows())[0]

    def inverse(self):
        det, inv = _gauss(self.rows(), invert=True)
        if det == 0:
            raise DeterminantError("singular matrix")
        return RatMat.from_rows(inv)

    def denominator(self):
        return reduce(math.lcm, (x.denominator for x in self.entries), 1)

    def is_integral(self):
        return all(x.denominator == 1 for x in self.entries)

    def to_intmat(self):
        if not self.is_integral():
            raise ValueError("matrix is not integral")
        return IntMat(self.n, [int(x) for x in self.entries])

    def __eq__(self, other):
        if isinstance(other, IntMat):
            other = RatMat.of(other)
        return isinstance(other, RatMat) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"RatMat({[[str(x) for x in r] for r in self.rows()]})"


def _gauss(rows, invert=False):
    """Determinant, and the inverse when asked, by Gauss-Jordan over Q."""
    n = len(rows)
    a = [list(map(Fraction, r)) + ([Fraction(int(i == j)) for j in range(n)] if invert else [])
         for i, r in enumerate(rows)]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0), None
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        p = a[c][c]
        det *= p
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det, ([row[n:] for row in a] if invert else None)


# -- enveloping algebra -------------------------------------------------------------


class _Span:
    """Incremental row echelon form for vectors over Q."""

    def __init__(self):
        self.pivots = {}  # pivot column -> reduced row

    def reduce(self, vec):
        vec = list(vec)
        for col, row in self.pivots.items():
            if vec[col] != 0:
                f = vec[col]
                vec = [x - f * y for x, y in zip(vec, row)]
        return vec

    def add(self, vec):
        vec = self.reduce(vec)
        col = next((k for k, x in enumerate(vec) if x != 0), None)
        if col is None:
            return False
        p = vec[col]
        vec = [x / p for x in vec]
        for c, row in self.pivots.items():
            if row[col] != 0:
                f = row[col]
                self.pivots[c] = [x - f * y for x, y in zip(row, vec)]
        self.pivots[col] = vec
        return True

    def __len__(self):
        return len(self.pivots)


def rank_of(mats):
    span = _Span()
    for a in mats:
        span.add(RatMat.of(a).entries)
    return len(span)


def enveloping_basis(S):
    """A basis of the Q-span of <S> made of products of generators.

    Spinning: start from 1_n and multiply basis elements on the left by
    generators until the span stops growing.
    """
    gens = [RatMat.of(g) for g in S]
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    one = RatMat.identity(n)
    span = _Span()
    span.add(one.entries)
    basis = [one]
    k = 0
    while k < len(basis) and len(basis) < n * n:
        a = basis[k]
        k += 1
        for g in gens:
            b = g @ a
            if span.add(b.entries):
                basis.append(b)
                if len(basis) == n * n:
                    break
    if len(basis) < n * n:
        raise DegenerateAlgebraError(
            f"span has dimension {len(basis)} < {n * n}: not absolutely irreducible")
    return basis


def b_block(n, k, m):
    """diag(1, ..., [[1+m, m], [-m, 1-m]], ..., 1) in rows and columns k, k+1."""
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    i = k - 1
    rows[i][i], rows[i][i + 1] = 1 + m, m
    rows[i + 1][i], rows[i + 1][i + 1] = -m, 1 - m
    return IntMat.from_rows(rows)


def basis_from_level(n, m):
    """{1_n, t_ij(m), b_k(m)}: n^2 elements of Gamma_{n,m} spanning Mat(n, Q)."""
    from .exactmat import transvection

    if n < 2:
        raise ValueError("need n >= 2")
    out = [IntMat.identity(n)]
    out += [transvection(n, i, j, m) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    out += [b_block(n, k, m) for k in range(1, n)]
    return out


@dataclass
class CommonDenominator:
    d: int
    c: int
    gram_det: Fraction

    def to_json(self):
        return {"d": str(self.d), "c": str(self.c), "gram_det": str(self.gram_det)}


def common_denominator(S=None, basis=None):
    """d = c * det(tr(a_i a_j)) for a basis a_i of the enveloping algebra.

    Here c clears the denominators of the basis. The determinant is an
    integer for integral-trace groups; it is reported as a fraction so that
    unsuitable input is visible rather than rounded.
    """
    if basis is None:
        if S is None:
            raise ValueError("need generators or a basis")
        basis = enveloping_basis(S)
    basis = [RatMat.of(a) for a in basis]
    c = reduce(math.lcm, (a.denominator() for a in basis), 1)
    gram = [[(a @ b).trace() for b in basis] for a in basis]
    det = Matrix(gram).det()
    det = Fraction(int(det.p), int(det.q))
    if det == 0:
        raise DegenerateAlgebraError("trace form is degenerate on the given basis")
    value = c * abs(det)
    if value.denominator != 1:
        raise IntegralityError(f"trace Gram determinant {det} is not integral")
    return CommonDenominator(int(value), c, det)


# -- invariant lattices -----------------------------------------------------------


@dataclass
class LatticeBasis:
    """A full-rank lattice in Q^n, given by HNF columns over a common denominator."""

    columns: list
    denominator: int
    rounds: int = 0

    def matrix(self):
        return RatMat.from_columns(self.columns)

    def index_over_zn(self):
        """[L : Z^n] for L containing Z^n."""
        return abs(1 / self.matrix().det())

    def key(self):
        return tuple(self.columns)

    def is_invariant(self, S):
        g = self.matrix()
        gi = g.inverse()
        return all((gi @ RatMat.of(s) @ g).is_integral() for s in S)


def _hnf_lattice(vectors, n):
    den = reduce(math.lcm, (x.denominator for v in vectors for x in v), 1)
    cols = [[int(x * den) for x in v] for v in vectors]
    A = Matrix(n, len(cols), lambda i, j: cols[j][i])
    H = hermite_normal_form(A)
    if H.shape[1] != n:
        raise IntegralityError("lattice lost full rank")
    out = [tuple(Fraction(int(H[i, j]), den) for i in range(n)) for j in range(n)]
    den2 = reduce(math.lcm, (x.denominator for v in out for x in v), 1)
    return out, den2


def invariant_lattice(S, d=None, max_rounds=None):
    """The lattice spanned by <S> Z^n, by closure from Z^n.

    Each round replaces L by the lattice spanned by L, gL and g^-1 L over
    the generators g, updating after every generator. ``d``, if given,
    bounds the denominators: the closure must stay inside (1/d) Z^n.
    """
    gens = [RatMat.of(g) for g in S]
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    for g in gens:
        if g.det() != 1:
            raise DeterminantError("generators must have determinant 1")
        if g.trace().denominator != 1:
            raise IntegralityError(f"integrality not certified: trace {g.trace()} is not an integer")
    both = gens + [g.inverse() for g in gens]
    max_rounds = n * n + 2 if max_rounds is None else max_rounds
    cols = [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    den = 1
    for rounds in range(1, max_rounds + 1):
        before = cols
        for g in both:
            cols, den = _hnf_lattice(cols + [g.act(c) for c in cols], n)
            if d is not None and d % den:
                raise IntegralityError(
                    f"integrality not certified: denominator {den} does not divide d = {d}")
        if cols == before:
            return LatticeBasis(cols, den, rounds)
    raise IntegralityError(f"integrality not certified: no invariant lattice after {max_rounds} rounds")


def conjugate_into_slnz(S, d=None, max_rounds=None):
    """(g, [g^-1 s g]) with every conjugate in SL(n, Z)."""
    gens = [RatMat.of(s) for s in S]
    lattice = invariant_lattice(gens, d=d, max_rounds=max_rounds)
    g = lattice.matrix()
    gi = g.inverse()
    out = []
    for s in gens:
        c = gi @ s @ g
        if not c.is_integral():
            raise AssertionError("closure lattice is not invariant")
        out.append(c.to_intmat())
    return g, out


__all__ = [
    "RatMat", "LatticeBasis", "CommonDenominator", "IntegralityError",
    "DegenerateAlgebraError", "enveloping_basis", "basis_from_level", "b_block",
    "common_denominator", "invariant_lattice", "conjugate_into_slnz", "rank_of",
]
