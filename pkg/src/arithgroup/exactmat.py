"""Exact linear algebra over Z and Z_m.

Matrices are square, stored row-major as flat tuples of Python ints, so
entries have arbitrary precision. Vectors are plain tuples of ints (column
convention: a matrix acts on the left, ``g.act(u)`` is ``g u``). Indices
passed to the matrix constructors follow the usual 1-based mathematical
convention; ``IntMat[i, j]`` item access is 0-based.

Conjugation is written ``x ** t`` only in docstrings and always means
``t^-1 x t``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce

from . import _kernels


class DeterminantError(ValueError):
    """A matrix does not have the determinant an operation requires."""


# -- small number theory ------------------------------------------------------


@lru_cache(maxsize=4096)
def factorize(m):
    """Prime factorization of m >= 1 as a sorted tuple of (p, k)."""
    from sympy import factorint

    if m < 1:
        raise ValueError(f"cannot factor {m}")
    return tuple(sorted(factorint(m).items()))


def format_factored(value):
    """Render a positive integer as ``2^35 * 3^11 * 7``."""
    if value == 1:
        return "1"
    parts = []
    for p, k in factorize(value):
        parts.append(f"{p}^{k}" if k > 1 else str(p))
    return " * ".join(parts)


def divisors(m):
    """Sorted list of the positive divisors of m."""
    divs = [1]
    for p, k in factorize(m):
        divs = [d * p**e for d in divs for e in range(k + 1)]
    return sorted(divs)


def valuation(a, p):
    """Exponent of the prime p in a != 0."""
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


def extended_gcd(values):
    """Return ``(g, coeffs)`` with ``g = gcd(values) >= 0`` and
    ``sum(c * v) == g``.

    >>> extended_gcd([4, 6])
    (2, [-1, 1])
    """
    values = list(values)
    if not values:
        raise ValueError("extended_gcd needs at least one value")
    g = 0
    coeffs = [0] * len(values)
    for idx, v in enumerate(values):
        if v == 0:
            continue
        if g == 0:
            g = abs(v)
            coeffs[idx] = 1 if v > 0 else -1
            continue
        if v % g == 0:
            continue
        # x*g + y*v = gcd(g, v); fold x into the earlier coefficients
        old_r, r = g, v
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        coeffs = [c * old_s for c in coeffs]
        coeffs[idx] = old_t
        g = old_r
    return g, coeffs


def crt_pair(r1, m1, r2, m2):
    """Solve x = r1 mod m1, x = r2 mod m2 for coprime moduli."""
    inv = pow(m1, -1, m2)
    return (r1 + m1 * ((r2 - r1) * inv % m2)) % (m1 * m2)


def is_unit(a, m):
    return math.gcd(a, m) == 1


def unit_group_generators(m):
    """A (not necessarily minimal) generating set of the unit group of Z_m."""
    if m <= 2:
        return []
    gens = []
    split = crt_split(m)
    for idx, (p, k) in enumerate(split.factors):
        q = p**k
        if p == 2:
            local = [] if k == 1 else ([q - 1] if k == 2 else [q - 1, 5])
        else:
            g = 2
            while not _is_primitive_root(g, p, k):
                g += 1
            local = [g]
        for a in local:
            comps = [1] * len(split.factors)
            comps[idx] = a
            gens.append(split.combine(comps))
    return gens


def _is_primitive_root(g, p, k):
    if g % p == 0:
        return False
    order = (p - 1) * p ** (k - 1)
    q = p**k
    for r, _ in factorize(order):
        if pow(g, order // r, q) == 1:
            return False
    return True


# -- determinants --------------------------------------------------------------


def bareiss_det(entries, n):
    """Fraction-free Gaussian elimination determinant of a flat integer matrix."""
    if n == 0:
        return 1
    a = [list(entries[i * n:(i + 1) * n]) for i in range(n)]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (akk * row_i[j] - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def _minor(entries, n, r, c):
    return tuple(entries[i * n + j] for i in range(n) if i != r for j in range(n) if j != c)


def cofactor_matrix(entries, n):
    """Flat matrix of cofactors; entry (i, j) is d det / d x_ij."""
    if n == 1:
        return (1,)
    return tuple(
        (-1) ** (i + j) * bareiss_det(_minor(entries, n, i, j), n - 1)
        for i in range(n)
        for j in range(n)
    )


def _inverse_prime_power(entries, n, q, p):
    """Gauss-Jordan inverse over the local ring Z_q, q a power of p."""
    a = [list(entries[i * n:(i + 1) * n]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if a[r][col] % p:
                pivot = r
                break
        if pivot is None:
            raise DeterminantError("matrix is not invertible")
        a[col], a[pivot] = a[pivot], a[col]
        inv = pow(a[col][col], -1, q)
        a[col] = [x * inv % q for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                row = a[col]
                a[r] = [(x - f * y) % q for x, y in zip(a[r], row)]
    return tuple(a[i][n + j] for i in range(n) for j in range(n))


def inverse_mod(entries, n, m):
    """Inverse of a flat residue matrix over Z_m, prime-power-wise."""
    result = None
    modulus = 1
    for p, k in factorize(m):
        q = p**k
        local = _inverse_prime_power([x % q for x in entries], n, q, p)
        if result is None:
            result, modulus = local, q
        else:
            result = tuple(crt_pair(x, modulus, y, q) for x, y in zip(result, local))
            modulus *= q
    return result


# -- matrices ------------------------------------------------------------------


class IntMat:
    """Square matrix over Z."""

    __slots__ = ("n", "entries")

    def __init__(self, n, entries):
        entries = tuple(int(x) for x in entries)
        if n < 1 or len(entries) != n * n:
            raise ValueError(f"expected {n * n} entries for a {n}x{n} matrix")
        self.n = n
        self.entries = entries

    @classmethod
    def from_rows(cls, rows):
        rows = [list(r) for r in rows]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        return cls(n, [x for r in rows for x in r])

    @classmethod
    def identity(cls, n):
        return cls(n, _kernels.identity(n))

    def rows(self):
        n = self.n
        return [list(self.entries[i * n:(i + 1) * n]) for i in range(n)]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.n + j]

    def __matmul__(self, other):
        if not isinstance(other, IntMat):
            return NotImplemented
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return IntMat(self.n, _kernels.mul_int(self.n)(self.entries, other.entries))

    def __pow__(self, k):
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        result = IntMat.identity(self.n)
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def act(self, vec):
        if len(vec) != self.n:
            raise ValueError("dimension mismatch")
        return _kernels.act_int(self.n)(self.entries, tuple(vec))

    def det(self):
        return bareiss_det(self.entries, self.n)

    def inverse(self):
        """Exact inverse; only defined for determinant +-1."""
        d = self.det()
        if d not in (1, -1):
            raise DeterminantError(f"determinant {d} is not a unit of Z")
        cof = cofactor_matrix(self.entries, self.n)
        n = self.n
        return IntMat(n, [d * cof[j * n + i] for i in range(n) for j in range(n)])

    def transpose(self):
        n = self.n
        return IntMat(n, [self.entries[j * n + i] for i in range(n) for j in range(n)])

    def conj(self, t):
        """``t^-1 self t``."""
        return t.inverse() @ self @ t

    def reduce(self, m):
        return ResMat(self.n, m, self.entries)

    def is_identity(self):
        return self.entries == _kernels.identity(self.n)

    def is_congruent_identity(self, m):
        ident = _kernels.identity(self.n)
        return all((x - y) % m == 0 for x, y in zip(self.entries, ident))

    def max_abs(self):
        return max(abs(x) for x in self.entries)

    def __eq__(self, other):
        return isinstance(other, IntMat) and self.entries == other.entries

    def __hash__(self):
        return hash(("IntMat", self.entries))

    def __repr__(self):
        return f"IntMat({self.rows()})"


class ResMat:
    """Square matrix over Z_m with entries normalized into [0, m)."""

    __slots__ = ("n", "m", "entries")

    def __init__(self, n, m, entries):
        if m < 2:
            raise ValueError(f"modulus must be >= 2, got {m}")
        entries = tuple(int(x) % m for x in entries)
        if n < 1 or len(entries) != n * n:
            raise ValueError(f"expected {n * n} entries for a {n}x{n} matrix")
        self.n = n
        self.m = m
        self.entries = entries

    @classmethod
    def _raw(cls, n, m, entries):
        obj = object.__new__(cls)
        obj.n, obj.m, obj.entries = n, m, entries
        return obj

    @classmethod
    def from_rows(cls, rows, m):
        return cls(len(rows), m, [x for r in rows for x in r])

    @classmethod
    def identity(cls, n, m):
        return cls._raw(n, m, _kernels.identity(n))

    def rows(self):
        n = self.n
        return [list(self.entries[i * n:(i + 1) * n]) for i in range(n)]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.n + j]

    def _check(self, other):
        if other.n != self.n or other.m != self.m:
            raise ValueError("dimension or modulus mismatch")

    def __matmul__(self, other):
        if not isinstance(other, ResMat):
            return NotImplemented
        self._check(other)
        return ResMat._raw(self.n, self.m, _kernels.mul_mod(self.n)(self.entries, other.entries, self.m))

    def __pow__(self, k):
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        result = ResMat.identity(self.n, self.m)
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def act(self, vec):
        return _kernels.act_mod(self.n)(self.entries, tuple(vec), self.m)

    def det(self):
        return bareiss_det(self.entries, self.n) % self.m

    def is_invertible(self):
        return is_unit(self.det(), self.m)

    def inverse(self):
        return ResMat._raw(self.n, self.m, inverse_mod(self.entries, self.n, self.m))

    def conj(self, t):
        return t.inverse() @ self @ t

    def reduce(self, m):
        if self.m % m:
            raise ValueError(f"{m} does not divide {self.m}")
        return ResMat(self.n, m, self.entries)

    def is_identity(self):
        return self.entries == _kernels.identity(self.n)

    def is_scalar(self):
        n, e = self.n, self.entries
        a = e[0]
        return all(e[i * n + j] == (a if i == j else 0) for i in range(n) for j in range(n))

    def lift(self):
        """Entrywise lift to [0, m) as an integer matrix."""
        return IntMat(self.n, self.entries)

    def __eq__(self, other):
        return isinstance(other, ResMat) and self.m == other.m and self.entries == other.entries

    def __hash__(self):
        return hash(("ResMat", self.m, self.entries))

    def __repr__(self):
        return f"ResMat({self.rows()}, m={self.m})"


# -- constructors ---------------------------------------------------------------


def _check_index(n, *idx):
    for i in idx:
        if not 1 <= i <= n:
            raise ValueError(f"index {i} out of range 1..{n}")


def transvection(n, i, j, a):
    """t_ij(a) = 1_n + a e_ij (1-based indices, i != j)."""
    _check_index(n, i, j)
    if i == j:
        raise ValueError("a transvection needs i != j")
    e = list(_kernels.identity(n))
    e[(i - 1) * n + (j - 1)] = a
    return IntMat(n, e)


def elementary(n, i, j, a):
    """e_ij(a): zero matrix with a at (i, j)."""
    _check_index(n, i, j)
    e = [0] * (n * n)
    e[(i - 1) * n + (j - 1)] = a
    return IntMat(n, e)


def transvection_product(n, factors):
    """Product of t_ij(a) over ``factors`` in left-to-right order."""
    cur = list(_kernels.identity(n))
    for i, j, a in factors:
        # right multiplication by t_ij(a): column j += a * column i
        i0, j0 = i - 1, j - 1
        for r in range(n):
            cur[r * n + j0] += a * cur[r * n + i0]
    return IntMat(n, cur)


def invert_transvections(factors):
    return [(i, j, -a) for i, j, a in reversed(factors)]


def permutation_matrix(n, k, l):
    """The matrix (k, l): 1_n with rows k and l swapped (det -1)."""
    _check_index(n, k, l)
    perm = list(range(n))
    perm[k - 1], perm[l - 1] = perm[l - 1], perm[k - 1]
    return IntMat(n, [1 if perm[i] == j else 0 for i in range(n) for j in range(n)])


def diagonal(values):
    n = len(values)
    return IntMat(n, [values[i] if i == j else 0 for i in range(n) for j in range(n)])


def diag_unit(n, j, a):
    """d_j(a) = 1_n + a e_jj."""
    _check_index(n, j)
    e = list(_kernels.identity(n))
    e[(j - 1) * (n + 1)] += a
    return IntMat(n, e)


def sigma_c(n, k):
    """c_k = 1_n - 2 e_kk - 2 e_{k+1,k+1} + e_{k+1,k}, 1 <= k < n."""
    if not 1 <= k < n:
        raise ValueError(f"c_k needs 1 <= k < {n}")
    e = list(_kernels.identity(n))
    e[(k - 1) * (n + 1)] = -1
    e[k * (n + 1)] = -1
    e[k * n + (k - 1)] = 1
    return IntMat(n, e)


def block_embed(n, inner, offset=1):
    """diag(1_offset, inner) as an n x n integer matrix."""
    k = inner.n
    if offset + k != n:
        raise ValueError("block does not fit")
    e = list(_kernels.identity(n))
    for i in range(k):
        for j in range(k):
            e[(i + offset) * n + (j + offset)] = inner.entries[i * k + j]
    return IntMat(n, e)


# -- reduction, lifting, CRT ------------------------------------------------------


def reduce_mod(x, m):
    """Congruence homomorphism: IntMat -> ResMat, or vector -> residue tuple."""
    if m < 2:
        raise ValueError(f"modulus must be >= 2, got {m}")
    if isinstance(x, (IntMat, ResMat)):
        if isinstance(x, ResMat) and x.m % m:
            raise ValueError(f"{m} does not divide {x.m}")
        return ResMat(x.n, m, x.entries)
    return tuple(int(a) % m for a in x)


def _sym(a, m):
    a %= m
    return a - m if a > m // 2 else a


def symmetric_lift(x, m=None):
    """Lift residues into (-m/2, m/2]."""
    if isinstance(x, ResMat):
        return IntMat(x.n, [_sym(a, x.m) for a in x.entries])
    if m is None:
        raise ValueError("vector lift needs the modulus")
    return tuple(_sym(a, m) for a in x)


def vector_ideal(vec, m=None):
    """Generator of the ideal spanned by the entries (a divisor of m over Z_m)."""
    g = reduce(math.gcd, (int(a) for a in vec), 0)
    if m is not None:
        g = math.gcd(g, m)
    return g


def is_unimodular(vec, m=None):
    return vector_ideal(vec, m) == 1


@dataclass(frozen=True)
class CrtSplit:
    """Chinese remainder splitting Z_m = Z_{p1^k1} x ... x Z_{pt^kt}."""

    modulus: int
    factors: tuple

    @property
    def moduli(self):
        return tuple(p**k for p, k in self.factors)

    def project(self, value):
        return tuple(value % q for q in self.moduli)

    def combine(self, values):
        if len(values) != len(self.factors):
            raise ValueError("component count does not match the splitting")
        x, mod = 0, 1
        for v, q in zip(values, self.moduli):
            x = crt_pair(x, mod, v % q, q)
            mod *= q
        return x

    def idempotent(self, idx):
        """The residue that is 1 at component idx and 0 elsewhere."""
        comps = [0] * len(self.factors)
        comps[idx] = 1
        return self.combine(comps)


def crt_split(m):
    if m < 2:
        raise ValueError(f"modulus must be >= 2, got {m}")
    return CrtSplit(m, factorize(m))


def crt_project(x, factor):
    """Component of a residue matrix at the prime power ``factor = (p, k)``."""
    p, k = factor
    q = p**k
    if x.m % q:
        raise ValueError(f"{q} does not divide {x.m}")
    return ResMat(x.n, q, x.entries)


def crt_combine(components):
    """Inverse of the CRT splitting on matrices."""
    components = list(components)
    if not components:
        raise ValueError("no components")
    n = components[0].n
    moduli = [c.m for c in components]
    for a in range(len(moduli)):
        for b in range(a + 1, len(moduli)):
            if math.gcd(moduli[a], moduli[b]) != 1:
                raise ValueError("component moduli are not coprime")
    entries = list(components[0].entries)
    mod = moduli[0]
    for comp in components[1:]:
        if comp.n != n:
            raise ValueError("dimension mismatch")
        entries = [crt_pair(x, mod, y, comp.m) for x, y in zip(entries, comp.entries)]
        mod *= comp.m
    return ResMat(n, mod, entries)


def det_and_adjugate(x):
    """Return ``(det x, X)`` with X the transposed adjugate (cofactor matrix)."""
    return x.det(), IntMat(x.n, cofactor_matrix(x.entries, x.n))


# -- file format -----------------------------------------------------------------


def _parse_entry(s):
    if isinstance(s, str) and "/" in s:
        return Fraction(s)
    return int(s)


def matrices_to_json(mats, mod=None):
    """Serialize matrices (IntMat, ResMat, or row lists) to the shared format."""
    mats = list(mats)
    if not mats:
        raise ValueError("no matrices to write")
    out_mats = []
    n = None
    for x in mats:
        rows = x.rows() if hasattr(x, "rows") else [list(r) for r in x]
        n = len(rows)
        out_mats.append([[str(a) for a in r] for r in rows])
        if mod is None and isinstance(x, ResMat):
            mod = x.m
    return {"n": n, "mod": mod, "mats": out_mats}


def matrices_from_json(data):
    """Return ``(n, mod, rows_list)`` where entries are ints or Fractions."""
    n = int(data["n"])
    mod = data.get("mod")
    mod = None if mod is None else int(mod)
    mats = []
    for rows in data["mats"]:
        parsed = [[_parse_entry(a) for a in r] for r in rows]
        if len(parsed) != n or any(len(r) != n for r in parsed):
            raise ValueError(f"matrix is not {n}x{n}")
        mats.append(parsed)
    return n, mod, mats


def vector_to_json(vec, mod=None):
    return {"n": len(vec), "mod": mod, "vec": [str(a) for a in vec]}


def vector_from_json(data):
    vec = tuple(int(a) for a in data["vec"])
    if len(vec) != int(data["n"]):
        raise ValueError("vector length does not match n")
    mod = data.get("mod")
    return vec, (None if mod is None else int(mod))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
