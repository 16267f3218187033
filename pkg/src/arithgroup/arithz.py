"""Arithmetic subgroups H of SL(n, Z), n >= 3, with a known congruence level.

A ``GroupZ`` carries generators S and a certified level m with
Gamma_{n,m} <= <S>. Every question about H then reduces to the finite image
phi_m(H) in SL(n, Z_m), handled by the stabilizer-chain engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

from . import _kernels
from ._unimodular import euclid_ops_z
from .congzm import (
    SubnormalCertificate,
    max_pcs_zm,
    normal_subgroups_zm,
    sl_int_generators,
    subnormal_certificate,
)
from .exactmat import (
    DeterminantError,
    IntMat,
    cofactor_matrix,
    diagonal,
    extended_gcd,
    permutation_matrix,
    sigma_c,
    symmetric_lift,
    transvection,
    transvection_product,
)
from .words import Word
from .zmgroup import GroupZm, index_in_sl, intersection_small, normalizer_small


@dataclass
class GroupZ:
    """H = <S> <= SL(n, Z) with Gamma_{n, certified_level} <= H."""

    n: int
    generators: list
    certified_level: int | None
    label: str | None = None
    _images: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        gens = [g if isinstance(g, IntMat) else IntMat.from_rows(g) for g in self.generators]
        for g in gens:
            if g.n != self.n:
                raise ValueError("generator has the wrong dimension")
            if g.det() != 1:
                raise DeterminantError(f"generator {g.rows()} does not have determinant 1")
        self.generators = gens
        if self.certified_level is not None and self.certified_level < 2:
            raise ValueError("certified level must be at least 2")

    def require_level(self):
        if self.certified_level is None:
            raise ValueError("this operation needs a certified congruence level")
        return self.certified_level

    def image(self, m=None):
        """phi_m(H) as a group over Z_m (cached per modulus)."""
        m = self.require_level() if m is None else m
        if m not in self._images:
            self._images[m] = GroupZm(self.n, m, [g.reduce(m) for g in self.generators],
                                      label=self.label)
        return self._images[m]

    def evaluate(self, word):
        return evaluate_int(word, self.generators)


def evaluate_int(word, gens):
    n = gens[0].n
    mul = _kernels.mul_int(n)
    flat = [g.entries for g in gens]
    val = word.evaluate(flat, mul, _kernels.identity(n),
                        invert=lambda a: IntMat(n, a).inverse().entries)
    return IntMat(n, val)


# -- standard generators ---------------------------------------------------------


def sl_generators(n):
    """t_12 and the block matrix [[0, 1_{n-1}], [(-1)^{n-1}, 0]]."""
    return sl_int_generators(n)


def gl_generators(n):
    return sl_int_generators(n) + [diagonal([-1] + [1] * (n - 1))]


def sigma_elements(n):
    """The conjugators: ("1",), ("perm", k, l) and ("c", k) with their matrices."""
    out = [(("1",), IntMat.identity(n))]
    out += [(("perm", k, l), permutation_matrix(n, k, l))
            for k in range(1, n + 1) for l in range(k + 1, n + 1)]
    out += [(("c", k), sigma_c(n, k)) for k in range(1, n)]
    return out


def gamma_m_generators(n, m):
    """{t_ij(m)^g : i < j, g in Sigma}, a generating set of Gamma_{n,m}."""
    if n < 3:
        raise ValueError("this generating set needs n >= 3")
    gens = []
    for _, g in sigma_elements(n):
        gi = g.inverse()
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                gens.append(gi @ transvection(n, i, j, m) @ g)
    return GroupZ(n, gens, m if m >= 2 else None, label=f"Gamma_{n},{m}")


def elementary_pairs(n):
    return [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]


def elementary_generators(n, m):
    """E_{n,m} = <t_ij(m)>, certified at level m^2."""
    if n < 3:
        raise ValueError("certification needs n >= 3")
    gens = [transvection(n, i, j, m) for i, j in elementary_pairs(n)]
    return GroupZ(n, gens, m * m, label=f"E_{n},{m}")


def excellent_word(n, m, i, j, conjugator):
    """Word in p_kl = t_kl(m) equal to t_ij(m^2)^g for g in Sigma.

    Generator indices follow ``elementary_pairs(n)``. ``conjugator`` is one of
    ("1",), ("perm", k, l), ("c", l).
    """
    if not 1 <= i < j <= n:
        raise ValueError("need 1 <= i < j <= n")
    index = {pair: idx for idx, pair in enumerate(elementary_pairs(n))}

    def p(a, b, e=1):
        return Word.gen(index[(a, b)], e)

    def comm(x, y):
        return x.inverse() * y.inverse() * x * y

    kind = conjugator[0]
    if kind == "1":
        return p(i, j, m)
    if kind == "perm":
        k, l = conjugator[1], conjugator[2]
        if not 1 <= k < l <= n:
            raise ValueError(f"invalid permutation {conjugator!r}")
        swap = {k: l, l: k}
        return p(swap.get(i, i), swap.get(j, j), m)
    if kind != "c" or not 1 <= conjugator[1] < n:
        raise ValueError(f"invalid conjugator {conjugator!r}")
    l = conjugator[1]
    if l == i and j == i + 1:
        a = next(x for x in range(1, n + 1) if x not in (i, i + 1))
        return comm(p(a, j, -1) * p(a, i), p(j, a) * p(i, a))
    if l == i:
        return p(i + 1, j, -(m - 1)) * p(i, i + 1) * p(i + 1, j, -1) * p(i, i + 1, -1)
    if l == i - 1:
        return comm(p(i, i - 1, -1), p(i - 1, j))
    if l == j - 1:
        return p(j - 1, j) * p(i, j - 1) * p(j - 1, j, -1) * p(i, j - 1, m - 1)
    if l == j:
        return comm(p(j + 1, j), p(i, j + 1))
    # c_l commutes with t_ij(m^2) when l, l+1 are not in {i, j}
    return p(i, j, m)


def conjugator_matrix(n, conjugator):
    for desc, g in sigma_elements(n):
        if desc == tuple(conjugator):
            return g
    raise ValueError(f"invalid conjugator {conjugator!r}")


# -- levels, PCS, membership ------------------------------------------------------


def level_z(S):
    """Nonnegative generator of the level ideal; 0 iff every matrix is scalar."""
    mats = S.generators if isinstance(S, GroupZ) else list(S)
    g = 0
    for x in mats:
        n, e = x.n, x.entries
        for i in range(n):
            for j in range(n):
                if i != j:
                    g = math.gcd(g, e[i * n + j])
            if i:
                g = math.gcd(g, e[i * n + i] - e[0])
    return g


def _pcs_group(n, r):
    if r == 1:
        return GroupZ(n, sl_generators(n), 2, label=f"SL({n},Z)")
    return gamma_m_generators(n, r)


def max_pcs_z(H):
    """(r, generators of Gamma_{n,r}) for the maximal PCS of H."""
    H.require_level()
    r = max_pcs_zm(H.image()).level
    return r, _pcs_group(H.n, r)


class HElement:
    """An element of H as a product of segments.

    Each segment is either ``("word", w)``, a word over the generators S, or
    ``("pcs", x)``, an integer matrix in Gamma_{n,m} certified by det = 1 and
    x = 1 mod m. Since Gamma_{n,m} <= H, every product of segments lies in H.
    """

    __slots__ = ("segments", "level", "generators", "_matrix")

    def __init__(self, segments, level, generators):
        self.segments = [seg for seg in segments if not _trivial_segment(seg)]
        self.level = level
        self.generators = generators
        self._matrix = None

    @classmethod
    def from_word(cls, word, level, generators):
        return cls([("word", word)], level, generators)

    @classmethod
    def from_pcs(cls, x, level, generators):
        return cls([("pcs", x)], level, generators)

    def __mul__(self, other):
        return HElement(self.segments + other.segments, self.level, self.generators)

    def inverse(self):
        segs = []
        for kind, val in reversed(self.segments):
            segs.append((kind, val.inverse()))
        return HElement(segs, self.level, self.generators)

    @property
    def word(self):
        """Product of the word segments (exact when there is a single one)."""
        return Word.product([v for k, v in self.segments if k == "word"])

    @property
    def residual(self):
        pcs = [v for k, v in self.segments if k == "pcs"]
        out = IntMat.identity(self.generators[0].n)
        for x in pcs:
            out = out @ x
        return out

    def matrix(self):
        if self._matrix is None:
            n = self.generators[0].n
            out = IntMat.identity(n)
            for kind, val in self.segments:
                out = out @ (evaluate_int(val, self.generators) if kind == "word" else val)
            self._matrix = out
        return self._matrix

    def pcs_certified(self):
        return all(v.det() == 1 and v.is_congruent_identity(self.level)
                   for k, v in self.segments if k == "pcs")

    def verify(self, x=None):
        if not self.pcs_certified():
            return False
        return x is None or self.matrix() == x

    def residual_transvections(self):
        return decompose_transvections_z(self.residual)

    def to_json(self):
        out = []
        for kind, val in self.segments:
            if kind == "word":
                out.append({"word": val.to_slp()})
            else:
                out.append({"pcs": [[str(a) for a in r] for r in val.rows()]})
        return {"level": str(self.level), "segments": out}

    def __repr__(self):
        return f"HElement({[k for k, _ in self.segments]})"


def _trivial_segment(seg):
    kind, val = seg
    if kind == "word":
        return val.is_identity_word()
    return val.is_identity()


def is_member_z(H, x):
    """HElement witnessing x in H, or None."""
    m = H.require_level()
    if x.det() != 1:
        raise DeterminantError("membership is defined for SL(n, Z) elements")
    w = H.image().chain().word_of(x.reduce(m).entries)
    if w is None:
        return None
    value = H.evaluate(w)
    residual = value.inverse() @ x
    elem = HElement([("word", w), ("pcs", residual)], m, H.generators)
    if not elem.pcs_certified():
        raise AssertionError("residual is not in the principal congruence subgroup")
    return elem


def index_z(H):
    return index_in_sl(H.image())


def is_subgroup_z(H, L):
    """True iff <L's generators> <= H."""
    m = H.require_level()
    chain = H.image().chain()
    return all(chain.contains(g.reduce(m).entries) for g in L.generators)


def intersect_z(H1, H2):
    l = math.lcm(H1.require_level(), H2.require_level())
    inter = intersection_small(H1.image(l), H2.image(l))
    lifts = [lift_det_one(g) for g in inter.generators if not g.is_identity()]
    gens = lifts + gamma_m_generators(H1.n, l).generators
    return GroupZ(H1.n, gens, l, label="intersection")


def is_subnormal_z(H):
    l1 = level_z(H)
    if l1 == 0:
        return SubnormalCertificate(0, 0, True, 0, 1)
    r, _ = max_pcs_z(H)
    return subnormal_certificate(l1, r)


def is_normal_z(H):
    r, _ = max_pcs_z(H)
    return level_z(H) == r


@dataclass
class NormalClosureZ:
    group: GroupZ
    level: int
    scalar: bool = False


def normal_closure_z(n, S):
    """<S, Gamma_{n,l}> with l the level of S; no certified level needed."""
    S = [g if isinstance(g, IntMat) else IntMat.from_rows(g) for g in S]
    l = level_z(S)
    if l == 0:
        return NormalClosureZ(GroupZ(n, S, None, label="scalar"), 0, scalar=True)
    if l == 1:
        return NormalClosureZ(GroupZ(n, S + sl_generators(n), 2, label="normal closure"), 1)
    return NormalClosureZ(GroupZ(n, S + gamma_m_generators(n, l).generators, l,
                                 label="normal closure"), l)


@dataclass
class NormalSubgroupZ:
    level: int
    scalars: tuple
    group: GroupZ


def normal_subgroups_z(H, l):
    """Normal subgroups of GL(n, Z) inside H of level l."""
    m = H.require_level()
    M = math.lcm(m, l)
    out = []
    for desc in normal_subgroups_zm(H.image(M), l):
        pcs = _pcs_group(H.n, l)
        lifts = []
        if l > 1:
            pcs_images = {g.reduce(M).entries for g in pcs.generators}
            for g in desc.generators:
                if g.entries in pcs_images or g.is_identity():
                    continue
                if g.reduce(l).is_scalar() and g.reduce(l).entries[0] != 1 % l:
                    lifts.append(lift_det_one(g))
        level = l if l >= 2 else 2
        group = GroupZ(H.n, pcs.generators + lifts, level if l > 1 else pcs.certified_level,
                       label=f"normal subgroup level {l}")
        out.append(NormalSubgroupZ(l, desc.scalars, group))
    return out


def normalizer_z(H):
    """N_{SL(n,Z)}(H) via the normalizer of phi_m(H) in SL(n, Z_m)."""
    m = H.require_level()
    ambient = GroupZm(H.n, m, [g.reduce(m) for g in sl_generators(H.n)])
    norm = normalizer_small(ambient, H.image())
    lifts = [lift_det_one(g) for g in norm.generators if not g.is_identity()]
    return GroupZ(H.n, lifts + gamma_m_generators(H.n, m).generators, m, label="normalizer")


def pcs_level_bound(r):
    """l^2 with l = lcm(1..r): Gamma_{n,l^2} <= H whenever |SL(n,Z) : H| <= r."""
    if r < 1:
        raise ValueError("index bound must be positive")
    l = reduce(math.lcm, range(1, r + 1), 1)
    return l * l


# -- transvections and lifting ----------------------------------------------------


def decompose_transvections_z(g):
    """Transvections (i, j, a) whose left-to-right product is g over Z."""
    n = g.n
    if g.det() != 1:
        raise DeterminantError("matrix does not have determinant 1")
    rows = g.rows()
    lefts, rights = [], []
    for c in range(n - 1):
        d, ops = euclid_ops_z([rows[r][c] for r in range(c, n)], offset=c)
        for i, j, a in ops:
            rows[i - 1] = [x + a * y for x, y in zip(rows[i - 1], rows[j - 1])]
        lefts.extend(ops)
        if d != 1:
            raise AssertionError("column gcd of a determinant-one matrix must be 1")
        for j in range(c + 1, n):
            a = rows[c][j]
            if a:
                rights.append((c + 1, j + 1, -a))
                for r in range(n):
                    rows[r][j] -= a * rows[r][c]
    out = [(i, j, -a) for i, j, a in lefts]
    out += [(i, j, -a) for i, j, a in reversed(rights)]
    return [f for f in out if f[2]]


@dataclass
class LiftInfo:
    matrix: IntMat
    strategy: str
    steps: int
    max_abs: int


def _adjugate_steps(c, m, max_steps):
    """Greedy det correction by adding multiples of m to off-diagonal entries."""
    n = c.n
    e = list(c.entries)
    steps = 0
    det = c.det()
    while det != 1 and steps < max_steps:
        k = (det - 1) // m
        X = cofactor_matrix(tuple(e), n)
        best = None
        for i in range(n):
            for j in range(n):
                x = X[i * n + j]
                if i == j or x == 0:
                    continue
                a = -_round_div(k, x)
                newk = k + a * x
                if a and abs(newk) < abs(k) and (best is None or abs(newk) < abs(best[0])):
                    best = (newk, i, j, a)
        if best is None:
            # gcd of two cofactors in one row or column, applied jointly
            best = _gcd_pair_step(X, n, k)
            if best is None:
                break
            newk, updates = best
            for idx, a in updates:
                e[idx] += a * m
        else:
            newk, i, j, a = best
            e[i * n + j] += a * m
        steps += 1
        det = 1 + newk * m
    return IntMat(n, e), det == 1, steps


def _round_div(a, b):
    """Nearest integer to a / b, exactly."""
    if b < 0:
        a, b = -a, -b
    return (2 * a + b) // (2 * b)


def _gcd_pair_step(X, n, k):
    best = None
    lines = [[(i, j) for j in range(n)] for i in range(n)] + [[(i, j) for i in range(n)] for j in range(n)]
    for line in lines:
        for s in range(len(line)):
            for t in range(s + 1, len(line)):
                (i1, j1), (i2, j2) = line[s], line[t]
                if i1 == j1 or i2 == j2:
                    continue
                x1, x2 = X[i1 * n + j1], X[i2 * n + j2]
                g, (a1, a2) = extended_gcd([x1, x2])
                if g == 0:
                    continue
                q = -_round_div(k, g)
                newk = k + q * g
                if q and abs(newk) < abs(k) and (best is None or abs(newk) < abs(best[0])):
                    best = (newk, [(i1 * n + j1, q * a1), (i2 * n + j2, q * a2)])
    return best


def lift_det_one_info(b, max_steps=None):
    """Lift b in SL(n, Z_m) to SL(n, Z), reporting the strategy used."""
    n, m = b.n, b.m
    if b.det() != 1 % m:
        raise DeterminantError("residue matrix does not have determinant 1")
    c = symmetric_lift(b)
    if c.det() == 1:
        return LiftInfo(c, "symmetric", 0, c.max_abs())
    max_steps = 4 * n * n if max_steps is None else max_steps
    c2, ok, steps = _adjugate_steps(c, m, max_steps)
    if ok:
        return LiftInfo(c2, "adjugate", steps, c2.max_abs())
    from .congzm import decompose_transvections_zm

    factors = decompose_transvections_zm(b)
    lifted = transvection_product(n, [(i, j, _centered(a, m)) for i, j, a in factors])
    return LiftInfo(lifted, "transvections", len(factors), lifted.max_abs())


def _centered(a, m):
    a %= m
    return a - m if a > m // 2 else a


def lift_det_one(b):
    return lift_det_one_info(b).matrix


__all__ = [
    "GroupZ", "HElement", "NormalClosureZ", "NormalSubgroupZ", "LiftInfo",
    "sl_generators", "gl_generators", "sigma_elements", "gamma_m_generators",
    "elementary_pairs", "elementary_generators", "excellent_word", "conjugator_matrix",
    "level_z", "max_pcs_z", "is_member_z", "index_z", "is_subgroup_z", "intersect_z",
    "is_subnormal_z", "is_normal_z", "normal_closure_z", "normal_subgroups_z",
    "normalizer_z", "pcs_level_bound", "decompose_transvections_z", "lift_det_one",
    "lift_det_one_info", "evaluate_int",
]
