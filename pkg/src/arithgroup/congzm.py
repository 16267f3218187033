"""Congruence structure of GL(n, Z_m) and SL(n, Z_m).

Levels over Z_m are divisors d of m: the ideal dZ_m. The zero ideal is
encoded as d = m and the whole ring as d = 1, so "level 0" never needs a
special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import _kernels
from ._unimodular import unimodular_ops_zm
from .exactmat import (
    IntMat,
    ResMat,
    crt_split,
    diag_unit,
    diagonal,
    divisors,
    factorize,
    transvection,
    unit_group_generators,
    valuation,
)
from .zmgroup import GroupZm, scalar_subgroup, intersection_small

SL, GL = "SL", "GL"


def _check_flavor(flavor):
    if flavor not in (SL, GL):
        raise ValueError(f"flavor must be 'SL' or 'GL', got {flavor!r}")


# -- orders ------------------------------------------------------------------------


def gl_order_prime(n, p):
    r = 1
    for i in range(n):
        r *= p**n - p**i
    return r


def sl_order_prime(n, p):
    return gl_order_prime(n, p) // (p - 1)


def sl_order_formula(n, m):
    r = 1
    for p, k in factorize(m):
        r *= sl_order_prime(n, p) * p ** ((n * n - 1) * (k - 1))
    return r


def gl_order_formula(n, m):
    r = 1
    for p, k in factorize(m):
        r *= gl_order_prime(n, p) * p ** (n * n * (k - 1))
    return r


def filtration_order(n, p, k, i, flavor):
    """|N_{p,i}| or |M_{p,i}| inside SL/GL(n, Z_{p^k}); i = 0 is the full group."""
    _check_flavor(flavor)
    if i == 0:
        return sl_order_formula(n, p**k) if flavor == SL else gl_order_formula(n, p**k)
    e = n * n - 1 if flavor == SL else n * n
    return p ** (e * (k - i))


def pcs_order_formula(n, m, a, flavor=SL):
    if m % a:
        raise ValueError(f"{a} does not divide {m}")
    r = 1
    for p, k in factorize(m):
        r *= filtration_order(n, p, k, min(valuation(a, p), k), flavor)
    return r


# -- generating sets ---------------------------------------------------------------


def s_set(n, c):
    """S_c: transvections t_rs(c) and the 2x2 blocks [[1+c, c], [-c, 1-c]]."""
    gens = [transvection(n, r, s, c) for r in range(1, n + 1) for s in range(1, n + 1) if r != s]
    for u in range(n - 1):
        e = list(_kernels.identity(n))
        e[u * n + u] += c
        e[u * n + u + 1] += c
        e[(u + 1) * n + u] -= c
        e[(u + 1) * n + u + 1] -= c
        gens.append(IntMat(n, e))
    return gens


def t_set(n, c):
    """T_c: transvections t_rs(c) and d_1(c), ..., d_n(c)."""
    gens = [transvection(n, r, s, c) for r in range(1, n + 1) for s in range(1, n + 1) if r != s]
    gens += [diag_unit(n, j, c) for j in range(1, n + 1)]
    return gens


def sl_int_generators(n):
    """t_12(1) and the signed cyclic permutation matrix; they generate SL(n, Z)."""
    e = [0] * (n * n)
    for i in range(n - 1):
        e[i * n + i + 1] = 1
    e[(n - 1) * n] = (-1) ** (n - 1)
    return [transvection(n, 1, 2, 1), IntMat(n, e)]


def _local_full(n, q, flavor):
    gens = [g.reduce(q) for g in sl_int_generators(n)]
    if flavor == GL:
        gens += [diagonal([u] + [1] * (n - 1)).reduce(q) for u in unit_group_generators(q)]
    return gens


def _local_filtration(n, p, k, i, flavor):
    """Generators of N_{p,i} / M_{p,i} as residues mod p^k."""
    q = p**k
    if i >= k:
        return []
    if i == 0:
        return _local_full(n, q, flavor)
    c = p**i
    if flavor == SL:
        return [g.reduce(q) for g in s_set(n, c)]
    gens = [g.reduce(q) for g in t_set(n, c)]
    if p == 2 and k >= 3 and i == 1:
        gens.append(diagonal([-1] + [1] * (n - 1)).reduce(q))
    return gens


@dataclass
class FiltrationSubgroup:
    n: int
    p: int
    k: int
    i: int
    flavor: str
    generators: list

    def group(self):
        return GroupZm(self.n, self.p**self.k, self.generators or [], label=f"{self.flavor[0]}_{self.p},{self.i}")

    def expected_order(self):
        return filtration_order(self.n, self.p, self.k, self.i, self.flavor)


def filtration_subgroup(n, p, k, i, flavor=SL):
    """N_{p,i} (flavor SL) or M_{p,i} (flavor GL) in the group over Z_{p^k}."""
    _check_flavor(flavor)
    if not 1 <= i <= k:
        raise ValueError(f"filtration index {i} outside 1..{k}")
    return FiltrationSubgroup(n, p, k, i, flavor, _local_filtration(n, p, k, i, flavor))


@dataclass
class PcsDescriptorZm:
    n: int
    m: int
    level: int
    flavor: str
    generators: list
    _group: GroupZm | None = field(default=None, repr=False, compare=False)

    def group(self):
        if self._group is None:
            self._group = GroupZm(self.n, self.m, list(self.generators), label=f"PCS level {self.level}")
        return self._group

    def expected_order(self):
        return pcs_order_formula(self.n, self.m, self.level, self.flavor)

    def to_json(self):
        return {
            "n": self.n,
            "m": str(self.m),
            "level": str(self.level),
            "flavor": self.flavor,
            "generators": [[[str(x) for x in r] for r in g.rows()] for g in self.generators],
        }


def _embed(split, idx, local):
    """CRT-embed a local residue matrix as the identity at other components."""
    n = local.n
    ident = _kernels.identity(n)
    comps = [ident] * len(split.factors)
    comps[idx] = local.entries
    entries = [split.combine([c[t] for c in comps]) for t in range(n * n)]
    return ResMat(n, split.modulus, entries)


def pcs_generators_zm(n, m, a, flavor=SL):
    """Generators of the principal congruence subgroup of level a.

    p-group components are paired index by index across primes (their orders
    are coprime); full SL/GL components, where a is a unit locally, are
    embedded separately.
    """
    _check_flavor(flavor)
    if m % a:
        raise ValueError(f"{a} does not divide {m}")
    if a == m:
        return PcsDescriptorZm(n, m, a, flavor, [ResMat.identity(n, m)])
    if a == 1:
        return PcsDescriptorZm(n, m, 1, flavor, _local_full(n, m, flavor))
    split = crt_split(m)
    paired = []
    full = []
    for idx, (p, k) in enumerate(split.factors):
        j = min(valuation(a, p), k)
        if j == k:
            continue
        local = _local_filtration(n, p, k, j, flavor)
        if j == 0:
            full.extend(_embed(split, idx, g) for g in local)
        else:
            paired.append((idx, local))
    gens = []
    width = max((len(loc) for _, loc in paired), default=0)
    ident = _kernels.identity(n)
    for t in range(width):
        comps = [ident] * len(split.factors)
        for idx, local in paired:
            if t < len(local):
                comps[idx] = local[t].entries
        gens.append(ResMat(n, m, [split.combine([c[e] for c in comps]) for e in range(n * n)]))
    return PcsDescriptorZm(n, m, a, flavor, gens + full)


# -- levels ------------------------------------------------------------------------


def _level_gcd(mats, g):
    for x in mats:
        n = x.n
        e = x.entries
        for i in range(n):
            for j in range(n):
                if i != j:
                    g = math.gcd(g, e[i * n + j])
            if i:
                g = math.gcd(g, e[i * n + i] - e[0])
        if g == 1:
            break
    return g


def level_zm(S, m=None):
    """Divisor d of m generating the level ideal of the matrices S."""
    mats = list(S.generators) if isinstance(S, GroupZm) else list(S)
    if not mats:
        raise ValueError("no generators")
    moduli = {x.m for x in mats}
    if len(moduli) != 1:
        raise ValueError(f"mixed moduli {sorted(moduli)}")
    mod = moduli.pop()
    if m is not None and m != mod:
        raise ValueError("modulus mismatch")
    return _level_gcd(mats, mod)


# -- maximal PCS / subnormality ---------------------------------------------------


def _contains_all(G, gens):
    chain = G.chain()
    return all(chain.contains(g.entries) for g in gens)


def max_pcs_zm(G):
    """The maximal PCS of SL(n, Z_m) contained in G, as a descriptor."""
    n, m = G.n, G.m
    l = level_zm(G)
    for a in divisors(m):
        if a % l:
            continue
        desc = pcs_generators_zm(n, m, a, SL)
        if _contains_all(G, desc.generators):
            return desc
    raise AssertionError("the trivial PCS is always contained")


def is_special_linear_zm(G):
    return max_pcs_zm(G).level == 1


def least_exponent(l2, l1):
    """Least e >= 0 with l2 | l1^e, or None."""
    if any(l1 % p for p, _ in factorize(l2)):
        return None
    e = 0
    power = 1
    while power % l2:
        power *= l1
        e += 1
    return e


DEFECT_NOTE = ("bound for the defect in GL(n); the defect in SL(n) is equal to "
               "this or one less")


@dataclass
class SubnormalCertificate:
    l1: int
    l2: int
    subnormal: bool
    e_prime: int | None
    defect_bound: int | None
    modulus: int | None = None
    note: str = DEFECT_NOTE

    def to_json(self):
        out = {
            "l1": str(self.l1),
            "l2": str(self.l2),
            "verdict": self.subnormal,
            "e_prime": None if self.e_prime is None else str(self.e_prime),
            "defect_bound": None if self.defect_bound is None else str(self.defect_bound),
            "note": self.note,
        }
        if self.modulus is not None:
            out["mod"] = str(self.modulus)
        return out


def subnormal_certificate(l1, l2, modulus=None):
    e = least_exponent(l2, l1)
    if e is None:
        return SubnormalCertificate(l1, l2, False, None, None, modulus)
    return SubnormalCertificate(l1, l2, True, e, e + 1, modulus)


def is_subnormal_zm(G):
    return subnormal_certificate(level_zm(G), max_pcs_zm(G).level, G.m)


def is_normal_zm(G):
    return level_zm(G) == max_pcs_zm(G).level


def normal_closure_level(G):
    """Normal closure of G in GL(n, Z_m): G together with the PCS of level l(G)."""
    l = level_zm(G)
    extra = pcs_generators_zm(G.n, G.m, l, SL).generators
    return GroupZm(G.n, G.m, list(G.generators) + list(extra), label="normal closure")


# -- normal subgroups -------------------------------------------------------------


def _subgroups_of_units(elements, l):
    """All subgroups of a finite group of units mod l, as sorted tuples."""
    elements = sorted(set(elements))

    def close(gens):
        group = {1 % l}
        frontier = [1 % l]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = x * g % l
                if y not in group:
                    group.add(y)
                    frontier.append(y)
        return frozenset(group)

    subs = {close([])}
    frontier = list(subs)
    while frontier:
        nxt = []
        for s in frontier:
            for a in elements:
                if a not in s:
                    t = close(list(s) + [a])
                    if t not in subs:
                        subs.add(t)
                        nxt.append(t)
        frontier = nxt
    return sorted((tuple(sorted(s)) for s in subs), key=lambda s: (len(s), s))


@dataclass
class NormalSubgroupZm:
    """Full preimage in G of a scalar subgroup mod l."""

    level: int
    scalars: tuple
    generators: list

    def group(self, n, m):
        return GroupZm(n, m, list(self.generators), label=f"normal level {self.level}")


def _kernel_generators(G, l):
    """Generators of the kernel of reduction mod l restricted to G."""
    n, m = G.n, G.m
    pcs = pcs_generators_zm(n, m, l, SL).generators
    if all(g.det() == 1 for g in G.generators):
        return list(pcs)
    gl_kernel = pcs_generators_zm(n, m, l, GL).group()
    return list(intersection_small(G, gl_kernel).generators)


def normal_subgroups_zm(G, l):
    """Normal subgroups of GL(n, Z_m) inside G of level l (l | m)."""
    n, m = G.n, G.m
    if m % l:
        raise ValueError(f"{l} does not divide {m}")
    r = max_pcs_zm(G).level
    if l % r:
        return []
    if l == 1:
        return [NormalSubgroupZm(1, (), list(G.generators))]
    reduced = GroupZm(n, l, [ResMat(n, l, g.entries) for g in G.generators])
    scalars = scalar_subgroup(reduced)
    kernel = _kernel_generators(G, l)
    out = []
    for sub in _subgroups_of_units(scalars, l):
        gens = list(kernel)
        for a in sub:
            if a == 1 % l:
                continue
            x = ResMat(n, l, [a if i == j else 0 for i in range(n) for j in range(n)])
            w = reduced.chain().word_of(x.entries)
            gens.append(G.evaluate(w))
        out.append(NormalSubgroupZm(l, sub, gens))
    return out


# -- transvection decomposition --------------------------------------------------


def _apply_left(ops, rows, m):
    for i, j, a in ops:
        ri, rj = rows[i - 1], rows[j - 1]
        rows[i - 1] = [(x + a * y) % m for x, y in zip(ri, rj)]


def decompose_transvections_zm(b):
    """Transvections (i, j, a) whose product, left to right, is b over Z_m."""
    n, m = b.n, b.m
    if b.det() != 1 % m:
        raise ValueError("matrix does not have determinant 1")
    rows = b.rows()
    lefts, rights = [], []
    for c in range(n - 1):
        col = [rows[r][c] for r in range(c, n)]
        ops = unimodular_ops_zm(col, m, offset=c)
        _apply_left(ops, rows, m)
        lefts.extend(ops)
        for j in range(c + 1, n):
            a = rows[c][j]
            if a:
                rights.append((c + 1, j + 1, -a % m))
                for r in range(n):
                    rows[r][j] = (rows[r][j] - a * rows[r][c]) % m
    # b = L_1^-1 ... L_k^-1 R_s^-1 ... R_1^-1
    out = [(i, j, -a % m) for i, j, a in lefts]
    out += [(i, j, -a % m) for i, j, a in reversed(rights)]
    return [f for f in out if f[2] % m]
