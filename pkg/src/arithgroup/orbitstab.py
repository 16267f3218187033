"""Orbits and stabilizers of integer vectors under Gamma_n, Gamma_{n,m} and H.

Witnesses for Gamma_n and Gamma_{n,m} come with a transvection word: a list
of factors ``(i, j, a)`` whose left-to-right product is the matrix. Witnesses
for an arithmetic group H are ``HElement`` products of words over the input
generators and certified Gamma_{n,m} factors.

Within Hu, the Gamma_{n,m}-orbit ("block") of a vector w with <w> = aZ is
determined by w mod am, so block orbits are enumerated on residues mod am.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from . import _kernels
from ._unimodular import apply_ops_vector, auxiliary1, euclid_ops_z, unimodular_ops_zm
from .arithz import (
    GroupZ,
    HElement,
    decompose_transvections_z,
    gamma_m_generators,
    lift_det_one,
    sl_generators,
)
from .exactmat import (
    IntMat,
    block_embed,
    extended_gcd,
    transvection,
    transvection_product,
)
from .words import Word
from .zmgroup import LIMITS, ResourceLimitError, orbit_with_words, vector_stabilizer


@dataclass
class OrbitAnswer:
    """Outcome of an orbit query; ``word`` is a factor list or an HElement."""

    found: bool
    matrix: IntMat | None = None
    word: object = None

    def __bool__(self):
        return self.found


@dataclass
class StabGenerators:
    elements: list = field(default_factory=list)
    group: str = ""
    u: tuple = ()

    def matrices(self):
        return [x for x, _ in self.elements]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def _vec(u):
    return tuple(int(x) for x in u)


def _is_zero(u):
    return all(x == 0 for x in u)


def _gcd(u):
    return math.gcd(*u) if len(u) > 1 else abs(u[0])


def _factors_of_ops(ops):
    """Left-to-right factors of the matrix that applies ``ops`` in order."""
    return [op for op in reversed(ops)]


def _inverse_factors_of_ops(ops):
    return [(i, j, -a) for i, j, a in ops]


# -- Gamma_n ---------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _orbit1_ops(u):
    return euclid_ops_z(u)


def orbit1_gamma(u):
    """(d, t, factors): t in SL(n, Z) with t u = (d, 0, ..., 0), d = gcd(u) > 0."""
    u = _vec(u)
    if len(u) < 2:
        raise ValueError("need n >= 2")
    if _is_zero(u):
        raise ValueError("orbit1_gamma needs a nonzero vector")
    d, ops = _orbit1_ops(u)
    factors = _factors_of_ops(ops)
    return d, transvection_product(len(u), factors), factors


def orbit_gamma(u, v):
    """g in Gamma_n with g u = v, as t_2^-1 t_1."""
    u, v = _vec(u), _vec(v)
    if _is_zero(u) or _is_zero(v):
        raise ValueError("orbit_gamma needs nonzero vectors")
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    d1, ops1 = _orbit1_ops(u)
    d2, ops2 = _orbit1_ops(v)
    if d1 != d2:
        return OrbitAnswer(False)
    factors = _inverse_factors_of_ops(ops2) + _factors_of_ops(ops1)
    return OrbitAnswer(True, transvection_product(len(u), factors), factors)


# -- Z_m reduction and the Auxiliary procedures -------------------------------------


def reduce_unimodular_zm(u, m):
    """(g, factors) with g u = e_1 over Z_m, g a product of transvections."""
    n = len(u)
    ops = unimodular_ops_zm(list(u), m)
    factors = _factors_of_ops(ops)
    g = transvection_product(n, factors).reduce(m)
    return g, factors


def auxiliary2(u, v, I, m):
    """(g, factors) with g u = v, g = prod t_ji(m c_ji) over j not in I, i in I.

    Needs u_i = v_i for i in I and u_j = v_j mod m m' otherwise, where m' is
    the gcd of the u_i over I. Indices in I are 1-based.
    """
    u, v = _vec(u), _vec(v)
    n = len(u)
    I = sorted(set(I))
    if not I or I[0] < 1 or I[-1] > n:
        raise ValueError("index set out of range")
    for i in I:
        if u[i - 1] != v[i - 1]:
            raise ValueError(f"coordinate {i} must agree on the index set")
    mp, coeffs = extended_gcd([u[i - 1] for i in I])
    factors = []
    for j in range(1, n + 1):
        if j in I:
            continue
        diff = v[j - 1] - u[j - 1]
        if diff == 0:
            continue
        if mp == 0 or diff % (m * mp):
            raise ValueError(f"coordinate {j}: {diff} is not divisible by {m * mp}")
        q = diff // (m * mp)
        for i, c in zip(I, coeffs):
            if c:
                factors.append((j, i, m * q * c))
    return transvection_product(n, factors), factors


def _core_ops(w, m):
    """Operations in Gamma_{n,m} sending w (unimodular, w = e_1 mod m) to e_1."""
    n = len(w)
    u1 = w[0]
    r = 1 - u1
    if abs(u1) == 1:
        c = w[1]
    else:
        b = auxiliary1([x % abs(u1) for x in w[1:]], abs(u1))
        c = w[1] + r * sum(bi * wi for bi, wi in zip(b, w[2:]))
    mid = (u1, c) + tuple(w[2:])
    _, f1 = auxiliary2(w, mid, range(3, n + 1), m)
    _, f2 = auxiliary2(mid, (u1, c, r) + (0,) * (n - 3), (1, 2), m)
    # s3 = t13(-1) t31(-r) t21(-c) t13(1), acting right to left
    f3 = [(1, 3, -1), (3, 1, -r), (2, 1, -c), (1, 3, 1)]
    # s = s3 s2 s1; the factors of s1 and s2 commute among themselves
    return f3 + f2 + f1


def _core_n2(w, m):
    """h in Gamma_{2,m} with h w = e_1."""
    u1, u2 = w
    r, s = (u1 - 1) // m, u2 // m
    _, (x, y) = extended_gcd([u1, u2])
    return IntMat.from_rows([[1 - m * r * x, -m * r * y], [-m * s, 1 + m * r]])


def orbit_gamma_m(u, v, m):
    """g in Gamma_{n,m} with g u = v, or a negative answer.

    The criterion: <u> = <v> = aZ and u = v mod am. The witness is s^t, where
    t reduces v to (a, 0, ..., 0) and s carries t u / a to e_1.
    """
    u, v = _vec(u), _vec(v)
    n = len(u)
    if n != len(v):
        raise ValueError("dimension mismatch")
    if n < 2:
        raise ValueError("need n >= 2")
    if m < 1:
        raise ValueError("modulus must be positive")
    zu, zv = _is_zero(u), _is_zero(v)
    if zu or zv:
        if zu and zv:
            return OrbitAnswer(True, IntMat.identity(n), [])
        return OrbitAnswer(False)
    a = _gcd(v)
    if _gcd(u) != a:
        return OrbitAnswer(False)
    am = a * m
    if any((x - y) % am for x, y in zip(u, v)):
        return OrbitAnswer(False)
    _, ops = _orbit1_ops(v)
    w = tuple(x // a for x in apply_ops_vector(ops, u))
    t_inv = _inverse_factors_of_ops(ops)
    t_fwd = _factors_of_ops(ops)
    if n == 2:
        h = _core_n2(w, m)
        s_factors = decompose_transvections_z(h)
    else:
        s_factors = _core_ops(w, m)
    factors = t_inv + s_factors + t_fwd
    g = transvection_product(n, factors)
    return OrbitAnswer(True, g, factors)


# -- stabilizers in Gamma_n and Gamma_{n,m} ------------------------------------------


@lru_cache(maxsize=None)
def gamma2_generators(m):
    """Generators of Gamma_{2,m} by Schreier's lemma over SL(2, Z_m).

    The transversal is a breadth-first tree of SL(2, Z_m) under left
    multiplication by t_12(1) and [[0, 1], [-1, 0]].
    """
    if m < 2:
        return tuple(sl_generators(2))
    gens = sl_generators(2)
    mul = _kernels.mul_mod(2)
    reps = {(1, 0, 0, 1): IntMat.identity(2)}
    queue = [(1, 0, 0, 1)]
    out, seen = [], set()
    k = 0
    while k < len(queue):
        b = queue[k]
        k += 1
        tb = reps[b]
        for s in gens:
            q = mul(s.reduce(m).entries, b, m)
            cand = s @ tb
            if q not in reps:
                reps[q] = cand
                queue.append(q)
                continue
            x = reps[q].inverse() @ cand
            if not x.is_identity() and x not in seen:
                seen.add(x)
                out.append(x)
    return tuple(out)


def _gamma_generators(n, m):
    if m == 1:
        return list(sl_generators(n)) if n >= 2 else []
    if n == 1:
        return []
    if n == 2:
        return list(gamma2_generators(m))
    return list(gamma_m_generators(n, m).generators)


def _stab_elements(u, m):
    n = len(u)
    d, ops = _orbit1_ops(u)
    t = transvection_product(n, _factors_of_ops(ops))
    t_inv = t.inverse()
    inner = [block_embed(n, x, 1) for x in _gamma_generators(n - 1, m)]
    inner += [transvection(n, 1, j, m) for j in range(2, n + 1)]
    pre, post = _inverse_factors_of_ops(ops), _factors_of_ops(ops)
    out = []
    for x in inner:
        g = t_inv @ x @ t
        out.append((g, pre + decompose_transvections_z(x) + post))
    return out


def _stab_result(u, m, label):
    u = _vec(u)
    n = len(u)
    if n < 2:
        raise ValueError("need n >= 2")
    if _is_zero(u):
        els = [(g, decompose_transvections_z(g)) for g in _gamma_generators(n, m)]
        return StabGenerators(els, label, u)
    els = _stab_elements(u, m)
    for g, _ in els:
        if g.act(u) != u or (m > 1 and not g.is_congruent_identity(m)):
            raise AssertionError("stabilizer generator check failed")
    return StabGenerators(els, label, u)


def stab_gamma(u):
    """Generators of Stab_{Gamma_n}(u): t-conjugates of Lambda_n's generators."""
    return _stab_result(u, 1, "Gamma_n")


def stab_gamma_m(u, m):
    """Generators of Stab_{Gamma_{n,m}}(u)."""
    if m < 2:
        return stab_gamma(u)
    return _stab_result(u, m, f"Gamma_n,{m}")


# -- arithmetic groups --------------------------------------------------------------


def _small_lift(elem, m, x=None):
    """A small det-one representative of elem mod m, as (matrix, HElement).

    Any y = x mod m lies in H because Gamma_{n,m} <= H; the difference
    x^-1 y is kept as a certified Gamma_{n,m} segment.
    """
    x = elem.matrix() if x is None else x
    y = lift_det_one(x.reduce(m))
    if y == x:
        return x, elem
    gamma = x.inverse() @ y
    return y, elem * HElement.from_pcs(gamma, m, elem.generators)


class _BlockOrbit:
    """Orbit of the block of u under K, the preimage of Stab_{H_m}(u mod m).

    Transversal elements only matter modulo Gamma_{n,m}, which fixes every
    block, so each is replaced by a small lift of its image mod m.
    """

    def __init__(self, H, u, limits=None, schreier=False):
        limits = limits or LIMITS
        m = H.require_level()
        n = H.n
        self.u = u
        a = _gcd(u)
        self.am = am = a * m
        stab = vector_stabilizer(H.image(m), [x % m for x in u], limits=limits)
        lifts = []
        for w in stab.gen_words:
            x, e = _small_lift(HElement.from_word(w, m, H.generators), m)
            if not x.is_congruent_identity(m):
                lifts.append((x, e))
        act = _kernels.act_mod(n)
        start = tuple(x % am for x in u)
        one = HElement([], m, H.generators)
        # key -> (T, HElement of T) with T u in the block of key
        self.reps = {start: (IntMat.identity(n), one)}
        self.schreier = []
        queue = [start]
        k = 0
        while k < len(queue):
            p = queue[k]
            k += 1
            tp, ep = self.reps[p]
            for x, ex in lifts:
                q = act(x.entries, p, am)
                if q not in self.reps:
                    raw = x @ tp
                    y = lift_det_one(raw.reduce(m))
                    gamma = y @ raw.inverse()
                    ey = HElement.from_pcs(gamma, m, H.generators) * ex * ep
                    self.reps[q] = (y, ey)
                    queue.append(q)
                    if len(queue) > limits.orbit_cap:
                        raise ResourceLimitError("block orbit", len(queue), limits.orbit_cap)
                elif schreier:
                    tq, eq = self.reps[q]
                    h = tq.inverse() @ x @ tp
                    if not h.is_identity():
                        self.schreier.append((h, eq.inverse() * ex * ep))


def orbit_lengths(u, H: GroupZ, limits=None):
    """(|H_m u_m|, number of Gamma_{n,m}-blocks in the orbit of u under K)."""
    u = _vec(u)
    m = H.require_level()
    if _is_zero(u):
        return 1, 1
    l1 = len(orbit_with_words(H.image(m), [x % m for x in u], limits=limits))
    return l1, len(_BlockOrbit(H, u, limits).reps)


def orbit_h(u, v, H: GroupZ, limits=None):
    """h in H with h u = v, or a negative answer."""
    u, v = _vec(u), _vec(v)
    n = H.n
    if len(u) != n or len(v) != n:
        raise ValueError("dimension mismatch")
    m = H.require_level()
    zu, zv = _is_zero(u), _is_zero(v)
    if zu or zv:
        if zu and zv:
            return OrbitAnswer(True, IntMat.identity(n), HElement([], m, H.generators))
        return OrbitAnswer(False)
    if _gcd(u) != _gcd(v):
        return OrbitAnswer(False)
    words = orbit_with_words(H.image(m), [x % m for x in u], limits=limits)
    w1 = words.get(tuple(x % m for x in v))
    if w1 is None:
        return OrbitAnswer(False)
    x1, e1 = _small_lift(HElement.from_word(w1, m, H.generators), m)
    v1 = x1.inverse().act(v)
    blocks = _BlockOrbit(H, u, limits)
    entry = blocks.reps.get(tuple(x % blocks.am for x in v1))
    if entry is None:
        return OrbitAnswer(False)
    t, et = entry
    v2 = t.inverse().act(v1)
    g = orbit_gamma_m(u, v2, m)
    if not g.found:
        raise AssertionError("block keys disagree with the Gamma_m criterion")
    elem = e1 * et * HElement.from_pcs(g.matrix, m, H.generators)
    mat = x1 @ t @ g.matrix
    if mat.act(u) != v:
        raise AssertionError("orbit witness does not map u to v")
    return OrbitAnswer(True, mat, elem)


def stabilizer_h(u, H: GroupZ, limits=None):
    """Generators of Stab_H(u), each paired with an HElement."""
    u = _vec(u)
    n = H.n
    m = H.require_level()
    if len(u) != n:
        raise ValueError("dimension mismatch")
    if _is_zero(u):
        els = [(g, HElement.from_word(Word.gen(i), m, H.generators))
               for i, g in enumerate(H.generators)]
        return StabGenerators(els, H.label or "H", u)
    blocks = _BlockOrbit(H, u, limits, schreier=True)
    els, seen = [], set()
    for raw, eraw in blocks.schreier:
        # generators of L modulo Gamma_{n,m} suffice, so shrink h first
        h, eh = _small_lift(eraw, m, raw) if raw.max_abs() > m else (raw, eraw)
        if h.is_identity():
            continue
        ans = orbit_gamma_m(u, h.act(u), m)
        if not ans.found:
            raise AssertionError("Schreier generator left the block of u")
        gi = ans.matrix.inverse()
        x = gi @ h
        if x.is_identity() or x in seen:
            continue
        seen.add(x)
        els.append((x, HElement.from_pcs(gi, m, H.generators) * eh))
    for g, _ in stab_gamma_m(u, m):
        if g not in seen:
            seen.add(g)
            els.append((g, HElement.from_pcs(g, m, H.generators)))
    for x, _ in els:
        if x.act(u) != u:
            raise AssertionError("stabilizer generator does not fix u")
    return StabGenerators(els, H.label or "H", u)


__all__ = [
    "OrbitAnswer", "StabGenerators", "orbit1_gamma", "orbit_gamma", "auxiliary1",
    "reduce_unimodular_zm", "auxiliary2", "orbit_gamma_m", "gamma2_generators",
    "stab_gamma", "stab_gamma_m", "orbit_lengths", "orbit_h", "stabilizer_h",
]
