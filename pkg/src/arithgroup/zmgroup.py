"""Finite matrix groups over Z_m via stabilizer chains.

The engine is a deterministic incremental Schreier-Sims on the natural action
of a group of invertible n x n matrices over Z_m on column vectors Z_m^n.

Base points are CRT-adapted: for each prime power q || m and each i, the
point that is e_i modulo q and 0 modulo m/q. Pointwise stabilizers of these
vectors are trivial, and each orbit lives inside a single prime-power
component, so orbit sizes stay at the q^n scale even when m is composite. A
single chain over Z_m also handles subdirect products of the components
correctly, which building independent per-component chains would not.

Every transversal element and strong generator carries a ``Word`` over the
group's generators.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

from . import _kernels
from .exactmat import ResMat, crt_split, inverse_mod, unit_group_generators
from .words import Word, words_from_slp, words_to_slp

DEFAULT_ORBIT_CAP = 50_000_000
DEFAULT_ENUM_CAP = 10_000_000


class ResourceLimitError(RuntimeError):
    """A configured orbit or enumeration budget would be exceeded."""

    def __init__(self, what, size, cap):
        super().__init__(f"{what} of size {size} exceeds the cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


@dataclass
class Limits:
    orbit_cap: int = DEFAULT_ORBIT_CAP
    enum_cap: int = DEFAULT_ENUM_CAP

    @classmethod
    def from_env(cls):
        return cls(
            int(os.environ.get("ARITHGROUP_CAP_ORBIT", DEFAULT_ORBIT_CAP)),
            int(os.environ.get("ARITHGROUP_CAP_ENUM", DEFAULT_ENUM_CAP)),
        )


LIMITS = Limits.from_env()


def crt_base_points(n, m):
    """Per prime-power component q: the vectors e_i mod q, 0 mod m/q."""
    points = []
    split = crt_split(m)
    for idx in range(len(split.factors)):
        eps = split.idempotent(idx)
        for i in range(n):
            points.append(tuple(eps if r == i else 0 for r in range(n)))
    return points


class _Level:
    __slots__ = ("point", "gens", "orbit", "index", "trans", "trans_inv",
                 "words", "edge", "applied", "tested")

    def __init__(self, point, identity):
        self.point = point
        self.gens = []          # indices into the chain's strong generator store
        self.orbit = [point]
        self.index = {point: 0}
        self.trans = [identity]
        self.trans_inv = [identity]
        self.words = [Word.identity()]
        self.edge = [None]      # (parent orbit index, generator position)
        self.applied = []       # per generator position: orbit points acted on
        self.tested = []        # per generator position: Schreier pairs sifted


class StabChain:
    """Base and strong generating set with word-tracking transversals.

    ``transversal[p]`` maps the level's base point to ``p``; its word is a
    word in the generators of the owning group. The chain is built on
    construction and can be extended with ``add_generator``.
    """

    def __init__(self, n, m, generators, words=None, base_prefix=(), limits=None):
        self.n = n
        self.m = m
        self.limits = limits or LIMITS
        self._mul = _kernels.mul_mod(n)
        self._act = _kernels.act_mod(n)
        self.identity = _kernels.identity(n)
        base = [tuple(x % m for x in v) for v in base_prefix]
        for p in crt_base_points(n, m):
            if p not in base:
                base.append(p)
        self.levels = [_Level(b, self.identity) for b in base]
        self.strong = []        # flat tuples
        self.strong_inv = []
        self.strong_words = []
        self.orbit_total = len(self.levels)
        self._build_from(generators, words)

    # -- basic queries -----------------------------------------------------

    @property
    def base(self):
        return [lv.point for lv in self.levels]

    def order(self):
        result = 1
        for lv in self.levels:
            result *= len(lv.orbit)
        return result

    def orbit_sizes(self):
        return [len(lv.orbit) for lv in self.levels]

    def sift(self, elem, start=0):
        """Return ``(level, residue, path)``; level is None when fully sifted."""
        act = self._act
        mul = self._mul
        m = self.m
        path = []
        levels = self.levels
        for l in range(start, len(levels)):
            lv = levels[l]
            p = act(elem, lv.point, m)
            idx = lv.index.get(p)
            if idx is None:
                return l, elem, path
            if idx:
                elem = mul(lv.trans_inv[idx], elem, m)
                path.append((l, idx))
        if elem != self.identity:
            # the base is complete, so this cannot happen for invertible input
            raise AssertionError("sifted residue fixes the base but is not the identity")
        return None, elem, path

    def contains(self, elem):
        return self.sift(elem)[0] is None

    def word_of(self, elem):
        """Word for ``elem`` if it lies in the group, else None."""
        level, _, path = self.sift(elem)
        if level is not None:
            return None
        return Word.product([self.levels[l].words[idx] for l, idx in path])

    # -- construction ------------------------------------------------------

    def _build_from(self, generators, words):
        gens = [g for g in generators]
        if words is None:
            words = [Word.gen(i) for i in range(len(gens))]
        deepest = -1
        for g, w in zip(gens, words):
            level, residue, path = self.sift(g)
            if level is None:
                continue
            j = self._insert_strong(residue, self._residue_word(w, path), 0, fixes_until=level)
            deepest = max(deepest, j)
        self._schreier_sims(deepest)

    def add_generator(self, elem, word):
        """Extend the group by ``elem``; returns False if it was already a member."""
        level, residue, path = self.sift(elem)
        if level is None:
            return False
        rword = self._residue_word(word, path)
        j = self._insert_strong(residue, rword, first_level=0, fixes_until=level)
        self._schreier_sims(j)
        return True

    def _residue_word(self, word, path):
        parts = [self.levels[l].words[idx].inverse() for l, idx in reversed(path)]
        parts.append(word)
        return Word.product(parts)

    def _insert_strong(self, elem, word, first_level, fixes_until=None):
        """Add a strong generator to levels first_level..j; return j."""
        if fixes_until is None:
            fixes_until = 0
            while fixes_until < len(self.levels) and self._act(
                elem, self.levels[fixes_until].point, self.m
            ) == self.levels[fixes_until].point:
                fixes_until += 1
        pos = len(self.strong)
        self.strong.append(elem)
        self.strong_inv.append(inverse_mod(elem, self.n, self.m))
        self.strong_words.append(word)
        for l in range(first_level, fixes_until + 1):
            lv = self.levels[l]
            lv.gens.append(pos)
            lv.applied.append(0)
            lv.tested.append(0)
            self._extend_orbit(lv)
        return fixes_until

    def _extend_orbit(self, lv):
        """Close the orbit under the level's generators (new pairs only)."""
        act, mul, m = self._act, self._mul, self.m
        strong, strong_inv, strong_words = self.strong, self.strong_inv, self.strong_words
        cap = self.limits.orbit_cap
        orbit, index = lv.orbit, lv.index
        changed = True
        while changed:
            changed = False
            for gpos, g_idx in enumerate(lv.gens):
                g = strong[g_idx]
                k = lv.applied[gpos]
                while k < len(orbit):
                    q = act(g, orbit[k], m)
                    if q not in index:
                        index[q] = len(orbit)
                        orbit.append(q)
                        lv.trans.append(mul(g, lv.trans[k], m))
                        lv.trans_inv.append(mul(lv.trans_inv[k], strong_inv[g_idx], m))
                        lv.words.append(strong_words[g_idx] * lv.words[k])
                        lv.edge.append((k, gpos))
                        self.orbit_total += 1
                        if self.orbit_total > cap:
                            raise ResourceLimitError("orbit enumeration", self.orbit_total, cap)
                        changed = True
                    k += 1
                lv.applied[gpos] = k

    def _schreier_sims(self, start_level):
        i = start_level
        while i >= 0:
            j = self._process_level(i)
            i = i - 1 if j is None else j

    def _process_level(self, i):
        """Sift untested Schreier generators of level i.

        Returns the deepest level that received a new strong generator, or
        None when every pair at this level sifts through.
        """
        act, mul, m = self._act, self._mul, self.m
        ident = self.identity
        lv = self.levels[i]
        for gpos, g_idx in enumerate(lv.gens):
            g = self.strong[g_idx]
            k = lv.tested[gpos]
            while k < len(lv.orbit):
                q_idx = lv.index[act(g, lv.orbit[k], m)]
                if lv.edge[q_idx] != (k, gpos):
                    h = mul(lv.trans_inv[q_idx], mul(g, lv.trans[k], m), m)
                    if h != ident:
                        level, residue, path = self.sift(h, i + 1)
                        if level is not None:
                            sword = lv.words[q_idx].inverse() * self.strong_words[g_idx] * lv.words[k]
                            lv.tested[gpos] = k + 1
                            return self._insert_strong(
                                residue, self._residue_word(sword, path),
                                first_level=i + 1, fixes_until=level,
                            )
                k += 1
            lv.tested[gpos] = k
        return None

    # -- enumeration -------------------------------------------------------

    def elements(self, cap=None):
        """Iterate over all group elements as flat tuples."""
        cap = self.limits.enum_cap if cap is None else cap
        order = self.order()
        if order > cap:
            raise ResourceLimitError("element enumeration", order, cap)
        mul, m = self._mul, self.m
        levels = [lv for lv in self.levels if len(lv.orbit) > 1]

        def rec(l, acc):
            if l == len(levels):
                yield acc
                return
            for t in levels[l].trans:
                yield from rec(l + 1, mul(acc, t, m))

        yield from rec(0, self.identity)

    # -- serialization -----------------------------------------------------

    def to_json(self):
        slp = words_to_slp(self.strong_words)
        return {
            "version": 1,
            "n": self.n,
            "m": self.m,
            "base": [list(b) for b in self.base],
            "strong": [list(s) for s in self.strong],
            "levels": [lv.gens for lv in self.levels],
            "words": slp,
        }

    @classmethod
    def from_json(cls, data, limits=None):
        obj = object.__new__(cls)
        obj.n = data["n"]
        obj.m = data["m"]
        obj.limits = limits or LIMITS
        obj._mul = _kernels.mul_mod(obj.n)
        obj._act = _kernels.act_mod(obj.n)
        obj.identity = _kernels.identity(obj.n)
        obj.levels = [_Level(tuple(b), obj.identity) for b in data["base"]]
        obj.strong = [tuple(s) for s in data["strong"]]
        obj.strong_inv = [inverse_mod(s, obj.n, obj.m) for s in obj.strong]
        obj.strong_words = words_from_slp(data["words"])
        obj.orbit_total = len(obj.levels)
        for lv, gens in zip(obj.levels, data["levels"]):
            lv.gens = list(gens)
            lv.applied = [0] * len(gens)
            obj._extend_orbit(lv)
            lv.tested = [len(lv.orbit)] * len(gens)
        return obj


# -- groups --------------------------------------------------------------------


def _as_flat(x, n, m):
    if isinstance(x, ResMat):
        if x.n != n or x.m != m:
            raise ValueError("generator does not match the group's n and m")
        return x.entries
    return ResMat(n, m, x).entries


@dataclass
class GroupZm:
    """Subgroup of GL(n, Z_m) given by generators.

    ``gen_words`` optionally expresses each generator as a word in some parent
    group's generators (set by ``vector_stabilizer``).
    """

    n: int
    m: int
    generators: list
    label: str | None = None
    gen_words: list | None = None
    _chain: StabChain | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"modulus must be >= 2, got {self.m}")
        gens = [g if isinstance(g, ResMat) else ResMat(self.n, self.m, g) for g in self.generators]
        if not gens:
            gens = [ResMat.identity(self.n, self.m)]
        for g in gens:
            if g.n != self.n or g.m != self.m:
                raise ValueError("generator does not match the group's n and m")
            if not g.is_invertible():
                raise ValueError(f"generator {g.rows()} is not invertible mod {self.m}")
        self.generators = gens

    def chain(self, limits=None, cache_dir=None):
        if self._chain is None:
            self._chain = stab_chain(self, limits=limits, cache_dir=cache_dir)
        return self._chain

    def flat_generators(self):
        return [g.entries for g in self.generators]

    def evaluate(self, word):
        n, m = self.n, self.m
        mul = _kernels.mul_mod(n)
        flat = self.flat_generators()
        val = word.evaluate(flat, lambda a, b: mul(a, b, m), _kernels.identity(n),
                            invert=lambda a: inverse_mod(a, n, m))
        return ResMat._raw(n, m, val)

    def content_hash(self):
        h = hashlib.sha256(f"{self.n}|{self.m}|".encode())
        for g in self.generators:
            h.update(",".join(map(str, g.entries)).encode())
            h.update(b";")
        return h.hexdigest()[:32]


_CACHE_DIR = os.environ.get("ARITHGROUP_CACHE_DIR")


def stab_chain(G, base_prefix=(), limits=None, cache_dir=None):
    """Build (or load from the cache) a verified stabilizer chain for G."""
    cache_dir = cache_dir if cache_dir is not None else _CACHE_DIR
    path = None
    if cache_dir and not base_prefix:
        path = os.path.join(cache_dir, f"chain-{G.content_hash()}.json")
        if os.path.exists(path):
            with open(path) as fh:
                data = json.load(fh)
            if data.get("version") == 1 and data["n"] == G.n and data["m"] == G.m:
                return StabChain.from_json(data, limits)
    chain = StabChain(G.n, G.m, G.flat_generators(), base_prefix=base_prefix, limits=limits)
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(chain.to_json(), fh)
        os.replace(tmp, path)
    return chain


def order(G):
    return G.chain().order()


def index_in_sl(G):
    from .congzm import sl_order_formula

    for g in G.generators:
        if g.det() != 1:
            raise ValueError("index_in_sl needs generators of determinant 1")
    return sl_order_formula(G.n, G.m) // order(G)


def membership(G, x):
    """Word over G's generators evaluating to x, or None."""
    return G.chain().word_of(_as_flat(x, G.n, G.m))


def is_member(G, x):
    return G.chain().contains(_as_flat(x, G.n, G.m))


def orbit_with_words(G, v, limits=None):
    """Map each point of the orbit G v to a word w with eval(w) v = point."""
    limits = limits or LIMITS
    n, m = G.n, G.m
    v = tuple(x % m for x in v)
    act = _kernels.act_mod(n)
    gens = G.flat_generators()
    inv = [inverse_mod(g, n, m) for g in gens]
    words = {v: Word.identity()}
    queue = [v]
    k = 0
    while k < len(queue):
        p = queue[k]
        k += 1
        for idx in range(len(gens)):
            for e, g in ((1, gens[idx]), (-1, inv[idx])):
                q = act(g, p, m)
                if q not in words:
                    words[q] = Word.gen(idx, e) * words[p]
                    queue.append(q)
                    if len(queue) > limits.orbit_cap:
                        raise ResourceLimitError("orbit", len(queue), limits.orbit_cap)
    return words


def vector_stabilizer(G, v, limits=None):
    """Stab_G(v) with generators carrying words over G's generators."""
    n, m = G.n, G.m
    v = tuple(x % m for x in v)
    if all(x == 0 for x in v):
        return GroupZm(n, m, list(G.generators), label="stabilizer",
                       gen_words=[Word.gen(i) for i in range(len(G.generators))])
    chain = StabChain(n, m, G.flat_generators(), base_prefix=[v], limits=limits)
    positions = chain.levels[1].gens
    gens = [ResMat._raw(n, m, chain.strong[p]) for p in positions]
    words = [chain.strong_words[p] for p in positions]
    if not gens:
        gens, words = [ResMat.identity(n, m)], [Word.identity()]
    return GroupZm(n, m, gens, label="stabilizer", gen_words=words)


def normal_closure_zm(G, U):
    """Smallest subgroup containing U that is normalized by G's generators."""
    n, m = G.n, G.m
    mul = _kernels.mul_mod(n)
    flat_u = [_as_flat(u, n, m) for u in U] or [_kernels.identity(n)]
    chain = StabChain(n, m, flat_u)
    gens = list(flat_u)
    conj = [(g, inverse_mod(g, n, m)) for g in G.flat_generators()]
    k = 0
    while k < len(gens):
        u = gens[k]
        k += 1
        for g, gi in conj:
            c = mul(mul(gi, u, m), g, m)
            if chain.add_generator(c, Word.gen(len(gens))):
                gens.append(c)
    closure = GroupZm(n, m, [ResMat._raw(n, m, x) for x in gens], label="normal closure")
    closure._chain = chain
    return closure


def intersection_small(G1, G2, limits=None):
    """G1 and G2 intersected, by enumerating the smaller group."""
    limits = limits or LIMITS
    if (G1.n, G1.m) != (G2.n, G2.m):
        raise ValueError("groups live in different matrix rings")
    n, m = G1.n, G1.m
    c1, c2 = G1.chain(limits), G2.chain(limits)
    small, other = (c1, c2) if c1.order() <= c2.order() else (c2, c1)
    if all(other.contains(s) for s in small.strong):
        gens_src = G1 if small is c1 else G2
        return GroupZm(n, m, list(gens_src.generators), label="intersection")
    result = StabChain(n, m, [_kernels.identity(n)], limits=limits)
    found = []
    target_bound = math.gcd(c1.order(), c2.order())
    for x in small.elements(limits.enum_cap):
        if result.order() == target_bound:
            break
        if other.contains(x) and result.add_generator(x, Word.gen(len(found))):
            found.append(x)
    gens = [ResMat._raw(n, m, x) for x in found] or [ResMat.identity(n, m)]
    out = GroupZm(n, m, gens, label="intersection")
    return out


def normalizes(ambient_elem, G):
    n, m = G.n, G.m
    mul = _kernels.mul_mod(n)
    chain = G.chain()
    gi = inverse_mod(ambient_elem, n, m)
    return all(chain.contains(mul(mul(gi, h, m), ambient_elem, m)) for h in G.flat_generators())


def normalizer_small(ambient, G, limits=None):
    """N_ambient(G), by testing every ambient element."""
    limits = limits or LIMITS
    n, m = G.n, G.m
    if all(normalizes(a, G) for a in ambient.flat_generators()):
        return GroupZm(n, m, list(ambient.generators), label="normalizer")
    achain = ambient.chain(limits)
    result = StabChain(n, m, [_kernels.identity(n)], limits=limits)
    found = []
    for x in achain.elements(limits.enum_cap):
        if result.contains(x):
            continue
        if normalizes(x, G):
            result.add_generator(x, Word.gen(len(found)))
            found.append(x)
    gens = [ResMat._raw(n, m, x) for x in found] or [ResMat.identity(n, m)]
    return GroupZm(n, m, gens, label="normalizer")


def scalar_subgroup(G):
    """Residues a with a * 1_n in G."""
    n, m = G.n, G.m
    chain = G.chain()
    out = []
    for a in range(1, m):
        if math.gcd(a, m) != 1:
            continue
        x = tuple(a if i == j else 0 for i in range(n) for j in range(n))
        if chain.contains(x):
            out.append(a)
    return out


def gl_group(n, m):
    """GL(n, Z_m) from transvections and unit diagonals."""
    from .exactmat import diagonal, transvection

    gens = [transvection(n, 1, 2, 1).reduce(m), _cycle(n).reduce(m)]
    for u in unit_group_generators(m):
        gens.append(diagonal([u] + [1] * (n - 1)).reduce(m))
    return GroupZm(n, m, gens, label=f"GL({n},Z_{m})")


def _cycle(n):
    from .exactmat import IntMat

    e = [0] * (n * n)
    for i in range(n - 1):
        e[i * n + i + 1] = 1
    e[(n - 1) * n] = (-1) ** (n - 1)
    return IntMat(n, e)
