"""Words over a generating set, stored as straight-line programs.

A stabilizer chain builds transversal and Schreier-generator words by
concatenating earlier words, so written out letter by letter they grow
exponentially. ``Word`` keeps them as a DAG instead: each node is the identity,
a generator power, a product, or an inverse. Evaluation is iterative and
memoized, so deep or heavily shared DAGs cost one multiplication per node.

``letters()`` gives the flat ``[(index, exponent), ...]`` form when its length
is manageable.
"""

from __future__ import annotations

_ID, _GEN, _PROD, _INV = 0, 1, 2, 3


class WordTooLong(ValueError):
    """The flattened word exceeds the requested length."""


class Word:
    __slots__ = ("kind", "a", "b", "length", "__weakref__")

    def __init__(self, kind, a=None, b=None, length=0):
        self.kind = kind
        self.a = a
        self.b = b
        # letter count before free reduction; an upper bound for letters()
        self.length = length

    # -- construction --------------------------------------------------------

    @staticmethod
    def identity():
        return _IDENTITY

    @staticmethod
    def gen(index, exponent=1):
        if index < 0:
            raise ValueError("generator index must be >= 0")
        if exponent == 0:
            return _IDENTITY
        return Word(_GEN, index, exponent, abs(exponent))

    @staticmethod
    def from_letters(pairs):
        w = _IDENTITY
        for idx, e in pairs:
            w = w * Word.gen(idx, e)
        return w

    @staticmethod
    def product(words):
        """Balanced product, so long lists give shallow DAGs."""
        words = [w for w in words if w.kind != _ID]
        if not words:
            return _IDENTITY
        while len(words) > 1:
            nxt = [words[k] * words[k + 1] for k in range(0, len(words) - 1, 2)]
            if len(words) % 2:
                nxt.append(words[-1])
            words = nxt
        return words[0]

    def __mul__(self, other):
        if not isinstance(other, Word):
            return NotImplemented
        if self.kind == _ID:
            return other
        if other.kind == _ID:
            return self
        if self.kind == _GEN and other.kind == _GEN and self.a == other.a:
            return Word.gen(self.a, self.b + other.b)
        return Word(_PROD, self, other, self.length + other.length)

    def inverse(self):
        if self.kind == _ID:
            return self
        if self.kind == _GEN:
            return Word(_GEN, self.a, -self.b, self.length)
        if self.kind == _INV:
            return self.a
        return Word(_INV, self, None, self.length)

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        result = _IDENTITY
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_identity_word(self):
        return self.kind == _ID

    # -- traversal -----------------------------------------------------------

    def _children(self, sign):
        """Signed children in evaluation order for node value with sign."""
        if self.kind == _PROD:
            if sign > 0:
                return ((self.a, 1), (self.b, 1))
            return ((self.b, -1), (self.a, -1))
        if self.kind == _INV:
            return ((self.a, -sign),)
        return ()

    def evaluate(self, gens, mul, one, gens_inv=None, invert=None):
        """Value of the word with generator ``i`` mapped to ``gens[i]``.

        ``mul(x, y)`` is the product xy. Inverse generators come from
        ``gens_inv`` if given, otherwise from ``invert``.
        """
        if gens_inv is None:
            if invert is None:
                raise ValueError("need gens_inv or invert")
            gens_inv = _LazyInverse(gens, invert)
        cache = {}
        powers = {}

        def gen_power(idx, e):
            key = (idx, e)
            val = powers.get(key)
            if val is None:
                base = gens[idx] if e > 0 else gens_inv[idx]
                val = base
                for _ in range(abs(e) - 1):
                    val = mul(val, base)
                powers[key] = val
            return val

        stack = [(self, 1, False)]
        while stack:
            node, sign, expanded = stack.pop()
            key = (id(node), sign)
            if key in cache:
                continue
            if node.kind == _ID:
                cache[key] = one
            elif node.kind == _GEN:
                cache[key] = gen_power(node.a, node.b * sign)
            elif expanded:
                kids = node._children(sign)
                val = cache[(id(kids[0][0]), kids[0][1])]
                if len(kids) == 2:
                    val = mul(val, cache[(id(kids[1][0]), kids[1][1])])
                cache[key] = val
            else:
                stack.append((node, sign, True))
                for child, s in node._children(sign):
                    if (id(child), s) not in cache:
                        stack.append((child, s, False))
        return cache[(id(self), 1)]

    def letters(self, max_length=10**6):
        """Flat free-reduced list of (generator index, exponent) pairs."""
        out = []
        stack = [(self, 1)]
        count = 0
        while stack:
            node, sign = stack.pop()
            if node.kind == _ID:
                continue
            if node.kind == _GEN:
                idx, e = node.a, node.b * sign
                count += abs(e)
                if count > max_length:
                    raise WordTooLong(f"word longer than {max_length} letters")
                if out and out[-1][0] == idx:
                    e += out[-1][1]
                    out.pop()
                    if e:
                        out.append((idx, e))
                else:
                    out.append((idx, e))
                continue
            # push in reverse so the left factor is emitted first
            for child, s in reversed(node._children(sign)):
                stack.append((child, s))
        return out

    def substitute(self, images):
        """Replace generator i by the word images[i]."""
        cache = {}
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            key = id(node)
            if key in cache:
                continue
            if node.kind == _ID:
                cache[key] = _IDENTITY
            elif node.kind == _GEN:
                cache[key] = images[node.a] ** node.b
            elif expanded:
                if node.kind == _PROD:
                    cache[key] = cache[id(node.a)] * cache[id(node.b)]
                else:
                    cache[key] = cache[id(node.a)].inverse()
            else:
                stack.append((node, True))
                for child in (node.a, node.b) if node.kind == _PROD else (node.a,):
                    if id(child) not in cache:
                        stack.append((child, False))
        return cache[id(self)]

    def generators_used(self):
        seen, used = set(), set()
        stack = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if node.kind == _GEN:
                used.add(node.a)
            elif node.kind == _PROD:
                stack.extend((node.a, node.b))
            elif node.kind == _INV:
                stack.append(node.a)
        return used

    # -- serialization -------------------------------------------------------

    def to_slp(self):
        return words_to_slp([self])

    @staticmethod
    def from_slp(data):
        return words_from_slp(data)[0]

    def __repr__(self):
        if self.kind == _ID:
            return "Word()"
        if self.length <= 40:
            return f"Word({self.letters()})"
        return f"Word(<slp, {self.length} letters>)"


class _LazyInverse:
    def __init__(self, gens, invert):
        self.gens = gens
        self.invert = invert
        self.cache = {}

    def __getitem__(self, idx):
        if idx not in self.cache:
            self.cache[idx] = self.invert(self.gens[idx])
        return self.cache[idx]


_IDENTITY = Word(_ID)


def words_to_slp(words):
    """Serialize several words sharing nodes into one program.

    Returns ``{"nodes": [...], "roots": [...]}`` where each node is
    ``["1"]``, ``["g", i, e]``, ``["p", a, b]`` or ``["i", a]`` referring to
    earlier node positions.
    """
    nodes = []
    index = {}
    for root in words:
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if id(node) in index:
                continue
            if node.kind == _ID:
                index[id(node)] = len(nodes)
                nodes.append(["1"])
            elif node.kind == _GEN:
                index[id(node)] = len(nodes)
                nodes.append(["g", node.a, node.b])
            elif expanded:
                index[id(node)] = len(nodes)
                if node.kind == _PROD:
                    nodes.append(["p", index[id(node.a)], index[id(node.b)]])
                else:
                    nodes.append(["i", index[id(node.a)]])
            else:
                stack.append((node, True))
                for child in (node.a, node.b) if node.kind == _PROD else (node.a,):
                    if id(child) not in index:
                        stack.append((child, False))
    return {"nodes": nodes, "roots": [index[id(w)] for w in words]}


def words_from_slp(data):
    built = []
    for node in data["nodes"]:
        tag = node[0]
        if tag == "1":
            built.append(_IDENTITY)
        elif tag == "g":
            built.append(Word.gen(int(node[1]), int(node[2])))
        elif tag == "p":
            built.append(built[node[1]] * built[node[2]])
        elif tag == "i":
            built.append(built[node[1]].inverse())
        else:
            raise ValueError(f"unknown SLP node {node!r}")
    return [built[r] for r in data["roots"]]
