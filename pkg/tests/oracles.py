"""Brute-force reference computations that share no code with the package."""

import itertools
import math
from collections import deque


def matmul(a, b, n, m=None):
    out = tuple(sum(a[i * n + k] * b[k * n + j] for k in range(n))
                for i in range(n) for j in range(n))
    return tuple(x % m for x in out) if m else out


def ident(n):
    return tuple(int(i == j) for i in range(n) for j in range(n))


def leibniz_det(a, n):
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = 1
        for i in range(n):
            prod *= a[i * n + perm[i]]
        total += -prod if inv % 2 else prod
    return total


def closure(gens, n, m):
    """All elements of the group generated by ``gens`` (flat tuples mod m)."""
    one = ident(n)
    seen = {one}
    queue = deque([one])
    gens = [tuple(x % m for x in g) for g in gens]
    while queue:
        x = queue.popleft()
        for g in gens:
            y = matmul(x, g, n, m)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def act(a, v, n, m=None):
    out = tuple(sum(a[i * n + k] * v[k] for k in range(n)) for i in range(n))
    return tuple(x % m for x in out) if m else out


def orbit(gens, v, n, m):
    v = tuple(x % m for x in v)
    seen = {v}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = act(g, x, n, m)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def ideal_mod(v, m):
    """Generator of the ideal <v> in Z_m as a divisor of m."""
    return math.gcd(m, *v)


def t(n, i, j, a):
    e = list(ident(n))
    e[(i - 1) * n + (j - 1)] += a
    return tuple(e)


def sl_pair(n):
    """t_12(1) and the signed cyclic shift, written out directly."""
    shift = [0] * (n * n)
    for i in range(n - 1):
        shift[i * n + i + 1] = 1
    shift[(n - 1) * n] = (-1) ** (n - 1)
    return [t(n, 1, 2, 1), tuple(shift)]


def sl_order_direct(n, m):
    """|SL(n, Z_m)| by counting invertible matrices of determinant 1 (tiny cases only)."""
    count = 0
    for e in itertools.product(range(m), repeat=n * n):
        if leibniz_det(e, n) % m == 1 % m:
            count += 1
    return count
