"""Unrolled matrix kernels on flat row-major tuples.

Elements in the stabilizer-chain engine are plain tuples of length n*n; the
generic comprehension-based product is several times slower than a straight
line expression, so the kernels are generated once per dimension.
"""

from functools import lru_cache


@lru_cache(maxsize=None)
def mul_mod(n):
    """Return ``f(a, b, m)`` computing the product ``a @ b`` reduced mod m."""
    terms = []
    for i in range(n):
        for j in range(n):
            s = "+".join(f"a[{i * n + k}]*b[{k * n + j}]" for k in range(n))
            terms.append(f"({s})%m")
    src = f"def mul(a, b, m):\n    return ({', '.join(terms)},)\n"
    scope = {}
    exec(src, scope)
    return scope["mul"]


@lru_cache(maxsize=None)
def mul_int(n):
    """Return ``f(a, b)`` computing the exact integer product ``a @ b``."""
    terms = []
    for i in range(n):
        for j in range(n):
            terms.append("+".join(f"a[{i * n + k}]*b[{k * n + j}]" for k in range(n)))
    src = f"def mul(a, b):\n    return ({', '.join(terms)},)\n"
    scope = {}
    exec(src, scope)
    return scope["mul"]


@lru_cache(maxsize=None)
def act_mod(n):
    """Return ``f(a, v, m)`` computing ``a v`` mod m for a column vector v."""
    terms = []
    for i in range(n):
        s = "+".join(f"a[{i * n + k}]*v[{k}]" for k in range(n))
        terms.append(f"({s})%m")
    src = f"def act(a, v, m):\n    return ({', '.join(terms)},)\n"
    scope = {}
    exec(src, scope)
    return scope["act"]


@lru_cache(maxsize=None)
def act_int(n):
    terms = []
    for i in range(n):
        terms.append("+".join(f"a[{i * n + k}]*v[{k}]" for k in range(n)))
    src = f"def act(a, v):\n    return ({', '.join(terms)},)\n"
    scope = {}
    exec(src, scope)
    return scope["act"]


@lru_cache(maxsize=None)
def identity(n):
    return tuple(1 if i == j else 0 for i in range(n) for j in range(n))
