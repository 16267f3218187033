"""Reducing unimodular vectors over Z_m and Z to the first basis vector.

Transvection lists are ``[(i, j, a), ...]`` with 1-based indices. An
"operation list" is applied to a vector on the left in list order, so the
matrix it represents is the product of the factors in reverse order.
"""

import math

from .exactmat import crt_split


def auxiliary1(u, m):
    """Coefficients (b_2, ..., b_n) with u_1 + sum b_i u_i a unit of Z_m.

    Per prime power p^e || m: if u_1 is already a unit at p every component
    is 0; otherwise b_k = 1 for the least k with u_k a unit at p.
    """
    u = [x % m for x in u]
    n = len(u)
    if math.gcd(math.gcd(*u) if n > 1 else u[0], m) != 1:
        raise ValueError(f"vector {tuple(u)} is not unimodular mod {m}")
    split = crt_split(m)
    comps = [[0] * len(split.factors) for _ in range(n - 1)]
    for idx, (p, _) in enumerate(split.factors):
        k = next(r for r in range(n) if u[r] % p)
        if k > 0:
            comps[k - 1][idx] = 1
    return [split.combine(c) for c in comps]


def unit_stage_ops(v1, m, offset=0):
    """Operations sending (v1, 0, ...) with v1 a unit to (1, 0, ...).

    Uses t_21(v1^-1), then t_12(1 - v1), then t_21(-1), shifted by offset.
    ``m`` may be None for the integers, where v1 must be +-1.
    """
    if m is None:
        if v1 not in (1, -1):
            raise ValueError("not a unit of Z")
        inv, shift = v1, 1 - v1
    else:
        v1 %= m
        inv, shift = pow(v1, -1, m), (1 - v1) % m
    if v1 == 1:
        return []
    a, b = offset + 1, offset + 2
    return [(b, a, inv), (a, b, shift), (b, a, -1)]


def unimodular_ops_zm(u, m, offset=0):
    """Operations sending the unimodular u over Z_m to e_1 (shifted by offset)."""
    u = [x % m for x in u]
    n = len(u)
    ops = []
    if n == 1:
        if u[0] != 1:
            raise ValueError("a 1-dimensional unimodular vector must be 1 here")
        return ops
    b = auxiliary1(u, m)
    for i, bi in enumerate(b, start=1):
        if bi:
            ops.append((offset + 1, offset + 1 + i, bi))
            u[0] = (u[0] + bi * u[i]) % m
    v1 = u[0]
    inv = pow(v1, -1, m)
    for i in range(1, n):
        if u[i]:
            ops.append((offset + 1 + i, offset + 1, (-u[i] * inv) % m))
            u[i] = 0
    ops.extend(unit_stage_ops(v1, m, offset))
    return ops


def euclid_ops_z(u, offset=0):
    """Operations sending a nonzero integer vector u to (d, 0, ..., 0), d > 0.

    Returns ``(d, ops)``. Nonzero entries are first packed to the front, a
    nonzero u_j moving into an empty slot i by t_ij(1) then t_ji(-1). Then
    adjacent pairs are reduced from the back by the Euclidean algorithm with
    remainders in [0, |divisor|), the surviving remainder being moved left
    when it ends in the right slot. A negative result is fixed with -1 on
    the first two coordinates, written as (t_12(1) t_21(-1) t_12(1))^2.
    """
    u = list(u)
    n = len(u)
    if all(x == 0 for x in u):
        raise ValueError("zero vector")
    ops = []

    def op(i, j, a):
        if a:
            ops.append((offset + i + 1, offset + j + 1, a))
            u[i] += a * u[j]

    filled = 0
    for j in range(n):
        if u[j]:
            if j != filled:
                op(filled, j, 1)
                op(j, filled, -1)
            filled += 1
    for p in range(filled - 2, -1, -1):
        left, right = p, p + 1
        # r_i sits in `left`, r_{i+1} in `right`; roles swap each step
        while u[right]:
            b = u[right]
            r = u[left] % abs(b)
            op(left, right, -((u[left] - r) // b))
            left, right = right, left
        if left != p:
            op(p, p + 1, 1)
            op(p + 1, p, -1)
    d = u[0]
    if d < 0:
        if n < 2:
            raise ValueError("cannot fix the sign in dimension 1")
        for _ in range(2):
            op(0, 1, 1)
            op(1, 0, -1)
            op(0, 1, 1)
        d = u[0]
    return d, ops


def apply_ops_vector(ops, u, m=None):
    u = list(u)
    for i, j, a in ops:
        u[i - 1] += a * u[j - 1]
        if m:
            u[i - 1] %= m
    return tuple(u)

