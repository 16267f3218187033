"""Quick invariant suites run by ``arithgroup selftest``.

Each suite returns counts of passed and total checks. ``corrupt`` names a
suite whose expected values are perturbed, to confirm that failures are
reported under that name.
"""

from __future__ import annotations

import itertools
import math
import random
import time

from .arithz import (
    decompose_transvections_z,
    elementary_generators,
    evaluate_int,
    excellent_word,
    lift_det_one,
    sigma_elements,
    sl_generators,
)
from .congzm import pcs_generators_zm, pcs_order_formula, sl_order_formula
from .exactmat import IntMat, ResMat, divisors, inverse_mod, transvection_product
from .orbitstab import orbit_gamma_m
from .rationalize import RatMat, conjugate_into_slnz
from .zmgroup import GroupZm, order, orbit_with_words, vector_stabilizer


def _suite_exactmat(rng, bump):
    total = passed = 0
    for _ in range(50):
        n = rng.randint(2, 4)
        m = rng.choice([4, 6, 12, 25])
        while True:
            x = ResMat(n, m, [rng.randrange(m) for _ in range(n * n)])
            if x.is_invertible():
                break
        total += 1
        passed += (x @ x.inverse()).is_identity() and inverse_mod(x.entries, n, m) == x.inverse().entries
    return passed - bump, total


def _suite_order_formula(rng, bump):
    total = passed = 0
    for n, m in [(3, 2), (3, 4), (3, 6), (4, 3)]:
        G = GroupZm(n, m, [g.reduce(m) for g in sl_generators(n)])
        total += 1
        passed += order(G) == sl_order_formula(n, m) + bump
        for a in divisors(m):
            total += 1
            passed += order(pcs_generators_zm(n, m, a).group()) == pcs_order_formula(n, m, a)
    return passed, total


def _suite_orbit_stabilizer(rng, bump):
    total = passed = 0
    G = GroupZm(3, 4, [g.reduce(4) for g in sl_generators(3)])
    N = order(G)
    for v in [(1, 0, 0), (2, 0, 0), (2, 2, 0), (0, 0, 0)]:
        orbit = orbit_with_words(G, v)
        total += 1
        passed += len(orbit) * order(vector_stabilizer(G, v)) == N + bump
    return passed, total


def _suite_excellent(rng, bump):
    total = passed = 0
    n, m = 3, 2
    gens = elementary_generators(n, m).generators
    for (i, j), (desc, g) in itertools.product(
            [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)], sigma_elements(n)):
        word = excellent_word(n, m, i, j, desc)
        target = g.inverse() @ transvection_product(n, [(i, j, m * m + bump)]) @ g
        total += 1
        passed += evaluate_int(word, gens) == target
    return passed, total


def _suite_lifting(rng, bump):
    total = passed = 0
    for _ in range(30):
        x = IntMat.identity(3)
        for _ in range(8):
            i, j = rng.sample(range(1, 4), 2)
            x = x @ transvection_product(3, [(i, j, rng.randint(-3, 3))])
        total += 1
        passed += transvection_product(3, decompose_transvections_z(x)) == x
        b = x.reduce(12)
        y = lift_det_one(b)
        total += 1
        passed += y.det() == 1 and y.reduce(12) == b
    return passed - bump, total


def _suite_orbit_gamma_m(rng, bump):
    total = passed = 0
    box = list(itertools.product(range(-2, 3), repeat=3))
    m = 2
    for u in rng.sample(box, 12):
        for v in box:
            ans = orbit_gamma_m(u, v, m)
            if any(u) and any(v):
                a = math.gcd(*u)
                pred = a == math.gcd(*v) and all((x - y) % (a * m) == 0 for x, y in zip(u, v))
            else:
                pred = not any(u) and not any(v)
            ok = ans.found == pred
            if ans.found:
                g = ans.matrix
                ok = ok and g.act(u) == v and g.det() == 1 and g.is_congruent_identity(m)
            total += 1
            passed += ok
    return passed - bump, total


def _suite_rationalize(rng, bump):
    from fractions import Fraction

    total = passed = 0
    for _ in range(5):
        while True:
            g = RatMat.from_rows([[Fraction(rng.randint(-4, 4), rng.randint(1, 4))
                                   for _ in range(3)] for _ in range(3)])
            if g.det() != 0:
                break
        S = [g @ RatMat.of(x) @ g.inverse() for x in sl_generators(3)]
        h, conj = conjugate_into_slnz(S)
        total += 1
        passed += all(h @ RatMat.of(c) @ h.inverse() == s for c, s in zip(conj, S))
    return passed - bump, total


def _suite_index(rng, bump):
    from .arithz import index_z

    E = elementary_generators(3, 2)
    # Gamma_{3,4} has index |SL(3, Z_4)| and E_{3,2} contains it with quotient 2^6
    return int(index_z(E) == sl_order_formula(3, 4) // 2 ** 6 + bump), 1


SUITES = {
    "exactmat": _suite_exactmat,
    "order-formula": _suite_order_formula,
    "orbit-stabilizer": _suite_orbit_stabilizer,
    "excellent-words": _suite_excellent,
    "lifting": _suite_lifting,
    "orbit-gamma-m": _suite_orbit_gamma_m,
    "rationalize": _suite_rationalize,
    "index": _suite_index,
}


def run_selftest(corrupt=None, seed=2024):
    if corrupt is not None and corrupt not in SUITES:
        raise ValueError(f"unknown suite {corrupt!r}; choose from {sorted(SUITES)}")
    suites = []
    for name, fn in SUITES.items():
        rng = random.Random(seed)
        t0 = time.perf_counter()
        try:
            passed, total = fn(rng, 1 if name == corrupt else 0)
            detail = None
        except Exception as exc:  # a crash is a named failure, not a traceback
            passed, total, detail = 0, 1, f"{type(exc).__name__}: {exc}"
        passed = max(passed, 0)
        suites.append({"name": name, "passed": passed, "total": total,
                       "ok": passed == total, "seconds": round(time.perf_counter() - t0, 4),
                       "detail": detail})
    return {"passed": all(s["ok"] for s in suites), "suites": suites}
