"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a PASS/FAIL line in RESULTS; the terminal summary prints
them. ``python tests/test_acceptance.py`` runs the same checks standalone.
"""

import itertools
import math
import random
import time
from fractions import Fraction


from arithgroup.arithz import (
    GroupZ, decompose_transvections_z, elementary_generators, elementary_pairs, evaluate_int,
    excellent_word, index_z, lift_det_one, normal_closure_z, sigma_elements,
    sl_generators,
)
from arithgroup.congzm import (
    filtration_subgroup, is_normal_zm, is_subnormal_zm, pcs_generators_zm, pcs_order_formula,
    sl_order_formula,
)
from arithgroup.exactmat import IntMat, ResMat, block_embed, divisors, transvection
from arithgroup.orbitstab import orbit_gamma_m, stabilizer_h
from arithgroup.rationalize import RatMat, conjugate_into_slnz
from arithgroup.zmgroup import GroupZm, is_member, normal_closure_zm, order, orbit_with_words

RESULTS = {}


def record(k, ok, detail):
    RESULTS[k] = (bool(ok), detail)
    print(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def sl_mod(n, m):
    return GroupZm(n, m, [g.reduce(m) for g in sl_generators(n)])


def comm(x, y):
    return x.inverse() @ y.inverse() @ x @ y


# 1 -------------------------------------------------------------------------------


def test_criterion_01_index_level_twelve():
    t0 = time.perf_counter()
    E = elementary_generators(4, 12)
    value = index_z(E)
    dt = time.perf_counter() - t0
    expected = 2**35 * 3**11 * 5**2 * 7 * 13
    record(1, value == expected and len(E.generators) == 12 and E.certified_level == 144
           and dt <= 600, f"index {value} vs {expected}, {dt:.1f}s (limit 600s)")


# 2 -------------------------------------------------------------------------------


def test_criterion_02_order_formulas():
    t0 = time.perf_counter()
    bad = []
    checks = 0
    for n in (3, 4):
        for m in (2, 3, 4, 5, 8, 9, 12):
            checks += 1
            if order(sl_mod(n, m)) != sl_order_formula(n, m):
                bad.append(("SL", n, m))
            for a in divisors(m):
                checks += 1
                if order(pcs_generators_zm(n, m, a).group()) != pcs_order_formula(n, m, a):
                    bad.append(("PCS", n, m, a))
    dt = time.perf_counter() - t0
    record(2, not bad and dt <= 120, f"{checks} orders, mismatches {bad}, {dt:.1f}s (limit 120s)")


# 3 -------------------------------------------------------------------------------


def commutator_instance(rng):
    n = rng.randint(3, 5)
    a, b = rng.randint(-50, 50), rng.randint(-50, 50)
    kind = rng.randrange(4)
    if kind == 3:
        i, j = rng.sample(range(1, n + 1), 2)
        rows = IntMat.identity(n).rows()
        rows[i - 1][j - 1] += a * a * b
        rows[j - 1][i - 1] -= a * b * b
        rows[i - 1][i - 1] += a * b + a * a * b * b
        rows[j - 1][j - 1] -= a * b
        return comm(transvection(n, i, j, a), transvection(n, j, i, b)) == IntMat.from_rows(rows)
    i, j, k = rng.sample(range(1, n + 1), 3)
    if kind == 0:
        return comm(transvection(n, i, j, a), transvection(n, j, k, b)) == transvection(n, i, k, a * b)
    if kind == 1:
        return comm(transvection(n, i, j, a), transvection(n, k, i, b)) == transvection(n, k, j, -a * b)
    # t_ij(a) and t_kl(b) commute when i != l and j != k
    pairs = [(p, q) for p in range(1, n + 1) for q in range(1, n + 1)
             if p != q and p != j and q != i]
    p, q = rng.choice(pairs)
    x, y = transvection(n, i, j, a), transvection(n, p, q, b)
    return x @ y == y @ x


def test_criterion_03_generator_identities():
    rng = random.Random(2023)
    failures = sum(not commutator_instance(rng) for _ in range(500))
    words = 0
    for n in (3, 4, 5):
        for m in (2, 3, 5):
            gens = [transvection(n, i, j, m) for i, j in elementary_pairs(n)]
            for i in range(1, n + 1):
                for j in range(i + 1, n + 1):
                    for desc, g in sigma_elements(n):
                        words += 1
                        w = excellent_word(n, m, i, j, desc)
                        if evaluate_int(w, gens) != g.inverse() @ transvection(n, i, j, m * m) @ g:
                            failures += 1
    record(3, failures == 0, f"500 commutator instances and {words} rewriting formulas, {failures} failures")


# 4 -------------------------------------------------------------------------------


def test_criterion_04_filtration():
    p, k, n = 2, 4, 3
    ambient = sl_mod(n, p ** k)
    ok = True
    notes = []
    for i, j in ((1, 1), (1, 2)):
        A = filtration_subgroup(n, p, k, i).group()
        B = filtration_subgroup(n, p, k, j).group()
        C = normal_closure_zm(ambient, [comm(x, y) for x in A.generators for y in B.generators])
        target = filtration_subgroup(n, p, k, i + j).group()
        same = order(C) == order(target) and all(is_member(C, g) for g in target.generators)
        ok &= same
        notes.append(f"[N{i},N{j}]=N{i + j}:{same}")
    for i in range(1, k):
        q = order(filtration_subgroup(n, p, k, i).group()) // order(filtration_subgroup(n, p, k, i + 1).group())
        ok &= q == p ** 8
        notes.append(f"|N{i}/N{i + 1}|={q}")
    record(4, ok, " ".join(notes))


# 5 -------------------------------------------------------------------------------


def test_criterion_05_orbit_classification():
    ok = True
    notes = []
    for m in (4, 6, 9):
        G = sl_mod(3, m)
        seen = set()
        sizes = []
        for v in itertools.product(range(m), repeat=3):
            if v in seen:
                continue
            orb = set(orbit_with_words(G, v))
            seen |= orb
            d = math.gcd(m, *v)
            ideal_class = {w for w in itertools.product(range(m), repeat=3) if math.gcd(m, *w) == d}
            ok &= orb == ideal_class
            sizes.append(len(orb))
        notes.append(f"m={m}: {len(sizes)} orbits")
        if m == 4:
            ok &= sorted(sizes) == [1, 7, 56]
            notes.append(f"sizes {sorted(sizes, reverse=True)}")
    record(5, ok, ", ".join(notes))


# 6 -------------------------------------------------------------------------------


def test_criterion_06_orbit_gamma_m_exhaustive():
    t0 = time.perf_counter()
    pairs = found = bad = 0
    for n in (2, 3):
        box = list(itertools.product(range(-4, 5), repeat=n))
        for m in (2, 3):
            for u in box:
                for v in box:
                    pairs += 1
                    ans = orbit_gamma_m(u, v, m)
                    if any(u) and any(v):
                        a = math.gcd(*u)
                        pred = a == math.gcd(*v) and all((x - y) % (a * m) == 0 for x, y in zip(u, v))
                    else:
                        pred = not any(u) and not any(v)
                    if ans.found != pred:
                        bad += 1
                        continue
                    if ans.found:
                        found += 1
                        g = ans.matrix
                        if not (g.act(u) == v and g.det() == 1 and g.is_congruent_identity(m)):
                            bad += 1
    dt = time.perf_counter() - t0
    record(6, bad == 0 and dt <= 300,
           f"{pairs} pairs, {found} witnesses, {bad} failures, {dt:.1f}s (limit 300s)")


# 7 -------------------------------------------------------------------------------


def test_criterion_07_stabilizer():
    H = GroupZ(3, sl_generators(3), 2)
    e1 = (1, 0, 0)
    gens = stabilizer_h(e1, H).matrices()
    fixes = all(g.act(e1) == e1 for g in gens)
    x, y = sl_generators(2)
    lam = [transvection(3, 1, 2, 1), transvection(3, 1, 3, 1), block_embed(3, x), block_embed(3, y)]
    notes = []
    ok = fixes
    for k in (3, 4, 5):
        a = order(GroupZm(3, k, [g.reduce(k) for g in gens]))
        b = order(GroupZm(3, k, [g.reduce(k) for g in lam]))
        ok &= a == b
        notes.append(f"mod {k}: {a} vs {b}")
    record(7, ok, f"{len(gens)} generators, all fix e1: {fixes}; " + ", ".join(notes))


# 8 -------------------------------------------------------------------------------


def random_sl_mod(rng, n, m):
    while True:
        b = ResMat(n, m, [rng.randrange(m) for _ in range(n * n)])
        if b.det() == 1 % m:
            return b


def test_criterion_08_lifting():
    rng = random.Random(8)
    lift_bad = 0
    for _ in range(200):
        b = random_sl_mod(rng, 4, 12)
        y = lift_det_one(b)
        lift_bad += not (y.det() == 1 and y.reduce(12) == b)
    dec_bad = 0
    for _ in range(100):
        g = IntMat.identity(3)
        for _ in range(rng.randint(1, 15)):
            i, j = rng.sample(range(1, 4), 2)
            g = g @ transvection(3, i, j, rng.randint(-20, 20))
        f = decompose_transvections_z(g)
        h = IntMat.identity(3)
        for i, j, a in f:
            h = h @ transvection(3, i, j, a)
        dec_bad += h != g
    record(8, lift_bad == 0 and dec_bad == 0,
           f"200 lifts ({lift_bad} bad), 100 decompositions ({dec_bad} bad)")


# 9 -------------------------------------------------------------------------------


def test_criterion_09_rationalization():
    rng = random.Random(9)
    a = transvection(3, 1, 2, 1) @ transvection(3, 2, 3, 2)
    b = sl_generators(3)[1] @ transvection(3, 3, 1, -1)
    bad = 0
    t0 = time.perf_counter()
    for _ in range(50):
        while True:
            g = RatMat.from_rows([[Fraction(rng.randint(-6, 6), rng.randint(1, 6)) for _ in range(3)]
                                  for _ in range(3)])
            if g.det() != 0:
                break
        S = [g @ RatMat.of(a) @ g.inverse(), g @ RatMat.of(b) @ g.inverse()]
        h, conj = conjugate_into_slnz(S)
        ok = all(c.det() == 1 for c in conj)
        ok &= [h @ RatMat.of(c) @ h.inverse() for c in conj] == S
        bad += not ok
    record(9, bad == 0, f"50 conjugates, {bad} failures, {time.perf_counter() - t0:.1f}s")


# 10 ------------------------------------------------------------------------------


def test_criterion_10_subnormality():
    c = is_subnormal_zm(GroupZm(3, 4, [transvection(3, 1, 2, 2).reduce(4)]))
    first = (c.l1, c.l2, c.subnormal, c.e_prime, c.defect_bound) == (2, 4, True, 2, 3)
    second = is_normal_zm(pcs_generators_zm(3, 4, 2).group())
    rng = random.Random(10)
    closure_bad = 0
    for _ in range(20):
        S = []
        for _ in range(rng.randint(1, 2)):
            g = IntMat.identity(3)
            for _ in range(3):
                i, j = rng.sample(range(1, 4), 2)
                g = g @ transvection(3, i, j, rng.choice([2, 3, 4, 6]) * rng.choice([-1, 1]))
            S.append(g)
        nc = normal_closure_z(3, S)
        l = max(nc.level, 1)
        for k in (2, 3):
            M = l * k
            img = nc.group.image(M)
            for s in sl_generators(3):
                si = s.inverse()
                if not all(is_member(img, (si @ g @ s).reduce(M)) for g in nc.group.generators):
                    closure_bad += 1
    record(10, first and second and closure_bad == 0,
           f"<t12(2)> mod 4: e'={c.e_prime} defect<={c.defect_bound}; level-2 PCS normal: {second}; "
           f"20 normal closures, {closure_bad} failures")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
