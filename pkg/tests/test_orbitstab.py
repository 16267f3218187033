import itertools
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from arithgroup._unimodular import auxiliary1
from arithgroup.arithz import (
    GroupZ, elementary_generators, evaluate_int, gamma_m_generators, is_member_z, sl_generators,
)
from arithgroup.congzm import sl_order_formula
from arithgroup.exactmat import IntMat, block_embed, transvection, transvection_product
from arithgroup.orbitstab import (
    auxiliary2, gamma2_generators, orbit1_gamma, orbit_gamma, orbit_gamma_m, orbit_h,
    orbit_lengths, reduce_unimodular_zm, stab_gamma, stab_gamma_m, stabilizer_h,
)
from arithgroup.words import Word
from arithgroup.zmgroup import GroupZm, is_member, order, vector_stabilizer
from oracles import leibniz_det

vec3 = st.lists(st.integers(-30, 30), min_size=3, max_size=3).filter(any)


def orbit_predicate(u, v, m):
    if not any(u) or not any(v):
        return not any(u) and not any(v)
    a = math.gcd(*u)
    return a == math.gcd(*v) and all((x - y) % (a * m) == 0 for x, y in zip(u, v))


def check_gamma_m_witness(g, u, v, m):
    assert g.act(u) == tuple(v)
    assert leibniz_det(g.entries, len(u)) == 1
    assert g.is_congruent_identity(m)


# -- Gamma_n -------------------------------------------------------------------------


def test_orbit1_examples():
    d, t, f = orbit1_gamma((2, 4, 6))
    assert d == 2 and t.act((2, 4, 6)) == (2, 0, 0)
    d, t, _ = orbit1_gamma((0, 0, 5))
    assert d == 5 and t.act((0, 0, 5)) == (5, 0, 0)
    assert orbit1_gamma((1, 0, 0))[1] == IntMat.identity(3)


def test_orbit1_rejects_zero():
    with pytest.raises(ValueError):
        orbit1_gamma((0, 0, 0))


@given(st.integers(2, 6).flatmap(
    lambda n: st.lists(st.integers(-10**6, 10**6), min_size=n, max_size=n).filter(any)))
def test_orbit1_general(u):
    d, t, f = orbit1_gamma(u)
    assert d == math.gcd(*u) > 0
    assert t.act(tuple(u)) == (d,) + (0,) * (len(u) - 1)
    assert t == transvection_product(len(u), f) and t.det() == 1


def test_orbit_gamma_examples():
    ans = orbit_gamma((2, 4, 6), (2, 0, 0))
    assert ans and ans.matrix.act((2, 4, 6)) == (2, 0, 0)
    assert not orbit_gamma((2, 0, 0), (3, 0, 0))
    same = orbit_gamma((3, -6, 9), (3, -6, 9))
    assert same.matrix.act((3, -6, 9)) == (3, -6, 9)


@given(vec3, vec3)
def test_orbit_gamma_criterion(u, v):
    ans = orbit_gamma(u, v)
    assert ans.found == (math.gcd(*u) == math.gcd(*v))
    if ans:
        assert ans.matrix.act(tuple(u)) == tuple(v) and ans.matrix.det() == 1


# -- Z_m procedures ------------------------------------------------------------------------


def test_auxiliary1_examples():
    assert auxiliary1((4, 3, 0), 12) == [9, 0]
    assert math.gcd(4 + 9 * 3, 12) == 1
    assert auxiliary1((1, 5, 7), 12) == [0, 0]
    assert auxiliary1((0, 2, 0), 5) == [1, 0]


@given(st.sampled_from([4, 6, 12, 30, 36]), st.lists(st.integers(0, 35), min_size=3, max_size=3))
def test_auxiliary1_gives_unit(m, u):
    u = [x % m for x in u]
    if math.gcd(m, *u) != 1:
        with pytest.raises(ValueError):
            auxiliary1(u, m)
        return
    b = auxiliary1(u, m)
    assert math.gcd(u[0] + sum(x * y for x, y in zip(b, u[1:])), m) == 1


def test_reduce_unimodular_examples():
    g, f = reduce_unimodular_zm((1, 0, 0), 4)
    assert f == [] and g.is_identity()
    g, _ = reduce_unimodular_zm((3, 0, 0), 4)
    assert g.act((3, 0, 0)) == (1, 0, 0)


@pytest.mark.parametrize("m", [4, 6, 9])
def test_reduce_unimodular_exhaustive(m):
    count = 0
    for u in itertools.product(range(m), repeat=3):
        if math.gcd(m, *u) != 1:
            continue
        count += 1
        g, f = reduce_unimodular_zm(u, m)
        assert g.act(u) == (1, 0, 0)
        assert transvection_product(3, f).reduce(m) == g
    assert m != 4 or count == 56


def test_auxiliary2_examples():
    g, _ = auxiliary2((1, 0, 0), (1, 0, 0), {1, 2, 3}, 2)
    assert g.is_identity()
    g, f = auxiliary2((1, 0, 0), (1, 4, 6), {1}, 2)
    assert g == transvection(3, 2, 1, 4) @ transvection(3, 3, 1, 6)
    assert g.act((1, 0, 0)) == (1, 4, 6)
    with pytest.raises(ValueError):
        auxiliary2((1, 0, 0), (1, 3, 6), {1}, 2)


@given(st.integers(1, 5), st.lists(st.integers(-5, 5), min_size=2, max_size=2), st.integers(2, 5))
def test_auxiliary2_general(c, ks, m):
    # u = (2c, 3c, 0) on I = {1, 2}; third coordinate moves by multiples of m * c
    u = (2 * c, 3 * c, 0)
    v = (2 * c, 3 * c, m * c * ks[0])
    g, _ = auxiliary2(u, v, {1, 2}, m)
    check_gamma_m_witness(g, u, v, m)


# -- Gamma_{n,m} --------------------------------------------------------------------------


def test_orbit_gamma_m_examples():
    ans = orbit_gamma_m((1, 0, 0), (4, 3, 3), 3)
    assert ans
    check_gamma_m_witness(ans.matrix, (1, 0, 0), (4, 3, 3), 3)
    assert not orbit_gamma_m((1, 0, 0), (2, 3, 3), 3)


def test_orbit_gamma_m_two_dimensional():
    ans = orbit_gamma_m((1, 0), (3, 2), 2)
    assert ans
    check_gamma_m_witness(ans.matrix, (1, 0), (3, 2), 2)


def test_orbit_gamma_m_zero_vectors():
    assert orbit_gamma_m((0, 0, 0), (0, 0, 0), 3).matrix == IntMat.identity(3)
    assert not orbit_gamma_m((0, 0, 0), (1, 0, 0), 3)
    assert not orbit_gamma_m((1, 0, 0), (0, 0, 0), 3)


@pytest.mark.parametrize("n, m", [(2, 4), (3, 2), (3, 4), (4, 3)])
def test_orbit_gamma_m_box(n, m):
    box = list(itertools.product(range(-2, 3), repeat=n))
    rng = random.Random(n * 10 + m)
    for u in rng.sample(box, min(len(box), 25)):
        for v in box:
            ans = orbit_gamma_m(u, v, m)
            assert ans.found == orbit_predicate(u, v, m)
            if ans:
                check_gamma_m_witness(ans.matrix, u, v, m)


@given(st.integers(2, 5), st.integers(2, 7), st.integers(1, 6), st.data())
def test_orbit_gamma_m_large_entries(n, m, a, data):
    w = data.draw(st.lists(st.integers(-10**4, 10**4), min_size=n, max_size=n))
    u = [a * x for x in w]
    if not any(u):
        return
    a = math.gcd(*u)
    shift = data.draw(st.lists(st.integers(-50, 50), min_size=n, max_size=n))
    v = [x + a * m * s for x, s in zip(u, shift)]
    if not any(v):
        return
    ans = orbit_gamma_m(u, v, m)
    assert ans.found == (math.gcd(*v) == a)
    if ans:
        check_gamma_m_witness(ans.matrix, u, v, m)


# -- stabilizers in Gamma_n and Gamma_{n,m} ---------------------------------------------------


def test_stab_gamma_standard_vector():
    got = {g.entries for g in stab_gamma((1, 0, 0)).matrices()}
    x, y = sl_generators(2)
    expected = {transvection(3, 1, 2, 1).entries, transvection(3, 1, 3, 1).entries,
                block_embed(3, x).entries, block_embed(3, y).entries}
    assert got == expected


def test_stab_gamma_scaling():
    a = {g.entries for g in stab_gamma((1, 0, 0)).matrices()}
    b = {g.entries for g in stab_gamma((2, 0, 0)).matrices()}
    assert a == b


def test_stab_gamma_m_fixed_and_congruent():
    for g in stab_gamma_m((2, 4, 6), 2).matrices():
        assert g.act((2, 4, 6)) == (2, 4, 6) and g.is_congruent_identity(2) and g.det() == 1


def test_stab_gamma_m_zero_vector():
    assert len(stab_gamma_m((0, 0, 0), 2)) > 0


def count_level_stabilizer_e1(k, m):
    """|image mod k of Stab_{Gamma_{3,m}}(e_1)|, counted directly."""
    total = 0
    rng = [x for x in range(k) if x % m == 0]
    one = [x for x in range(k) if x % m == 1 % m]
    for r1, r2 in itertools.product(rng, repeat=2):
        for a, d in itertools.product(one, repeat=2):
            for b, c in itertools.product(rng, repeat=2):
                total += (a * d - b * c) % k == 1 % k
    return total


@pytest.mark.parametrize("m, k", [(2, 4), (2, 8), (3, 9)])
def test_stab_gamma_m_image_order(m, k):
    gens = [g.reduce(k) for g in stab_gamma_m((1, 0, 0), m).matrices()]
    assert order(GroupZm(3, k, gens)) == count_level_stabilizer_e1(k, m)


@pytest.mark.parametrize("m", [2, 3, 4, 6])
def test_gamma2_generators(m):
    gens = [g for g in gamma2_generators(m)]
    assert all(g.is_congruent_identity(m) and g.det() == 1 for g in gens)
    for k in (2, 3):
        img = GroupZm(2, m * k, [g.reduce(m * k) for g in gens])
        assert order(img) == sl_order_formula(2, m * k) // sl_order_formula(2, m)


# -- arithmetic groups --------------------------------------------------------------------


def test_orbit_h_unimodular():
    H = GroupZ(3, sl_generators(3), 2)
    ans = orbit_h((1, 0, 0), (1, 2, 2), H)
    assert ans and ans.matrix.act((1, 0, 0)) == (1, 2, 2)
    assert ans.word.verify(ans.matrix)


def test_orbit_h_scaled_vector():
    H = elementary_generators(3, 2)
    assert not orbit_h((1, 2, 3), (2, 4, 6), H)


def test_orbit_h_zero():
    H = elementary_generators(3, 2)
    assert orbit_h((0, 0, 0), (0, 0, 0), H)
    assert not orbit_h((0, 0, 0), (1, 0, 0), H)


def test_orbit_h_matches_criterion_for_congruence_group():
    # Gamma_{3,2} certified at level 4: orbits follow the Gamma_{3,2} criterion
    H = GroupZ(3, gamma_m_generators(3, 2).generators, 4)
    rng = random.Random(2)
    box = list(itertools.product(range(-3, 4), repeat=3))
    for _ in range(150):
        u, v = rng.choice(box), rng.choice(box)
        if not any(u) or not any(v):
            continue
        ans = orbit_h(u, v, H)
        assert ans.found == orbit_predicate(u, v, 2), (u, v)
        if ans:
            assert ans.matrix.act(u) == v and ans.word.verify(ans.matrix)


def test_orbit_h_random_images():
    H = elementary_generators(3, 2)
    rng = random.Random(6)
    for _ in range(20):
        pairs = [(rng.randrange(6), rng.choice([-1, 1])) for _ in range(8)]
        h = evaluate_int(Word.from_letters(pairs), H.generators)
        u = tuple(rng.randint(-5, 5) for _ in range(3))
        if not any(u):
            continue
        v = h.act(u)
        ans = orbit_h(u, v, H)
        assert ans and ans.matrix.act(u) == v
        assert is_member_z(H, ans.matrix) is not None and ans.word.verify(ans.matrix)


def lambda3_generators():
    x, y = sl_generators(2)
    return [transvection(3, 1, 2, 1), transvection(3, 1, 3, 1), block_embed(3, x), block_embed(3, y)]


def test_stabilizer_of_full_group():
    H = GroupZ(3, sl_generators(3), 2)
    st_ = stabilizer_h((1, 0, 0), H)
    assert all(g.act((1, 0, 0)) == (1, 0, 0) for g in st_.matrices())
    for k in (3, 5):
        a = GroupZm(3, k, [g.reduce(k) for g in st_.matrices()])
        b = GroupZm(3, k, [g.reduce(k) for g in lambda3_generators()])
        assert order(a) == order(b)
    assert order(GroupZm(3, 5, [g.reduce(5) for g in lambda3_generators()])) == 25 * 120


@pytest.mark.parametrize("u", [(0, 1, 0), (2, 0, 2), (0, 2, 4), (3, 1, 2)])
def test_stabilizer_images_match_residue_stabilizers(u):
    # for m | k, the image mod k of Stab_H(u) is the mod-k image of the stabilizer of
    # u mod a k in H mod a k
    H = GroupZ(3, [transvection(3, 1, 2, 1)] + gamma_m_generators(3, 4).generators, 4)
    a = math.gcd(*u)
    els = stabilizer_h(u, H)
    for x, e in els:
        assert x.act(u) == u and e.verify(x)
        assert is_member_z(H, x) is not None
    for k in (4, 8):
        got = GroupZm(3, k, [x.reduce(k) for x in els.matrices()])
        ref = vector_stabilizer(H.image(a * k), u)
        ref_k = GroupZm(3, k, [g.reduce(k) for g in
                               (evaluate_int(w, H.generators) for w in ref.gen_words)])
        assert order(got) == order(ref_k)
        assert all(is_member(got, g) for g in ref_k.generators)


def test_stabilizer_zero_vector():
    H = elementary_generators(3, 2)
    assert len(stabilizer_h((0, 0, 0), H)) == len(H.generators)


@pytest.mark.parametrize("u, lengths", [
    ((1, 0, 0, 0), (1728, 1)),
    ((3, 3, 9, 9), (256, 81)),
    ((6, 6, 6, 6), (16, 1296)),
])
def test_block_orbit_lengths_level_twelve(u, lengths):
    assert orbit_lengths(u, elementary_generators(4, 12)) == lengths


def test_stabilizer_entries_stay_small():
    H = elementary_generators(4, 12)
    els = stabilizer_h((3, 3, 9, 9), H)
    assert all(x.act((3, 3, 9, 9)) == (3, 3, 9, 9) for x in els.matrices())
    assert max(x.max_abs() for x in els.matrices()) < 10 ** 6
