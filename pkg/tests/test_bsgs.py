import itertools
import math
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symgraph.atlas import atlas_specs, load_atlas_group, make_alternating, make_cyclic, make_symmetric
from symgraph.bsgs import PermGroup, centralizer_scan, conjugate_rows, conjugate_rows_by, normalizer_scan
from symgraph.errors import ArithmeticOverflow, DegreeMismatch, NotASubgroup, ScanBudgetExceeded
from symgraph.perm import Permutation


def closure_brute(gens, n):
    """All elements generated by ``gens`` by plain breadth-first multiplication."""
    e = tuple(range(n))
    seen = {e}
    queue = [e]
    for a in queue:
        for g in gens:
            b = tuple(g.images[i] for i in a)  # a then g
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return seen


SEVEN_CYCLE_12 = Permutation.cycle(list(range(7)), 12)


# ---- order and membership --------------------------------------------------

def test_order_examples():
    assert make_alternating(12).order() == 239500800 == math.factorial(12) // 2
    assert PermGroup([Permutation.cycle(list(range(7)), 7)]).order() == 7
    assert PermGroup([], 5).order() == 1


@pytest.mark.parametrize("name,q,formula", [
    ("PSU(3,3)", 3, lambda q: q**3 * (q**2 - 1) * (q**3 + 1) // math.gcd(3, q + 1)),
    ("PSU(4,3)", 3, lambda q: q**6 * (q**2 - 1) * (q**3 + 1) * (q**4 - 1) // math.gcd(4, q + 1)),
    ("PSL(2,7)", 7, lambda q: q * (q**2 - 1) // math.gcd(2, q - 1)),
    ("PSL(2,8)", 8, lambda q: q * (q**2 - 1) // math.gcd(2, q - 1)),
])
def test_atlas_orders_match_formulas(name, q, formula):
    assert load_atlas_group(name).order() == formula(q)


@pytest.mark.parametrize("name", ["PSU(3,3)", "PSU(4,3)", "PSL(2,8)"])
def test_order_independent_of_base_and_generator_order(name):
    g = load_atlas_group(name)
    rng = random.Random(11)
    gens = list(g.generators)
    rng.shuffle(gens)
    base = rng.sample(range(g.degree), 3)
    other = PermGroup(gens, g.degree).build_bsgs(initial_base=base)
    assert other.order() == g.order()
    # random extra generators from the group leave the order unchanged
    extra = PermGroup(gens + [g.random_element(rng) for _ in range(3)], g.degree)
    assert extra.order() == g.order()


def test_order_overflow_is_reported():
    with pytest.raises(ArithmeticOverflow):
        make_symmetric(21).order()


def test_contains_examples():
    a12 = make_alternating(12)
    assert a12.contains(Permutation.identity(12))
    assert not a12.contains(Permutation.cycle([0, 1], 12))
    assert a12.contains(SEVEN_CYCLE_12)
    with pytest.raises(DegreeMismatch):
        a12.contains(Permutation.identity(11))


def test_strong_generators_and_random_products_strip_to_identity():
    for name in ("PSU(3,3)", "PSL(2,8)", "A_9"):
        g = load_atlas_group(name)
        b = g.bsgs
        assert math.prod(len(o) for o in b.orbits) == g.order()
        for s in b.strong_generators:
            assert b.sift(s)[0] == tuple(range(g.degree))
        rng = random.Random(3)
        for _ in range(20):
            w = Permutation.identity(g.degree)
            for _ in range(15):
                w = w * rng.choice(g.generators)
            assert g.contains(w)


def test_contains_matches_brute_force_on_s4_subgroups():
    n = 4
    allp = [Permutation(p) for p in itertools.permutations(range(n))]
    rng = random.Random(1)
    for _ in range(20):
        gens = rng.sample(allp, rng.randint(1, 2))
        elems = closure_brute(gens, n)
        g = PermGroup(gens, n)
        assert g.order() == len(elems)
        for p in allp:
            assert g.contains(p) == (p.images in elems)
        rows = np.array([p.images for p in allp], dtype=np.uint8)
        assert g.contains_rows(rows).tolist() == [p.images in elems for p in allp]


# ---- enumeration -----------------------------------------------------------

def test_enumerate_small_groups():
    z7 = make_cyclic(7)
    els = list(z7.enumerate_elements())
    assert len(els) == 7 and els[0].is_identity()
    s3 = make_symmetric(3)
    els = list(s3.enumerate_elements())
    assert len(els) == 6 == len(set(els))


def _base_images(g, p):
    return tuple(p.images[b] for b in g.bsgs.base)


@pytest.mark.parametrize("name", ["S_5", "PSL(2,7)", "A_7", "PSU(3,3)"])
def test_enumeration_is_lexicographic_and_restartable(name):
    g = load_atlas_group(name)
    els = list(g.enumerate_elements())
    assert len(els) == g.order() == len(set(els))
    assert els[0].is_identity()
    keys = [_base_images(g, p) for p in els]
    assert keys == sorted(keys)
    assert all(g.contains(p) for p in els[:: max(1, len(els) // 50)])
    for start in (0, 1, len(els) // 3, len(els) - 1):
        tail = list(g.enumerate_elements(start, start + 5))
        assert tail == els[start:start + 5]
        assert g.element_at(start) == els[start]


@pytest.mark.parametrize("name", ["A_9", "S_9"])
def test_full_enumeration_up_to_a_million(name):
    g = load_atlas_group(name)
    rows = g.elements_array(budget=10**6)
    assert len(rows) == g.order()
    assert len(np.unique(rows, axis=0)) == g.order()
    assert g.contains_rows(rows).all()


def test_a12_enumeration_sampled():
    g = make_alternating(12)
    M, nb = g.block_size(), g.num_blocks()
    assert M * nb == 239500800
    rng = np.random.default_rng(0)
    digests = set()
    for bi in sorted(rng.choice(nb, size=12, replace=False).tolist()):
        rows = g.block(bi)
        assert len(rows) == M
        assert len(np.unique(rows, axis=0)) == M
        assert g.contains_rows(rows[::97]).all()
        keys = rows[:, g.bsgs.base]
        assert (np.diff(keys.astype(np.int64) @ (256 ** np.arange(len(g.bsgs.base))[::-1])) > 0).all()
        digests.add(hash(rows.tobytes()))
        k = int(rng.integers(M))
        assert g.element_at(bi * M + k).images == tuple(rows[k].tolist())
    assert len(digests) == 12


def test_scan_budget():
    with pytest.raises(ScanBudgetExceeded):
        make_alternating(12).elements_array(budget=10**6)
    with pytest.raises(ScanBudgetExceeded):
        list(make_alternating(14).enumerate_elements())


# ---- orbits and stabilizers ------------------------------------------------

def test_orbit_stabilizer_examples():
    a12 = make_alternating(12)
    assert a12.orbit(0) == list(range(12))
    assert a12.point_stabilizer(0).order() == 19958400
    c = PermGroup([SEVEN_CYCLE_12], 12)
    assert c.orbit(8) == [8]
    assert c.point_stabilizer(8).order() == 7
    assert load_atlas_group("PSL(2,7)").point_stabilizer(0).order() == 21


def _brute_orbit(g, point):
    return sorted(closure_orbit(g, point))


def closure_orbit(g, point):
    seen = {point}
    queue = [point]
    for a in queue:
        for s in g.generators:
            b = s.images[a]
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return seen


def test_orbit_stabilizer_and_lagrange_on_atlas_groups():
    for name, spec in atlas_specs().items():
        if spec.expected_order > 10**6:
            continue
        g = load_atlas_group(name)
        for point in range(g.degree):
            orb = g.orbit(point)
            assert orb == _brute_orbit(g, point)
            stab = g.point_stabilizer(point)
            assert len(orb) * stab.order() == g.order(), (name, point)
            assert stab.is_subgroup_of(g)
            assert g.order() % stab.order() == 0
            assert all(s.images[point] == point for s in stab.generators)


# ---- normalizers and centralizers -------------------------------------------

def test_normalizer_and_centralizer_in_s7_match_brute_force():
    s7 = make_symmetric(7)
    x = Permutation.cycle(list(range(7)), 7)
    h = PermGroup([x], 7)
    hel = closure_brute([x], 7)
    norm = [p for p in map(Permutation, itertools.permutations(range(7)))
            if all((~p * y * p).images in hel for y in [x])]
    cent = [p for p in map(Permutation, itertools.permutations(range(7))) if p * x == x * p]
    N = normalizer_scan(s7, h)
    C = centralizer_scan(s7, x)
    assert N.order() == len(norm) == 42
    assert C.order() == len(cent) == 7
    assert all(N.contains(p) for p in norm)
    assert h.is_subgroup_of(N) and C.is_subgroup_of(N)


def test_normalizer_trivial_cases():
    g = load_atlas_group("PSL(2,7)")
    assert normalizer_scan(g, g).order() == g.order()
    assert centralizer_scan(g, Permutation.identity(8)).order() == g.order()
    with pytest.raises(NotASubgroup):
        normalizer_scan(make_alternating(7), PermGroup([Permutation.cycle([0, 1], 7)], 7))


def test_normalizer_of_seven_cycle_in_a12_by_counting():
    # N_{S_12}(<x>) = F_42 x S_5; its even elements form N_{A_12}(<x>)
    x = SEVEN_CYCLE_12
    mult3 = Permutation([(3 * i) % 7 for i in range(7)] + list(range(7, 12)))
    n_s12 = PermGroup([x, mult3, Permutation.cycle([7, 8, 9, 10, 11], 12), Permutation.cycle([7, 8], 12)], 12)
    assert n_s12.order() == 42 * 120
    assert normalizer_scan(make_symmetric(12).subgroup(n_s12.generators), PermGroup([x], 12)).order() == 5040
    rows = n_s12.elements_array()
    perms = [Permutation(r.tolist()) for r in rows]
    even = [p for p in perms if p.parity() == "even"]
    assert len(even) == 2520
    assert sum(1 for p in even if p * x == x * p) == 420


@pytest.mark.slow
def test_centralizer_of_seven_cycle_in_a12_full_scan():
    c = centralizer_scan(make_alternating(12), SEVEN_CYCLE_12)
    assert c.order() == 420


def test_scan_results_closed_and_worker_independent():
    g = load_atlas_group("PSU(3,3)")
    x = g.random_element(5)
    h = PermGroup([x], g.degree)
    n1 = normalizer_scan(g, h)
    n4 = normalizer_scan(g, h, workers=4)
    assert n1.same_group(n4)
    c = centralizer_scan(g, x)
    assert c.is_subgroup_of(n1) and h.is_subgroup_of(c)
    assert n1.order() % c.order() == 0
    rows = n1.elements_array()
    prods = Permutation(rows[3].tolist()) * Permutation(rows[7].tolist())
    assert n1.contains(prods) and n1.contains(~prods)


@given(st.integers(0, 10**6))
def test_conjugate_rows_directions(seed):
    rng = random.Random(seed)
    g = load_atlas_group("PSL(2,8)")
    x, s = g.random_element(rng), g.random_element(rng)
    rows = np.asarray([x.images], dtype=np.uint8)
    assert tuple(conjugate_rows(rows, s.images)[0]) == (~x * s * x).images
    assert tuple(conjugate_rows_by(rows, s.images)[0]) == (~s * x * s).images


# ---- random elements ---------------------------------------------------------

def test_random_element_membership_and_determinism():
    g = load_atlas_group("PSU(3,3)")
    draws = [g.random_element(seed) for seed in (1, 2, 3)]
    assert all(g.contains(d) for d in draws)
    assert g.random_element(2) == draws[1]
    assert PermGroup([], 6).random_element(9).is_identity()


def _class_size(n, ctype):
    m = Counter(ctype)
    return math.factorial(n) // math.prod(k**c * math.factorial(c) for k, c in m.items())


def test_random_element_uniform_on_s5():
    g = make_symmetric(5)
    rng = random.Random(77)
    N = 100_000
    counts = Counter(g.random_element(rng).cycle_type() for _ in range(N))
    types = {p.cycle_type() for p in map(Permutation, itertools.permutations(range(5)))}
    assert set(counts) == types
    for ctype in types:
        p = _class_size(5, ctype) / 120
        sigma = math.sqrt(N * p * (1 - p))
        assert abs(counts[ctype] - N * p) <= 3 * sigma, (ctype, counts[ctype], N * p)
