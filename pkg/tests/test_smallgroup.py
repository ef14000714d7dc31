import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symgraph.atlas import load_atlas_group, make_cyclic, make_direct_product, stabilizer_model
from symgraph.bsgs import PermGroup
from symgraph.perm import Permutation
from symgraph.smallgroup import ElementTable, SmallGroup, find_isomorphism, power_rows, rows_orders


@pytest.fixture(scope="module")
def psl27():
    return ElementTable.from_group(load_atlas_group("PSL(2,7)"))


def test_lookup_round_trip_and_missing(psl27):
    idx = np.arange(psl27.order)
    assert (psl27.lookup(psl27.elements) == idx).all()
    odd = np.arange(8, dtype=np.uint8)[None, :].copy()
    odd[0, [0, 1]] = [1, 0]
    assert psl27.lookup(odd, missing_ok=True)[0] == -1
    with pytest.raises(KeyError):
        psl27.lookup(odd)
    assert psl27.perm(psl27.identity).is_identity()


def test_cayley_table_is_a_group_law(psl27):
    m = psl27.cayley
    e = psl27.identity
    assert (m[e] == np.arange(psl27.order)).all() and (m[:, e] == np.arange(psl27.order)).all()
    # every row and column is a permutation of the elements
    assert (np.sort(m, axis=1) == np.arange(psl27.order)).all()
    assert (np.sort(m, axis=0) == np.arange(psl27.order)[:, None]).all()
    rng = np.random.default_rng(1)
    a, b, c = rng.integers(0, psl27.order, (3, 2000))
    assert (m[m[a, b], c] == m[a, m[b, c]]).all()
    inv = psl27.inverses
    assert (m[np.arange(psl27.order), inv] == e).all()


def test_cayley_matches_permutation_product(psl27):
    for i, j in [(3, 17), (40, 2), (100, 167)]:
        expected = psl27.perm(i) * psl27.perm(j)
        assert psl27.perm(int(psl27.cayley[i, j])) == expected


def test_power_rows_and_orders_against_permutations(psl27):
    for k in (2, 3, 5):
        p = power_rows(psl27.elements, k)
        for i in (0, 11, 99):
            assert tuple(p[i]) == (psl27.perm(i) ** k).images
    assert [int(o) for o in rows_orders(psl27.elements[:30])] == [psl27.perm(i).order() for i in range(30)]


def test_conjugacy_classes_psl27(psl27):
    sizes = sorted(len(c) for c in psl27.conjugacy_classes())
    assert sizes == [1, 21, 24, 24, 42, 56]


def test_conj_table_direction(psl27):
    p = psl27.perm(5)
    tab = psl27.conj_table(p.images)
    for i in (1, 20, 77):
        assert psl27.perm(int(tab[i])) == ~p * psl27.perm(i) * p


@pytest.mark.parametrize("label,center,derived,ab", [
    ("F_21", 1, 7, (3,)),
    ("F_42", 1, 7, (2, 3)),
    ("D_7xZ_2", 2, 7, (2, 2)),
    ("F_42xZ_6", 6, 7, (2, 2, 3, 3)),
])
def test_structure_invariants(label, center, derived, ab):
    sg = SmallGroup.from_group(stabilizer_model(label))
    assert sg.center_order == center
    assert len(sg.derived_subgroup) == derived
    assert sg.abelianization_invariants() == ab


@given(st.lists(st.sampled_from([2, 3, 4, 5, 6, 8, 9]), min_size=1, max_size=3))
@settings(max_examples=25, deadline=None)
def test_abelian_invariants_of_cyclic_products(ns):
    g = make_cyclic(ns[0])
    for n in ns[1:]:
        g = make_direct_product(g, make_cyclic(n))
    # brute force: elementary divisors from the prime power parts of each n
    expected = []
    for n in ns:
        d, m = 2, n
        while m > 1:
            k = 1
            while m % d == 0:
                m //= d
                k *= d
            if k > 1:
                expected.append(k)
            d += 1
    sg = SmallGroup.from_group(g)
    assert sg.abelianization_invariants() == tuple(sorted(expected))


def _is_hom(model: SmallGroup, target: SmallGroup, phi: np.ndarray) -> bool:
    return (phi[model.mult] == target.mult[phi[:, None], phi[None, :]]).all() and len(set(phi.tolist())) == model.order


@pytest.mark.parametrize("label", ["F_21", "F_42", "D_7xZ_6", "F_42xZ_2"])
def test_find_isomorphism_to_a_relabelled_copy(label):
    g = stabilizer_model(label)
    rng = np.random.default_rng(3)
    s = Permutation(rng.permutation(g.degree).tolist())
    h = PermGroup([x.conjugate(s) for x in g.generators], g.degree)
    a, b = SmallGroup.from_group(g), SmallGroup.from_group(h)
    phi = find_isomorphism(a, b)
    assert phi is not None and _is_hom(a, b, phi)


def test_find_isomorphism_rejects_non_isomorphic():
    pairs = [("F_42", "D_7xZ_3"), ("F_21xZ_2", "D_7xZ_3"), ("F_42xZ_3", "F_42xZ_2")]
    for x, y in pairs:
        assert find_isomorphism(SmallGroup.from_group(stabilizer_model(x)),
                                SmallGroup.from_group(stabilizer_model(y))) is None
