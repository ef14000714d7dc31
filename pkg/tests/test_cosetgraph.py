import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symgraph.atlas import load_atlas_group, make_cyclic, make_direct_product
from symgraph.bsgs import PermGroup, normalizer_scan
from symgraph.cosetgraph import (
    arc_orbit_count,
    build_coset_graph,
    is_connected,
    quotient_graph,
    semiregular_parity,
    semiregular_permutation,
    valency,
)
from symgraph.errors import (
    FewerThanThreeOrbits,
    InvolutionConditionFailed,
    NotASubgroup,
    NotSemiregular,
    VertexBudgetExceeded,
)
from symgraph.perm import EVEN, ODD, Permutation
from symgraph.subgroups import feasible_elements, find_order7_element

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def psl27():
    g = load_atlas_group("PSL(2,7)")
    h = g.point_stabilizer(0)
    return g, h, feasible_elements(g, h)[0].g


@pytest.fixture(scope="module")
def k8(psl27):
    g, h, t = psl27
    return build_coset_graph(g, h, t, group_name="PSL(2,7)")


@pytest.fixture(scope="module")
def psl28():
    g = load_atlas_group("PSL(2,8)")
    x, _ = find_order7_element(g, seed=7)
    h = PermGroup([x], g.degree)
    return g, h, feasible_elements(g, h)


def _times_z2(g, h, t):
    """G x Z_2 with H x 1 and (t, z), all on degree + 2 points."""
    G = make_direct_product(g, make_cyclic(2))
    pad = lambda p, z: Permutation(list(p.images) + ([g.degree + 1, g.degree] if z else [g.degree, g.degree + 1]))
    H = PermGroup([pad(x, False) for x in h.generators], G.degree)
    z = PermGroup([pad(Permutation.identity(g.degree), True)], G.degree)
    return G, H, pad(t, True), z


def _element_rows(g):
    return [Permutation(r.tolist()) for r in g.elements_array()]


# ---- the complete graph K_8 -----------------------------------------------------

def test_k8(k8, psl27):
    g, _, _ = psl27
    assert k8.vertex_count == 8
    assert valency(k8) == 7
    assert is_connected(k8)
    assert arc_orbit_count(k8, g) == 1
    assert arc_orbit_count(k8, PermGroup([], g.degree)) == 56
    assert k8.is_symmetric_adjacency() and k8.group_preserves_edges()
    assert len(k8.edges()) == 28


def test_single_vertex():
    g = load_atlas_group("PSL(2,7)")
    cg = build_coset_graph(g, g, Permutation.identity(g.degree))
    assert cg.vertex_count == 1 and cg.edges() == [] and valency(cg) == 0
    assert is_connected(cg)


def test_disconnected_when_t_normalizes_h(psl28):
    g, h, _ = psl28
    n = normalizer_scan(g, h)
    assert n.order() == 14
    t = next(p for p in _element_rows(n) if p.order() == 2)
    cg = build_coset_graph(g, h, t)
    assert cg.vertex_count == 72 and valency(cg) == 1
    assert not is_connected(cg)
    assert PermGroup(list(h.generators) + [t], g.degree).order() < g.order()


def test_errors(psl27, psl28):
    g, h, t = psl27
    three = next(p for p in _element_rows(g) if p.order() == 3 and not h.contains(p))
    with pytest.raises(InvolutionConditionFailed):
        build_coset_graph(g, h, three)
    with pytest.raises(NotASubgroup):
        build_coset_graph(g, h, Permutation.cycle([0, 1], g.degree))
    with pytest.raises(NotASubgroup):
        build_coset_graph(h, g, t)
    G, H, found = psl28
    with pytest.raises(VertexBudgetExceeded):
        build_coset_graph(G, H, found[0].g, vertex_budget=50)


# ---- properties over random t --------------------------------------------------------

def _candidates(g, h):
    return [p for p in _element_rows(g) if h.contains(p * p)]


@pytest.fixture(scope="module")
def candidate_pool(psl27, psl28):
    g7, h7, _ = psl27
    g8, h8, _ = psl28
    return [(g7, h7, _candidates(g7, h7)), (g8, h8, _candidates(g8, h8))]


@given(st.integers(0, 1), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_coset_graph_invariants(candidate_pool, which, k):
    g, h, cands = candidate_pool[which]
    t = cands[k % len(cands)]
    cg = build_coset_graph(g, h, t)
    hrows = _element_rows(h)
    meet = sum(1 for x in hrows if h.contains(x.conjugate(t)))
    assert cg.vertex_count * h.order() == g.order()
    assert valency(cg) == (0 if h.contains(t) else h.order() // meet)
    assert cg.is_symmetric_adjacency()
    assert cg.group_preserves_edges()
    # brute-force neighbours of a random vertex H y: the cosets H t x y, x in H
    y = g.random_element(k)
    v = int(cg.vertex_of(np.asarray([y.images], dtype=np.uint8))[0])
    nb = {int(u) for u in cg.vertex_of(np.asarray([(t * x * y).images for x in hrows], dtype=np.uint8))}
    if h.contains(t):
        nb = set()
    assert nb == set(map(int, cg.neighbors[v]))
    gen = PermGroup(list(h.generators) + [t], g.degree).order() == g.order()
    assert is_connected(cg) == gen
    if not h.contains(t):
        assert arc_orbit_count(cg, g) == 1


# ---- quotients ---------------------------------------------------------------------

def test_quotient_by_trivial_group(k8):
    q = quotient_graph(k8, PermGroup([], k8.group.degree))
    assert q.orbit_count == 8 and q.valency == 7 and q.issues == []
    assert all(q.hypotheses.values())


def test_quotient_by_non_normal_involution(k8, psl27):
    g, _, _ = psl27
    inv = next(p for p in _element_rows(g) if p.order() == 2)
    q = quotient_graph(k8, PermGroup([inv], g.degree))
    assert q.orbit_count == 4 and q.valency == 3
    assert q.semiregular and not q.normal
    assert "arc_transitive" not in q.hypotheses


def test_quotient_positive_control_psl27(psl27):
    G, H, t, z = _times_z2(*psl27)
    cg = build_coset_graph(G, H, t)
    assert cg.vertex_count == 16 and valency(cg) == 7 and is_connected(cg)
    q = quotient_graph(cg, z)
    # 56 parent edges fold two-to-one onto the 28 edges of K_8
    assert q.orbit_count == 8 and q.valency == 7
    assert q.collapsed_edges == 28 and q.internal_edges == 0
    assert all(q.hypotheses.values()) and q.issues == []


def test_quotient_positive_control_psl28(psl28):
    g, h, found = psl28
    G, H, t, z = _times_z2(g, h, found[0].g)
    cg = build_coset_graph(G, H, t)
    assert cg.vertex_count == 144 and valency(cg) == 7 and is_connected(cg)
    q = quotient_graph(cg, z)
    assert q.orbit_count == 72 and q.valency == 7
    assert all(q.hypotheses.values())


def test_quotient_hypothesis_failures(k8, psl27):
    g, _, _ = psl27
    rows = _element_rows(g)
    three = next(p for p in rows if p.order() == 3)
    four = next(p for p in rows if p.order() == 4)
    q3 = quotient_graph(k8, PermGroup([three], g.degree))
    assert sorted(q3.orbit_sizes) == [1, 1, 3, 3] and not q3.semiregular
    assert any("orbit sizes" in s for s in q3.issues)
    q4 = quotient_graph(k8, PermGroup([four], g.degree))
    assert q4.orbit_sizes == [4, 4] and q4.semiregular
    assert q4.issues == ["2 orbits"]
    with pytest.raises(NotSemiregular):
        quotient_graph(k8, PermGroup([three], g.degree), strict=True)
    with pytest.raises(FewerThanThreeOrbits):
        quotient_graph(k8, PermGroup([four], g.degree), strict=True)


@pytest.mark.parametrize("m", range(1, 37))
def test_semiregular_parity_matches_explicit_permutation(m):
    for k in (1, 2, 7):
        assert semiregular_parity(m, k) == semiregular_permutation(m, k).parity()
    assert semiregular_parity(m) == (ODD if m % 2 == 0 else EVEN)


# ---- export ----------------------------------------------------------------------

def test_exports_match_fixtures(k8, psl28, tmp_path):
    k8.save(tmp_path / "k8.txt")
    assert (tmp_path / "k8.txt").read_bytes() == (FIXTURES / "k8.txt").read_bytes()
    g, h, found = psl28
    assert len(found) == 42
    cg = build_coset_graph(g, h, found[0].g, group_name="PSL(2,8)")
    assert cg.vertex_count == 72 and valency(cg) == 7 and is_connected(cg)
    cg.save(tmp_path / "g.json")
    assert (tmp_path / "g.json").read_bytes() == (FIXTURES / "psl28_z7.json").read_bytes()
    doc = json.loads((tmp_path / "g.json").read_text())
    assert doc["vertex_count"] == 72 and len(doc["edges"]) == 72 * 7 // 2
    assert doc["provenance"]["stabilizer_order"] == 7


def test_edge_list_text_format(k8):
    lines = k8.edge_list_text().splitlines()
    assert lines[0] == "0 1" and len(lines) == 28
    assert all(int(a) < int(b) for a, b in (ln.split() for ln in lines))
