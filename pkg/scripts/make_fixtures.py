"""Regenerate the coset graph fixtures in tests/fixtures/.

k8.txt          PSL(2,7) on cosets of a point stabilizer, first feasible t
psl28_z7.json   PSL(2,8) on cosets of a Z_7, first feasible t

Usage: python scripts/make_fixtures.py
"""

from pathlib import Path

from symgraph.atlas import load_atlas_group
from symgraph.bsgs import PermGroup
from symgraph.cosetgraph import build_coset_graph
from symgraph.subgroups import feasible_elements, find_order7_element

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def k8_graph():
    g = load_atlas_group("PSL(2,7)")
    h = g.point_stabilizer(0)
    t = feasible_elements(g, h)[0].g
    return build_coset_graph(g, h, t, group_name="PSL(2,7)")


def psl28_graph():
    g = load_atlas_group("PSL(2,8)")
    x, _ = find_order7_element(g, seed=7)
    h = PermGroup([x], g.degree)
    t = feasible_elements(g, h)[0].g
    return build_coset_graph(g, h, t, group_name="PSL(2,8)")


def main():
    FIXTURES.mkdir(exist_ok=True)
    k8_graph().save(FIXTURES / "k8.txt")
    psl28_graph().save(FIXTURES / "psl28_z7.json")


if __name__ == "__main__":
    main()
