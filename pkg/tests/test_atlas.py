import json
import shutil
from collections import Counter
from importlib import resources

import pytest

from symgraph.atlas import (
    STABILIZER_ORDERS,
    STABILIZER_TYPES,
    GroupSpec,
    atlas_specs,
    dumps_group_file,
    is_simple_small,
    load_atlas_group,
    load_group_file,
    make_alternating,
    make_cyclic,
    make_dihedral,
    make_direct_product,
    make_frobenius,
    make_symmetric,
    stabilizer_model,
)
from symgraph.bsgs import PermGroup
from symgraph.errors import OrderMismatch, UnknownGroup, UnsupportedConstruction
from symgraph.smallgroup import ElementTable
from symgraph.subgroups import iso_type_identify

DATA = resources.files("symgraph.data")
DATA_FILES = sorted(p.name for p in DATA.iterdir() if p.name.endswith(".json") and p.name != "claims.json")


def test_constructor_examples():
    f21 = make_frobenius(21)
    assert (f21.order(), f21.degree) == (21, 7)
    assert make_dihedral(7).order() == 14
    assert make_alternating(7).order() == 2520
    assert make_frobenius(42).order() == 42
    assert make_cyclic(9).order() == 9
    assert make_symmetric(6).order() == 720


@pytest.mark.parametrize("call", [
    lambda: make_frobenius(20), lambda: make_dihedral(2), lambda: make_cyclic(0),
    lambda: make_alternating(0), lambda: stabilizer_model("Q_8"),
])
def test_unsupported_constructions(call):
    with pytest.raises(UnsupportedConstruction):
        call()


def test_direct_products():
    a = make_direct_product(make_frobenius(42), make_cyclic(2))
    assert (a.order(), a.degree) == (84, 9)
    assert make_direct_product(make_frobenius(42), make_cyclic(6)).order() == 252
    trivial = PermGroup([], 1)
    x = make_direct_product(make_frobenius(21), trivial, name="F_21x1")
    assert iso_type_identify(x) == "F_21"


def test_constructors_are_deterministic():
    for make in (lambda: make_alternating(9), lambda: make_frobenius(42), lambda: stabilizer_model.__wrapped__("F_42xZ_6")):
        assert [g.images for g in make().generators] == [g.images for g in make().generators]


def test_nine_types_orders_and_unique_sylow7():
    assert len(STABILIZER_TYPES) == 9
    for label in STABILIZER_TYPES:
        g = stabilizer_model(label)
        assert g.order() == STABILIZER_ORDERS[label]
        assert 252 % g.order() == 0
        t = ElementTable.from_group(g)
        # brute force: elements of order 7 come six to a subgroup
        assert (t.element_orders == 7).sum() == 6


@pytest.mark.parametrize("fname", DATA_FILES)
def test_group_files_round_trip_bit_exact(fname):
    text = DATA.joinpath(fname).read_text()
    spec = GroupSpec.from_json(json.loads(text))
    assert dumps_group_file(spec) == text
    g = spec.build()
    assert g.order() == spec.expected_order
    again = GroupSpec(spec.name, spec.degree, [p.to_cycles() for p in g.generators], spec.expected_order, spec.source_note)
    assert dumps_group_file(again) == text


def test_load_examples():
    g = load_atlas_group("PSL(2,7)")
    assert (g.degree, g.order()) == (8, 168)
    assert load_atlas_group("PSU(3,3)").order() == 6048
    assert load_atlas_group("PSL(2,8)").order() == 504 == 2**3 * 3**2 * 7
    with pytest.raises(UnknownGroup):
        load_atlas_group("PSL(2,9)")


def test_names_unique_and_expected_orders_hold():
    specs = atlas_specs()
    assert len(specs) == len(set(specs))
    for name, spec in specs.items():
        if spec.expected_order <= 10**7:
            assert load_atlas_group(name).order() == spec.expected_order


@pytest.mark.parametrize("name,expected", [
    ("PSL(2,7)", {1: 1, 2: 21, 3: 56, 4: 42, 7: 48}),
    ("PSL(2,8)", {1: 1, 2: 63, 3: 56, 7: 216, 9: 168}),
    # class sizes |G|/|C(x)| from centralizer orders 96, 108/9, 96/96/16, 12, 7/7, 8/8, 12/12
    ("PSU(3,3)", {1: 1, 2: 63, 3: 728, 4: 504, 6: 504, 7: 1728, 8: 1512, 12: 1008}),
])
def test_element_order_statistics(name, expected):
    t = ElementTable.from_group(load_atlas_group(name))
    assert dict(Counter(t.element_orders.tolist())) == expected


@pytest.mark.parametrize("name", ["A_5", "A_6", "A_7", "PSL(2,7)", "PSL(2,8)", "PSU(3,3)"])
def test_simple_groups_are_simple(name):
    assert is_simple_small(load_atlas_group(name))


@pytest.mark.parametrize("name", ["S_5", "F_42", "D_7xZ_2", "Z_7"])
def test_non_simple_groups_detected(name):
    g = load_atlas_group(name)
    assert is_simple_small(g) == (name == "Z_7")


def test_corrupted_file_refused(tmp_path):
    for fname in DATA_FILES:
        shutil.copy(DATA.joinpath(fname), tmp_path / fname)
    spec = load_group_file(tmp_path / "PSU_3_3.json")
    spec.expected_order = 6047
    (tmp_path / "PSU_3_3.json").write_text(dumps_group_file(spec))
    with pytest.raises(OrderMismatch):
        load_atlas_group("PSU(3,3)", data_dir=tmp_path)
    assert load_atlas_group("PSL(2,7)", data_dir=tmp_path).order() == 168


def test_unreadable_file_only_affects_its_group(tmp_path):
    shutil.copy(DATA.joinpath("PSL_2_7.json"), tmp_path / "PSL_2_7.json")
    (tmp_path / "broken.json").write_text("{not json")
    assert load_atlas_group("PSL(2,7)", data_dir=tmp_path).order() == 168
    with pytest.raises(UnknownGroup):
        load_atlas_group("PSU(3,3)", data_dir=tmp_path)
