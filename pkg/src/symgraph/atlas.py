"""Concrete groups: small constructors, the nine solvable heptavalent
stabilizer types, and curated generator files for the simple groups.

Conventions: ``D_n`` is the dihedral group of order ``2n`` (so ``D_7`` has
order 14); ``F_n`` is the Frobenius group of order ``n`` acting on 7 points
(``F_21 = Z_7:Z_3``, ``F_42 = Z_7:Z_6``).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

from .bsgs import PermGroup
from .errors import OrderMismatch, UnknownGroup, UnsupportedConstruction
from .perm import Permutation

DATA_PACKAGE = "symgraph.data"

logger = logging.getLogger(__name__)


# ---- constructors ---------------------------------------------------------

def make_cyclic(n: int) -> PermGroup:
    if n < 1:
        raise UnsupportedConstruction(f"cyclic group of order {n}")
    return PermGroup([Permutation.cycle(list(range(n)), n)], n, name=f"Z_{n}")


def make_dihedral(n: int) -> PermGroup:
    """D_n of order 2n on n points (n >= 3)."""
    if n < 3:
        raise UnsupportedConstruction(f"dihedral group D_{n} needs n >= 3")
    rot = Permutation.cycle(list(range(n)), n)
    refl = Permutation([(-i) % n for i in range(n)])
    return PermGroup([rot, refl], n, name=f"D_{n}")


def make_frobenius(n: int) -> PermGroup:
    """F_21 or F_42 as affine maps x -> a x + b on Z_7."""
    mult = {21: 2, 42: 3}  # 2 has order 3 mod 7, 3 is a primitive root
    if n not in mult:
        raise UnsupportedConstruction(f"Frobenius group F_{n}; only F_21 and F_42")
    shift = Permutation.cycle(list(range(7)), 7)
    scale = Permutation([(mult[n] * i) % 7 for i in range(7)])
    return PermGroup([shift, scale], 7, name=f"F_{n}")


def make_symmetric(n: int) -> PermGroup:
    if n < 1:
        raise UnsupportedConstruction(f"S_{n}")
    if n == 1:
        return PermGroup([], 1, name="S_1")
    gens = [Permutation.cycle(list(range(n)), n), Permutation.cycle([0, 1], n)]
    return PermGroup(gens, n, name=f"S_{n}")


def make_alternating(n: int) -> PermGroup:
    if n < 1:
        raise UnsupportedConstruction(f"A_{n}")
    if n < 3:
        return PermGroup([], n, name=f"A_{n}")
    long_cycle = list(range(n)) if n % 2 else list(range(1, n))
    gens = [Permutation.cycle([0, 1, 2], n), Permutation.cycle(long_cycle, n)]
    return PermGroup(gens, n, name=f"A_{n}")


def make_direct_product(a: PermGroup, b: PermGroup, name: str | None = None) -> PermGroup:
    """a x b acting on disjoint point sets: a on 0..da-1, b on da..da+db-1."""
    da, db = a.degree, b.degree
    n = da + db
    gens = [Permutation(list(g.images) + list(range(da, n))) for g in a.generators]
    gens += [Permutation(list(range(da)) + [da + j for j in g.images]) for g in b.generators]
    if name is None and a.name and b.name:
        name = f"{a.name}x{b.name}"
    return PermGroup(gens, n, name=name)


# ---- the nine stabilizer types -------------------------------------------

STABILIZER_TYPES = (
    "Z_7", "D_7", "F_21", "D_7xZ_2", "F_21xZ_3",
    "F_42", "F_42xZ_2", "F_42xZ_3", "F_42xZ_6",
)

STABILIZER_ORDERS = {
    "Z_7": 7, "D_7": 14, "F_21": 21, "D_7xZ_2": 28, "F_21xZ_3": 63,
    "F_42": 42, "F_42xZ_2": 84, "F_42xZ_3": 126, "F_42xZ_6": 252,
}

# labels that occur in the source computations but are not among the nine
EXTRA_TYPES = {"F_21xZ_6": 126}


@lru_cache(maxsize=None)
def stabilizer_model(label: str) -> PermGroup:
    """Faithful permutation model of a stabilizer type label."""
    if label == "Z_7":
        return make_cyclic(7)
    if label == "D_7":
        return make_dihedral(7)
    if label in ("F_21", "F_42"):
        return make_frobenius(int(label[2:]))
    if "x" in label:
        left, right = label.split("x")
        k = int(right[2:])
        base = stabilizer_model(left)
        return make_direct_product(base, make_cyclic(k), name=label)
    raise UnsupportedConstruction(f"unknown stabilizer type {label!r}")


def type_order(label: str) -> int:
    if label in STABILIZER_ORDERS:
        return STABILIZER_ORDERS[label]
    if label in EXTRA_TYPES:
        return EXTRA_TYPES[label]
    raise UnsupportedConstruction(f"unknown stabilizer type {label!r}")


# ---- orders used only for index arithmetic --------------------------------

def alternating_order(n: int) -> int:
    return math.factorial(n) // 2


ORDER_CONSTANTS = {
    "A_5": 60, "A_6": 360, "A_7": 2520, "A_8": 20160, "A_9": 181440,
    "S_5": 120, "S_6": 720, "S_7": 5040, "S_8": 40320,
    "(A_4xA_5):Z_2": 12 * 60 * 2,
    "(A_6xZ_3):Z_2": 360 * 3 * 2,
    "PSL(2,7)": 168, "PSL(2,8)": 504, "PSL(2,11)": 660,
    "PSU(3,3)": 6048, "PSU(4,2)": 25920, "PSU(4,2):Z_2": 51840,
    "PSU(4,3)": 3265920, "PSp(6,2)": 1451520,
    "Z_2^5:S_6": 32 * 720, "Z_2^4:A_5": 16 * 60,
    "PSL(3,4)": 20160, "M_11": 7920, "M_12": 95040,
}


# ---- group files ------------------------------------------------------------

@dataclass
class GroupSpec:
    name: str
    degree: int
    generators: list[str]
    expected_order: Optional[int] = None
    source_note: str = ""
    provenance: str = "data-file"

    @property
    def filename(self) -> str:
        safe = "".join(c if c.isalnum() else "_" for c in self.name).strip("_")
        return f"{safe}.json"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "degree": self.degree,
            "generators": list(self.generators),
            "expected_order": self.expected_order,
            "source_note": self.source_note,
        }

    @classmethod
    def from_json(cls, obj: dict) -> GroupSpec:
        if not isinstance(obj, dict) or not {"name", "degree", "generators"} <= obj.keys():
            raise ValueError("group file needs name, degree and generators")
        return cls(
            name=obj["name"],
            degree=int(obj["degree"]),
            generators=list(obj["generators"]),
            expected_order=obj.get("expected_order"),
            source_note=obj.get("source_note", ""),
        )

    def build(self, check_order: bool = True) -> PermGroup:
        gens = [Permutation.from_cycles(c, self.degree) for c in self.generators]
        grp = PermGroup(gens, self.degree, name=self.name)
        if check_order and self.expected_order is not None:
            if grp.order() != self.expected_order:
                raise OrderMismatch(
                    f"{self.name}: built order {grp.order()} != expected {self.expected_order}"
                )
        return grp


def dumps_group_file(spec: GroupSpec) -> str:
    return json.dumps(spec.to_json(), indent=2) + "\n"


def save_group_file(spec: GroupSpec, path) -> None:
    Path(path).write_text(dumps_group_file(spec))


def load_group_file(path) -> GroupSpec:
    return GroupSpec.from_json(json.loads(Path(path).read_text()))


def _read_spec(entry) -> Optional[GroupSpec]:
    try:
        return GroupSpec.from_json(json.loads(entry.read_text()))
    except (ValueError, KeyError, TypeError) as exc:
        # an unreadable file only takes out the group it would have defined
        logger.warning("skipping group file %s: %s", entry.name, exc)
        return None


def _data_files(data_dir=None) -> dict[str, GroupSpec]:
    root = resources.files(DATA_PACKAGE) if data_dir is None else Path(data_dir)
    out = {}
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json") and entry.name != "claims.json":
            spec = _read_spec(entry)
            if spec is not None:
                out[spec.name] = spec
    return out


def _constructed_specs() -> dict[str, GroupSpec]:
    specs = {}
    for n in (5, 6, 7, 8, 9, 12):
        for label, grp, order in (
            (f"A_{n}", make_alternating(n), alternating_order(n)),
            (f"S_{n}", make_symmetric(n), math.factorial(n)),
        ):
            specs[label] = GroupSpec(
                label, n, [g.to_cycles() for g in grp.generators], order,
                "natural action", provenance="constructed",
            )
    for label in STABILIZER_TYPES + tuple(EXTRA_TYPES):
        grp = stabilizer_model(label)
        specs[label] = GroupSpec(
            label, grp.degree, [g.to_cycles() for g in grp.generators], type_order(label),
            "stabilizer type model", provenance="constructed",
        )
    return specs


def atlas_specs(data_dir=None) -> dict[str, GroupSpec]:
    """Every named group: constructed ones plus the shipped data files.

    ``data_dir`` replaces the packaged data directory (used to test
    corrupted files)."""
    specs = _constructed_specs()
    specs.update(_data_files(data_dir))
    return specs


_CACHE: dict[tuple, PermGroup] = {}


def load_atlas_group(name: str, data_dir=None) -> PermGroup:
    """Build a named group, refusing one whose order disagrees with its file."""
    key = (name, str(data_dir))
    if key not in _CACHE:
        specs = atlas_specs(data_dir)
        if name not in specs:
            raise UnknownGroup(name)
        _CACHE[key] = specs[name].build()
    return _CACHE[key]


def is_simple_small(g: PermGroup, limit: int = 10**4) -> bool:
    """Simplicity test for order <= limit: the normal closure of one element
    from every nontrivial conjugacy class is the whole group."""
    from .smallgroup import ElementTable

    if g.order() > limit:
        raise ValueError(f"order {g.order()} above simplicity-check limit {limit}")
    if g.order() == 1:
        return False
    table = ElementTable.from_group(g)
    for cls in table.conjugacy_classes():
        rep = cls[0]
        if rep == table.identity:
            continue
        if len(table.normal_closure([rep])) != table.order:
            return False
    return True
