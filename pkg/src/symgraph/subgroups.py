"""Subgroup censuses up to conjugacy.

Two independent routes:

* ``enumerate_solvable_subgroups`` runs the cyclic extension method over the
  full element table of a small ambient group: every solvable subgroup ``S``
  has a normal subgroup ``U`` of prime index, so ``S = <U, x>`` with
  ``x in N(U)`` and ``x^p in U``.  Extending one representative per class at
  each layer therefore reaches every class.

* ``subgroups_with_normal_sylow7`` handles target types with a unique Sylow
  7-subgroup of order 7.  Such an ``S`` lies in ``N_G(Q)`` for its own Sylow
  7-subgroup ``Q``, and all order-7 subgroups of ``G`` are conjugate when
  ``7^2`` does not divide ``|G|``.  So it is enough to fix one ``P``, build
  ``N = N_G(P)`` by an element scan, and extend from ``P`` inside ``N``.  Two
  such subgroups that are conjugate in ``G`` are conjugate by an element
  carrying ``P`` to ``P``, i.e. inside ``N``; deduplication happens there.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .atlas import STABILIZER_TYPES, stabilizer_model, type_order
from .bsgs import DEFAULT_SCAN_BUDGET, PermGroup, conjugate_rows, conjugate_rows_by, normalizer_scan
from .errors import (
    AmbientTooLarge,
    NotASubgroup,
    PreconditionN7,
    ScanBudgetExceeded,
    StabilizerOrderNotDivisibleBy7,
    TooLarge,
)
from .perm import Permutation
from .smallgroup import ElementTable, SmallGroup, find_isomorphism, power_rows

logger = logging.getLogger(__name__)

SMALL_AMBIENT_LIMIT = 10**4
ISO_LIMIT = 252
CYCLIC_EXTENSION = "cyclic-extension"
SYLOW7_LOCALIZED = "sylow7-localized"


@dataclass
class SubgroupClass:
    representative: PermGroup
    ambient: str
    iso_label: str
    class_size: int
    normalizer_order: int
    method: str

    @property
    def order(self) -> int:
        return self.representative.order()

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "iso_label": self.iso_label,
            "generators": [g.to_cycles() for g in self.representative.generators],
            "class_size": self.class_size,
            "normalizer_order": self.normalizer_order,
            "method": self.method,
        }


def _primes(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def cyclic_extension(
    table: ElementTable,
    seed: np.ndarray,
    max_order: int,
    target_order: Optional[int] = None,
) -> list[tuple[np.ndarray, int]]:
    """Classes of subgroups reachable from ``seed`` by prime-index steps.

    ``seed`` must be normal in every subgroup we want to reach (the trivial
    group, or a normal Sylow subgroup).  Returns ``(subgroup, class_size)``
    pairs, one per conjugacy class under the table's group, in order of
    discovery (increasing order, then by canonical key).  With
    ``target_order`` only orders dividing it are explored.
    """
    primes = _primes(table.order)

    def allowed(k: int) -> bool:
        if k > max_order or table.order % k:
            return False
        return target_order is None or target_order % k == 0

    seed = np.sort(np.asarray(seed, dtype=np.int64))
    seen: set[bytes] = set(table.conjugacy_orbit(seed))
    classes = [(seed, len(seen))]
    layer = [seed]
    while layer:
        found: dict[bytes, np.ndarray] = {}
        for U in layer:
            for S in _extensions(table, U, primes, allowed):
                found.setdefault(table.subgroup_key(S), S)
        next_layer = []
        for key in sorted(found):
            if key in seen:
                continue
            S = found[key]
            orbit = table.conjugacy_orbit(S)
            seen.update(orbit)
            classes.append((S, len(orbit)))
            next_layer.append(S)
        next_layer.sort(key=len)
        layer = next_layer
    return classes


def _extensions(table: ElementTable, U: np.ndarray, primes, allowed):
    """Distinct subgroups <U, x>, x in N(U) \\ U, x^p in U for a prime p."""
    umask = table.mask(U)
    nmask = table.normalizer_mask(U)
    cand = np.flatnonzero(nmask & ~umask)
    if not len(cand):
        return []
    rows = table.elements[cand]
    pmap = np.zeros(len(cand), dtype=np.int64)
    for p in primes:
        if not allowed(len(U) * p):
            continue
        pw = table.lookup(power_rows(rows, p))
        pmap[(pmap == 0) & umask[pw]] = p
    covered = np.zeros(table.order, dtype=bool)
    out = []
    ugens = table.small_generating_set(U)
    for x, p in zip(cand.tolist(), pmap.tolist()):
        if p == 0 or covered[x]:
            continue
        S = table.closure(ugens + [x])
        covered[S] = True
        out.append(S)
    return out


def _check_small(g: PermGroup, limit: int = SMALL_AMBIENT_LIMIT) -> None:
    if g.order() > limit:
        raise AmbientTooLarge(f"ambient order {g.order()} exceeds {limit}")


def enumerate_solvable_subgroups(
    g: PermGroup, max_order: int = 252, ambient_name: Optional[str] = None,
    label: bool = True, target_order: Optional[int] = None,
) -> list[SubgroupClass]:
    """All solvable subgroups of order <= max_order, one per conjugacy class.

    With ``target_order`` only orders dividing it are explored; a solvable
    group of that order is still reached, since its prime-index chain runs
    through divisors of its order."""
    _check_small(g)
    table = ElementTable.from_group(g)
    name = ambient_name or g.name or "G"
    out = []
    for S, size in cyclic_extension(table, np.array([table.identity]), max_order, target_order):
        rep = table.subgroup_perm_group(S)
        iso = iso_type_identify(rep) if label and len(S) <= ISO_LIMIT else f"order={len(S)}"
        out.append(SubgroupClass(rep, name, iso, size, table.order // size, CYCLIC_EXTENSION))
    return out


# ---- isomorphism types ----------------------------------------------------

@lru_cache(maxsize=None)
def _model(label: str) -> SmallGroup:
    return SmallGroup.from_group(stabilizer_model(label))


KNOWN_LABELS = STABILIZER_TYPES + ("F_21xZ_6",)


def fingerprint_label(sg: SmallGroup) -> str:
    fp = sg.fingerprint()
    hist = ",".join(f"{o}:{c}" for o, c in fp["element_orders"].items())
    ab = "x".join(str(x) for x in fp["abelianization"]) or "1"
    return (
        f"other(order={fp['order']}, orders={hist}, center={fp['center']}, "
        f"derived={fp['derived']}, ab={ab})"
    )


def iso_type_identify(h: PermGroup) -> str:
    """Label of ``h`` among the stabilizer types, or a fingerprint label."""
    if h.order() > ISO_LIMIT:
        raise TooLarge(f"order {h.order()} exceeds {ISO_LIMIT}")
    sg = SmallGroup.from_group(h)
    for label in KNOWN_LABELS:
        if type_order(label) == sg.order and find_isomorphism(_model(label), sg) is not None:
            return label
    return fingerprint_label(sg)


def sylow7_count(g: PermGroup) -> int:
    """Number of subgroups of order 7, for groups with 7 || |g| and order <= 10^4."""
    table = ElementTable.from_group(g)
    return int((table.element_orders == 7).sum()) // 6


def sylow7_centralizer_order(label: str) -> int:
    """Order of the centralizer of the Sylow 7-subgroup in the model of ``label``."""
    sg = _model(label)
    x = int(np.flatnonzero(sg.orders == 7)[0])
    return int(sg.centralizer_orders[x])


# ---- Sylow-7 localized census ----------------------------------------------

def find_order7_element(g: PermGroup, seed: int, max_draws: int = 100_000) -> tuple[Permutation, int]:
    """Uniform random search for an element of order 7; returns it and the draw count."""
    rng = random.Random(seed)
    for draw in range(1, max_draws + 1):
        x = g.random_element(rng)
        o = x.order()
        if o % 7 == 0:
            return x ** (o // 7), draw
    raise RuntimeError("no element of order 7 found")


@dataclass
class Sylow7Census:
    """Census data localized at one Sylow 7-subgroup ``P`` of an ambient group."""

    ambient: PermGroup
    ambient_name: str
    p_generator: Permutation
    normalizer: PermGroup
    table: ElementTable
    seed: int
    draws: int
    scan_seconds: float
    _class_keys: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, g: PermGroup, name: Optional[str] = None, seed: int = 7,
              budget: int = DEFAULT_SCAN_BUDGET, workers: int = 1) -> Sylow7Census:
        order = g.order()
        if order % 7:
            raise PreconditionN7(f"7 does not divide |G| = {order}")
        if order % 49 == 0:
            raise PreconditionN7("Sylow 7-subgroup larger than 7; order-7 subgroups need not be conjugate")
        if order > budget:
            raise ScanBudgetExceeded(f"order {order} exceeds scan budget {budget}")
        x, draws = find_order7_element(g, seed)
        t0 = time.perf_counter()
        N = normalizer_scan(g, PermGroup([x], g.degree), budget=budget, workers=workers)
        elapsed = time.perf_counter() - t0
        logger.info("N_G(P) of order %d for %s in %.1fs", N.order(), name or g.name, elapsed)
        table = ElementTable.from_group(N)
        return cls(g, name or g.name or "G", x, N, table, seed, draws, elapsed)

    @property
    def p_index(self) -> np.ndarray:
        return self.table.closure([self.table.index_of(self.p_generator)])

    def classes_of_order(self, target_order: int) -> list[tuple[np.ndarray, int]]:
        """N-classes of subgroups S with P <= S <= N and |S| = target_order.

        Returned sizes are N-class sizes."""
        if target_order not in self._class_keys:
            found = cyclic_extension(self.table, self.p_index, target_order, target_order)
            self._class_keys[target_order] = [(S, n) for S, n in found if len(S) == target_order]
        return self._class_keys[target_order]

    def census(self, target_type: str) -> list[SubgroupClass]:
        tord = type_order(target_type)
        out = []
        G = self.ambient.order()
        for S, nclass in self.classes_of_order(tord):
            rep = self.table.subgroup_perm_group(S)
            if iso_type_identify(rep) != target_type:
                continue
            norm = self.table.order // nclass
            out.append(SubgroupClass(rep, self.ambient_name, target_type, G // norm, norm, SYLOW7_LOCALIZED))
        return out

    def class_index(self, classes: list[SubgroupClass], s: PermGroup) -> Optional[int]:
        """Which of ``classes`` (from ``census``) contains a conjugate of ``s``.

        ``s`` is moved so that its Sylow 7-subgroup becomes ``P``; the
        remaining conjugacy question is decided inside ``N``."""
        y = _order7_in(s)
        a = sylow7_transporter(self.ambient, y, self.p_generator)
        moved = [gen.conjugate(a) for gen in s.generators]
        idx = self.table.lookup(np.asarray([m.images for m in moved], dtype=np.uint8), missing_ok=True)
        if (idx < 0).any():
            raise RuntimeError("conjugated subgroup left N_G(P)")
        S = self.table.closure(idx.tolist())
        orbit = set(self.table.conjugacy_orbit(S))
        for k, c in enumerate(classes):
            ridx = self.table.lookup(np.asarray([g.images for g in c.representative.generators], dtype=np.uint8))
            if self.table.subgroup_key(self.table.closure(ridx.tolist())) in orbit:
                return k
        return None


def _order7_in(s: PermGroup) -> Permutation:
    for gen in s.generators:
        o = gen.order()
        if o % 7 == 0:
            return gen ** (o // 7)
    x, _ = find_order7_element(s, seed=0)
    return x


def _alternating_or_symmetric(g: PermGroup) -> Optional[str]:
    n = g.degree
    o = g.order()
    if o == math.factorial(n):
        return "S"
    if n >= 3 and o == math.factorial(n) // 2:
        return "A"
    return None


def sylow7_transporter(g: PermGroup, y: Permutation, x: Permutation,
                       budget: int = DEFAULT_SCAN_BUDGET) -> Permutation:
    """An element a of g with a^-1 y a in <x>, for y, x of order 7.

    In A_n and S_n this is decided by cycle type: match the cycles of y with
    those of x, and if the result is odd while g = A_n, correct it by an odd
    element centralizing x.  Other ambients fall back to a scan."""
    kind = _alternating_or_symmetric(g)
    if y.cycle_type() != x.cycle_type():
        raise ValueError("elements of order 7 with different cycle types")
    if kind is not None:
        n = g.degree
        img = [0] * n
        ycyc = y.cycles(include_fixed=True)
        xcyc = x.cycles(include_fixed=True)
        ybylen = sorted(ycyc, key=len)
        xbylen = sorted(xcyc, key=len)
        for cy, cx in zip(ybylen, xbylen):
            for a, b in zip(cy, cx):
                img[a] = b
        a = Permutation(img)
        if kind == "A" and a.parity() == "odd":
            fixed = [c[0] for c in xcyc if len(c) == 1]
            sevens = [c for c in xcyc if len(c) == 7]
            if len(fixed) >= 2:
                fix = Permutation.cycle(fixed[:2], n)
            elif len(sevens) >= 2:
                # swapping two 7-cycles of x pointwise: seven transpositions
                c1, c2 = sevens[0], sevens[1]
                img2 = list(range(n))
                for u, v in zip(c1, c2):
                    img2[u], img2[v] = v, u
                fix = Permutation(img2)
            else:
                fix = None
            if fix is None or fix.parity() == "even":
                return _transporter_scan(g, y, x, budget)
            a = a * fix
        assert g.contains(a)
        return a
    return _transporter_scan(g, y, x, budget)


def _transporter_scan(g: PermGroup, y: Permutation, x: Permutation, budget: int) -> Permutation:
    powers = np.asarray([(x ** k).images for k in range(1, 7)], dtype=np.uint8)

    def hits(rows):
        c = conjugate_rows(rows, y.images)
        return (c[:, None, :] == powers[None, :, :]).all(axis=2).any(axis=1)

    g._check_budget(budget)
    for bi in range(g.num_blocks()):
        rows = g.block(bi, ordered=False)
        m = hits(rows)
        if m.any():
            return Permutation(rows[np.flatnonzero(m)[0]].tolist(), check=False)
    raise RuntimeError("order-7 subgroups are not conjugate")


def subgroups_with_normal_sylow7(
    g: PermGroup, target_type: str, ambient_name: Optional[str] = None,
    seed: int = 7, budget: int = DEFAULT_SCAN_BUDGET, census: Optional[Sylow7Census] = None,
) -> list[SubgroupClass]:
    """Census of subgroups of g isomorphic to ``target_type`` (n_7 = 1 types only)."""
    model = stabilizer_model(target_type)
    if sylow7_count(model) != 1 or type_order(target_type) % 49 == 0:
        raise PreconditionN7(f"{target_type} lacks a unique Sylow 7-subgroup of order 7")
    if census is None:
        census = Sylow7Census.build(g, ambient_name, seed=seed, budget=budget)
    return census.census(target_type)


# ---- feasible 2-elements -------------------------------------------------

@dataclass
class FeasibleElement:
    g: Permutation
    L: PermGroup
    checks: dict

    def to_json(self) -> dict:
        return {
            "element": self.g.to_cycles(),
            "element_order": self.g.order(),
            "L_generators": [x.to_cycles() for x in self.L.generators],
            "L_order": self.L.order(),
            "checks": dict(self.checks),
        }


def feasibility_checks(g: PermGroup, h: PermGroup, t: Permutation, valency: int = 7) -> dict:
    """The coset-graph conditions for (g, h, t), each computed from scratch."""
    o = t.order()
    table = ElementTable.from_group(PermGroup(h.generators, h.degree))
    # h meet h^t, with h^t = {t^-1 e t}
    conj = conjugate_rows_by(table.elements, t.images)
    meet = table.lookup(conj, missing_ok=True)
    meet = meet[meet >= 0]
    inside = table.mask(meet)
    moved = table.lookup(conjugate_rows_by(table.elements[meet], t.images), missing_ok=True)
    return {
        "two_element": o & (o - 1) == 0,
        "square_in_h": h.contains(t * t),
        "generates": PermGroup(list(h.generators) + [t], g.degree).order() == g.order(),
        "index": h.order() // len(meet),
        "index_is_valency": h.order() == valency * len(meet),
        "normalizes_meet": bool((moved >= 0).all() and inside[moved].all()),
    }


def is_feasible(checks: dict) -> bool:
    return all(checks[k] for k in ("two_element", "square_in_h", "generates", "index_is_valency", "normalizes_meet"))


def index7_subgroup_classes(h: PermGroup) -> list[PermGroup]:
    """Representatives of h-classes of subgroups of index 7 in h."""
    table = ElementTable.from_group(h)
    target = table.order // 7
    reps = []
    for S, _ in cyclic_extension(table, np.array([table.identity]), target, target):
        if len(S) == target:
            reps.append(table.subgroup_perm_group(S))
    return reps


def feasible_elements(
    g: PermGroup, h: PermGroup, budget: int = DEFAULT_SCAN_BUDGET, workers: int = 1,
    stats: Optional[dict] = None,
) -> list[FeasibleElement]:
    """Feasible 2-elements for (g, h), valency 7.

    For each h-class of index-7 subgroups L, scan N_g(L) for 2-elements t
    with t^2 in h, |h : h cap h^t| = 7 and <h, t> = g.  Survivors are reported
    raw: no deduplication up to coset-graph isomorphism."""
    if not h.is_subgroup_of(g):
        raise NotASubgroup("h is not a subgroup of g")
    ho = h.order()
    if ho % 7:
        raise StabilizerOrderNotDivisibleBy7(f"|h| = {ho} is not divisible by 7")
    if ho > ISO_LIMIT:
        raise TooLarge(f"|h| = {ho} exceeds {ISO_LIMIT}")
    g._check_budget(budget)
    htable = ElementTable.from_group(h)
    gorder = g.order()
    out = []
    info = {"L_classes": [], "candidates": 0}
    for L in index7_subgroup_classes(h):
        NL = normalizer_scan(g, L, budget=budget, workers=workers)
        rows = NL.elements_array(budget)
        # 2-elements: order divides the largest power of 2 <= degree
        k = 1
        while 2 * k <= g.degree:
            k *= 2
        two = (power_rows(rows, k) == np.arange(g.degree)).all(axis=1)
        rows = rows[two]
        sq = htable.lookup(power_rows(rows, 2), missing_ok=True) >= 0
        rows = rows[sq]
        survivors = []
        for r in rows:
            t = Permutation(r.tolist(), check=False)
            meet = htable.lookup(conjugate_rows_by(htable.elements, t.images), missing_ok=True)
            if 7 * int((meet >= 0).sum()) != ho:
                continue
            if PermGroup(list(h.generators) + [t], g.degree).order() != gorder:
                continue
            checks = feasibility_checks(g, h, t)
            if is_feasible(checks):
                survivors.append(FeasibleElement(t, L, checks))
        info["L_classes"].append({
            "L_order": L.order(), "normalizer_order": NL.order(),
            "two_elements_with_square_in_h": int(len(rows)),
            "survivors": len(survivors),
        })
        out.extend(sorted(survivors, key=lambda f: f.g))
    if stats is not None:
        stats.update(info)
    return out
