"""Permutation groups backed by a base and strong generating set.

The stabilizer chain is built by deterministic Schreier-Sims with explicit
transversals, base points chosen as the smallest point moved by the current
level's generators.  A randomized sift of random products afterwards guards
against implementation bugs.

Element scans (normalizers, centralizers, full enumeration) work on numpy
blocks: the stabilizer chain is split at a level ``s`` so that every block is
``{h * P : h in G^(s)}`` for one prefix transversal product ``P``.  Blocks are
contiguous ranges of the lexicographic order of base-image tuples, so a scan
is a set union over independent blocks.
"""

from __future__ import annotations

import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    ArithmeticOverflow,
    DegreeMismatch,
    NotASubgroup,
    ScanBudgetExceeded,
)
from .perm import Permutation

logger = logging.getLogger(__name__)

DEFAULT_SCAN_BUDGET = 250_000_000
BLOCK_TARGET = 1 << 17
_INT64_MAX = (1 << 63) - 1

Tup = tuple


def _mul(p: Tup, q: Tup) -> Tup:
    return tuple([q[j] for j in p])


def _inv(p: Tup) -> Tup:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def _is_id(p: Tup) -> bool:
    return all(i == j for i, j in enumerate(p))


def _first_moved(p: Tup) -> int:
    for i, j in enumerate(p):
        if i != j:
            return i
    return -1


@dataclass
class BSGS:
    """Stabilizer chain.  ``transversals[i][beta]`` maps ``base[i]`` to ``beta``."""

    degree: int
    base: list[int]
    strong_generators: list[Tup]
    orbits: list[list[int]]
    transversals: list[dict[int, Tup]]
    _arrays: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return math.prod(len(o) for o in self.orbits)

    def sift(self, g: Tup) -> tuple[Tup, int]:
        """Strip ``g``; return the residue and the level where stripping stopped."""
        for i, b in enumerate(self.base):
            beta = g[b]
            u = self.transversals[i].get(beta)
            if u is None:
                return g, i
            g = _mul(g, _inv(u))
        return g, len(self.base)

    def contains(self, g: Tup) -> bool:
        h, lvl = self.sift(g)
        return lvl == len(self.base) and _is_id(h)

    # ---- numpy views -------------------------------------------------
    def level_arrays(self):
        """Per level: (base point, orbit mask, inverse transversal table flat,
        transversal table as (orbit_len, n) array in sorted orbit order)."""
        if "levels" not in self._arrays:
            n = self.degree
            ident = np.arange(n, dtype=np.uint8)
            levels = []
            for i, b in enumerate(self.base):
                mask = np.zeros(n, dtype=bool)
                tinv = np.tile(ident, (n, 1))
                orbit = self.orbits[i]
                tr = np.empty((len(orbit), n), dtype=np.uint8)
                for k, beta in enumerate(orbit):
                    u = self.transversals[i][beta]
                    mask[beta] = True
                    tinv[beta] = _inv(u)
                    tr[k] = u
                levels.append((b, mask, tinv.reshape(-1).copy(), tr))
            self._arrays["levels"] = levels
        return self._arrays["levels"]

    def contains_rows(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized membership test for an (m, n) uint8 array of permutations."""
        n = self.degree
        R = np.asarray(rows, dtype=np.intp)
        ok = np.ones(R.shape[0], dtype=bool)
        for b, mask, tinv_flat, _ in self.level_arrays():
            img = R[:, b]
            ok &= mask[img]
            R = tinv_flat[img[:, None] * n + R]
        ok &= (R == np.arange(n)).all(axis=1)
        return ok

    def stabilizer_elements(self, level: int) -> np.ndarray:
        """All elements of the stabilizer of base[:level], as (m, n) uint8."""
        key = ("stab", level)
        if key not in self._arrays:
            block = np.arange(self.degree, dtype=np.uint8)[None, :]
            for _, _, _, tr in reversed(self.level_arrays()[level:]):
                # every element of G^(i) is h * u with h in G^(i+1), u in U_i
                block = tr[:, block].transpose(1, 0, 2).reshape(-1, self.degree)
            self._arrays[key] = block
        return self._arrays[key]


def schreier_sims(
    generators: Sequence[Tup],
    degree: int,
    initial_base: Sequence[int] = (),
) -> BSGS:
    """Deterministic Schreier-Sims.

    Base points beyond ``initial_base`` are chosen as the smallest point moved
    by a new strong generator, so the result depends only on the generator
    order and ``initial_base``.
    """
    gens = [g for g in generators if not _is_id(g)]
    base = list(initial_base)
    strong = list(gens)
    for g in gens:
        if all(g[b] == b for b in base):
            base.append(_first_moved(g))

    def level_gens(i: int) -> list[Tup]:
        return [s for s in strong if all(s[b] == b for b in base[:i])]

    def orbit_transversal(i: int, sgens: list[Tup]) -> dict[int, Tup]:
        b = base[i]
        tr = {b: tuple(range(degree))}
        queue = [b]
        for beta in queue:
            u = tr[beta]
            for s in sgens:
                gamma = s[beta]
                if gamma not in tr:
                    tr[gamma] = _mul(u, s)
                    queue.append(gamma)
        return tr

    level_s = [level_gens(i) for i in range(len(base))]
    trans = [orbit_transversal(i, level_s[i]) for i in range(len(base))]

    def sift_from(g: Tup, start: int) -> tuple[Tup, int]:
        for j in range(start, len(base)):
            u = trans[j].get(g[base[j]])
            if u is None:
                return g, j
            g = _mul(g, _inv(u))
        return g, len(base)

    i = len(base) - 1
    while i >= 0:
        restart = False
        tr_i = trans[i]
        inv_cache: dict[int, Tup] = {}
        for beta, u_beta in list(tr_i.items()):
            for s in level_s[i]:
                gamma = s[beta]
                if gamma not in inv_cache:
                    inv_cache[gamma] = _inv(tr_i[gamma])
                sg = _mul(_mul(u_beta, s), inv_cache[gamma])
                if _is_id(sg):
                    continue
                h, j = sift_from(sg, i + 1)
                if j < len(base) or not _is_id(h):
                    strong.append(h)
                    if j == len(base):
                        base.append(_first_moved(h))
                        level_s.append([])
                        trans.append({})
                    for lvl in range(i + 1, j + 1):
                        level_s[lvl].append(h)
                        trans[lvl] = orbit_transversal(lvl, level_s[lvl])
                    i = j
                    restart = True
                    break
            if restart:
                break
        if not restart:
            i -= 1

    orbits = [sorted(t) for t in trans]
    return BSGS(degree, base, strong, orbits, trans)


class PermGroup:
    """A permutation group given by generators, with a lazily built BSGS."""

    def __init__(
        self,
        generators: Iterable[Permutation],
        degree: int | None = None,
        name: str | None = None,
    ):
        gens = list(generators)
        if degree is None:
            if not gens:
                raise ValueError("degree required for an empty generator list")
            degree = gens[0].degree
        for g in gens:
            if g.degree != degree:
                raise DegreeMismatch(f"generator degree {g.degree} != {degree}")
        if not gens:
            gens = [Permutation.identity(degree)]
        self.degree = degree
        self.generators: list[Permutation] = gens
        self.name = name
        self._bsgs: BSGS | None = None

    def __repr__(self) -> str:
        label = self.name or "PermGroup"
        return f"<{label} degree={self.degree} ngens={len(self.generators)}>"

    # ---- construction ------------------------------------------------
    @property
    def bsgs(self) -> BSGS:
        if self._bsgs is None:
            self.build_bsgs()
        return self._bsgs

    def build_bsgs(self, initial_base: Sequence[int] = (), verify: bool = True) -> PermGroup:
        """Build the chain; after ``initial_base`` each base point is the
        smallest point moved by the stabilizer of the earlier ones."""
        prefix = list(initial_base)
        chain = schreier_sims([g.images for g in self.generators], self.degree, prefix)
        while len(prefix) < len(chain.base):
            level = [s for s in chain.strong_generators if all(s[b] == b for b in prefix)]
            m = min(_first_moved(s) for s in level)
            prefix.append(m)
            if chain.base[len(prefix) - 1] != m:
                chain = schreier_sims(chain.strong_generators, self.degree, prefix)
        self._bsgs = chain
        if verify:
            self._verify_random(seed=0x5EED)
        return self

    def _verify_random(self, seed: int, rounds: int = 12) -> None:
        rng = random.Random(seed)
        gens = [g.images for g in self.generators]
        for _ in range(rounds):
            g = tuple(range(self.degree))
            for _ in range(2 * len(gens) + 3):
                g = _mul(g, rng.choice(gens))
            if not self._bsgs.contains(g):
                raise RuntimeError("BSGS failed randomized verification")

    # ---- basic queries -----------------------------------------------
    def order(self) -> int:
        o = self.bsgs.order
        if o > _INT64_MAX:
            raise ArithmeticOverflow(f"group order {o} exceeds int64 range")
        return o

    def __len__(self) -> int:
        return self.order()

    def is_trivial(self) -> bool:
        return self.order() == 1

    def contains(self, p: Permutation) -> bool:
        if p.degree != self.degree:
            raise DegreeMismatch(f"{p.degree} != {self.degree}")
        return self.bsgs.contains(p.images)

    __contains__ = contains

    def contains_rows(self, rows: np.ndarray) -> np.ndarray:
        return self.bsgs.contains_rows(rows)

    def is_subgroup_of(self, other: PermGroup) -> bool:
        return self.degree == other.degree and all(other.contains(g) for g in self.generators)

    def same_group(self, other: PermGroup) -> bool:
        return self.order() == other.order() and self.is_subgroup_of(other)

    def is_normal_in(self, other: PermGroup) -> bool:
        return all(
            self.contains(s.conjugate(x)) for s in self.generators for x in other.generators
        )

    def subgroup(self, generators: Iterable[Permutation], name=None) -> PermGroup:
        """Subgroup generated by ``generators``; members are checked."""
        gens = list(generators)
        for g in gens:
            if not self.contains(g):
                raise NotASubgroup(f"{g} is not in {self!r}")
        return PermGroup(gens, self.degree, name)

    def closure(self, extra: Iterable[Permutation]) -> PermGroup:
        return PermGroup(list(self.generators) + list(extra), self.degree)

    def orbit(self, point: int) -> list[int]:
        if not 0 <= point < self.degree:
            raise ValueError(f"point {point} out of range")
        seen = {point}
        queue = [point]
        for a in queue:
            for g in self.generators:
                b = g.images[a]
                if b not in seen:
                    seen.add(b)
                    queue.append(b)
        return sorted(seen)

    def orbits(self) -> list[list[int]]:
        seen: set[int] = set()
        out = []
        for p in range(self.degree):
            if p not in seen:
                o = self.orbit(p)
                seen.update(o)
                out.append(o)
        return out

    def point_stabilizer(self, point: int) -> PermGroup:
        if not 0 <= point < self.degree:
            raise ValueError(f"point {point} out of range")
        chain = schreier_sims([g.images for g in self.generators], self.degree, [point])
        gens = [Permutation(s, check=False) for s in chain.strong_generators if s[point] == point]
        return PermGroup(gens, self.degree)

    def random_element(self, seed=None) -> Permutation:
        """Uniform element: independent uniform picks from each transversal."""
        rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        b = self.bsgs
        g = tuple(range(self.degree))
        for i in range(len(b.base)):
            beta = b.orbits[i][rng.randrange(len(b.orbits[i]))]
            g = _mul(b.transversals[i][beta], g)
        return Permutation(g, check=False)

    # ---- enumeration -------------------------------------------------
    def _check_budget(self, budget: int) -> None:
        if self.order() > budget:
            raise ScanBudgetExceeded(f"order {self.order()} exceeds scan budget {budget}")

    def _split_level(self, target: int = BLOCK_TARGET) -> int:
        orbits = self.bsgs.orbits
        size = 1
        s = len(orbits)
        while s > 0 and size * len(orbits[s - 1]) <= max(target, len(orbits[s - 1])):
            size *= len(orbits[s - 1])
            s -= 1
        return s

    def block_size(self) -> int:
        s = self._split_level()
        return math.prod(len(o) for o in self.bsgs.orbits[s:])

    def num_blocks(self) -> int:
        return self.order() // self.block_size()

    def _prefix(self, block_index: int, s: int, ordered: bool) -> np.ndarray:
        """Product ``u_{s-1} * ... * u_0`` selected by the outer mixed-radix digits."""
        b = self.bsgs
        digits = []
        rem = block_index
        for i in reversed(range(s)):
            rem, d = divmod(rem, len(b.orbits[i]))
            digits.append(d)
        digits.reverse()
        P = np.arange(self.degree, dtype=np.uint8)
        for i, d in enumerate(digits):
            orbit = b.orbits[i]
            if ordered:
                # candidates for g(base[i]) are P(orbit); pick the d-th smallest
                beta = sorted(orbit, key=lambda x: P[x])[d]
            else:
                beta = orbit[d]
            u = np.asarray(b.transversals[i][beta], dtype=np.uint8)
            P = P[u]  # u first, then P
        return P

    def block(self, block_index: int, ordered: bool = True) -> np.ndarray:
        """Elements ``block_index*M .. (block_index+1)*M - 1`` as (M, n) uint8."""
        s = self._split_level()
        inner = self.bsgs.stabilizer_elements(s)
        P = self._prefix(block_index, s, ordered)
        rows = P[inner]
        if ordered and s < len(self.bsgs.base):
            cols = self.bsgs.base[s:]
            idx = np.lexsort(tuple(rows[:, c] for c in reversed(cols)))
            rows = rows[idx]
        return rows

    def iter_blocks(
        self, start: int = 0, stop: int | None = None, ordered: bool = True,
        budget: int = DEFAULT_SCAN_BUDGET,
    ) -> Iterator[np.ndarray]:
        """Yield the elements with lexicographic index in [start, stop) block by block."""
        self._check_budget(budget)
        total = self.order()
        stop = total if stop is None else min(stop, total)
        M = self.block_size()
        bi = start // M
        while bi * M < stop:
            rows = self.block(bi, ordered)
            lo = max(start - bi * M, 0)
            hi = min(stop - bi * M, M)
            yield rows[lo:hi]
            bi += 1

    def enumerate_elements(
        self, start: int = 0, stop: int | None = None, budget: int = DEFAULT_SCAN_BUDGET
    ) -> Iterator[Permutation]:
        """All elements, each once, in lexicographic order of base images."""
        for rows in self.iter_blocks(start, stop, True, budget):
            for r in rows.tolist():
                yield Permutation(r, check=False)

    def element_at(self, index: int) -> Permutation:
        M = self.block_size()
        rows = self.block(index // M, ordered=True)
        return Permutation(rows[index % M].tolist(), check=False)

    def elements_array(self, budget: int = 10**6) -> np.ndarray:
        """All elements as an (order, n) uint8 array, unordered within blocks."""
        self._check_budget(budget)
        return np.concatenate(list(self.iter_blocks(ordered=False, budget=budget)))

    def scan(
        self,
        predicate: Callable[[np.ndarray], np.ndarray],
        budget: int = DEFAULT_SCAN_BUDGET,
        workers: int = 1,
    ) -> np.ndarray:
        """Rows of all elements satisfying ``predicate`` (a vectorized mask function)."""
        self._check_budget(budget)

        def run(bi: int) -> np.ndarray:
            rows = self.block(bi, ordered=False)
            return rows[predicate(rows)]

        nb = self.num_blocks()
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                parts = list(ex.map(run, range(nb)))
        else:
            parts = [run(bi) for bi in range(nb)]
        found = np.concatenate(parts) if parts else np.empty((0, self.degree), np.uint8)
        # set union: canonical order independent of block scheduling
        if len(found):
            found = np.unique(found, axis=0)
        return found


# ---- scans ---------------------------------------------------------------

def conjugate_rows(rows: np.ndarray, s: Sequence[int]) -> np.ndarray:
    """For each row x, the permutation x^-1 * s * x (maps x(i) to x(s(i)))."""
    out = np.empty_like(rows)
    np.put_along_axis(out, rows.astype(np.intp), rows[:, np.asarray(s, dtype=np.intp)], axis=1)
    return out


def conjugate_rows_by(rows: np.ndarray, p: Sequence[int]) -> np.ndarray:
    """For each row e, the permutation p^-1 * e * p."""
    p = np.asarray(p, dtype=np.intp)
    out = np.empty_like(rows)
    out[:, p] = p[rows.astype(np.intp)]
    return out


def group_from_rows(
    seed_gens: Sequence[Permutation], rows: np.ndarray, degree: int, name=None
) -> PermGroup:
    """Smallest group containing ``seed_gens`` and every row; the rows must
    already form a group together with the seeds (generators added greedily)."""
    grp = PermGroup(list(seed_gens), degree, name)
    pending = rows
    while len(pending):
        mask = ~grp.contains_rows(pending)
        if not mask.any():
            break
        pending = pending[mask]
        new = Permutation(pending[0].tolist(), check=False)
        grp = PermGroup(grp.generators + [new], degree, name)
        pending = pending[1:]
    return grp


def normalizer_scan(
    g: PermGroup, h: PermGroup, budget: int = DEFAULT_SCAN_BUDGET, workers: int = 1
) -> PermGroup:
    """N_g(h) by scanning all elements of g."""
    if not h.is_subgroup_of(g):
        raise NotASubgroup("h is not a subgroup of g")
    g._check_budget(budget)
    hb = h.bsgs
    gens = [s.images for s in h.generators if not s.is_identity()]

    def normalizes(rows: np.ndarray) -> np.ndarray:
        mask = np.ones(len(rows), dtype=bool)
        for s in gens:
            idx = np.flatnonzero(mask)
            if not len(idx):
                break
            mask[idx] = hb.contains_rows(conjugate_rows(rows[idx], s))
        return mask

    rows = g.scan(normalizes, budget, workers)
    return group_from_rows(h.generators, rows, g.degree)


def centralizer_scan(
    g: PermGroup, p: Permutation, budget: int = DEFAULT_SCAN_BUDGET, workers: int = 1
) -> PermGroup:
    """C_g(p) by scanning all elements of g."""
    if not g.contains(p):
        raise NotASubgroup(f"{p} is not in g")
    target = np.asarray(p.images, dtype=np.uint8)

    def commutes(rows: np.ndarray) -> np.ndarray:
        return (conjugate_rows(rows, p.images) == target).all(axis=1)

    rows = g.scan(commutes, budget, workers)
    return group_from_rows([p], rows, g.degree)
