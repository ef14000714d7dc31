"""Explicit element tables for small permutation groups.

An ``ElementTable`` lists every element of a group (order up to ~10^4) as a
row of a uint8 array, sorted lexicographically, and answers index lookups for
arbitrary batches of permutations through a 64-bit row hash.  Subgroups are
handled as sorted index arrays.  Groups of order <= 2048 also get a full
Cayley table, which the isomorphism test uses.
"""

from __future__ import annotations

import math
from collections import Counter
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .bsgs import PermGroup, conjugate_rows, conjugate_rows_by
from .perm import Permutation

CAYLEY_LIMIT = 2048


def _row_weights(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(1, 2**63 - 1, size=n, dtype=np.uint64) | np.uint64(1)


def row_hash(rows: np.ndarray, weights: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return (rows.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)


def power_rows(rows: np.ndarray, k: int) -> np.ndarray:
    """Each row raised to the k-th power (k >= 0)."""
    result = np.broadcast_to(np.arange(rows.shape[1], dtype=rows.dtype), rows.shape).copy()
    base = rows
    while k:
        if k & 1:
            result = np.take_along_axis(base, result.astype(np.intp), axis=1)
        base = np.take_along_axis(base, base.astype(np.intp), axis=1)
        k >>= 1
    return result


def rows_orders(rows: np.ndarray) -> np.ndarray:
    """Element order of each row (lcm of cycle lengths)."""
    m, n = rows.shape
    cyc = np.zeros((m, n), dtype=np.int64)
    cur = rows.astype(np.intp)
    pts = np.arange(n)
    done = np.zeros((m, n), dtype=bool)
    for step in range(1, n + 1):
        hit = (cur == pts) & ~done
        cyc[hit] = step
        done |= hit
        if done.all():
            break
        cur = np.take_along_axis(rows.astype(np.intp), cur, axis=1)
    return np.array([math.lcm(*map(int, set(r))) for r in cyc], dtype=np.int64)


class ElementTable:
    """All elements of a small group with fast vectorized index lookup."""

    def __init__(self, elements: np.ndarray, generators: Sequence[Permutation]):
        self.elements = np.ascontiguousarray(elements, dtype=np.uint8)
        self.order, self.degree = self.elements.shape
        self.generators = list(generators)
        seed = 0
        while True:
            self._w = _row_weights(self.degree, seed)
            h = row_hash(self.elements, self._w)
            order = np.argsort(h, kind="stable")
            hs = h[order]
            if len(hs) < 2 or (hs[1:] != hs[:-1]).all():
                break
            seed += 1
        self._hash_sorted = hs
        self._hash_order = order
        self.identity = int(self.lookup(np.arange(self.degree, dtype=np.uint8)[None, :])[0])

    @classmethod
    def from_group(cls, g: PermGroup, budget: int = 10**6) -> ElementTable:
        elems = np.unique(g.elements_array(budget), axis=0)
        return cls(elems, g.generators)

    def __len__(self) -> int:
        return self.order

    def lookup(self, rows: np.ndarray, missing_ok: bool = False) -> np.ndarray:
        """Index of each row in the table (-1 if absent and ``missing_ok``)."""
        rows = np.asarray(rows, dtype=np.uint8)
        h = row_hash(rows, self._w)
        pos = np.searchsorted(self._hash_sorted, h)
        pos = np.minimum(pos, self.order - 1)
        idx = self._hash_order[pos]
        ok = (self._hash_sorted[pos] == h) & (self.elements[idx] == rows).all(axis=1)
        if not ok.all():
            if not missing_ok:
                raise KeyError("permutation not in element table")
            idx = np.where(ok, idx, -1)
        return idx

    def index_of(self, p: Permutation) -> int:
        return int(self.lookup(np.asarray([p.images], dtype=np.uint8))[0])

    def perm(self, i: int) -> Permutation:
        return Permutation(self.elements[i].tolist(), check=False)

    # ---- element data -------------------------------------------------
    @cached_property
    def element_orders(self) -> np.ndarray:
        return rows_orders(self.elements)

    @cached_property
    def inverses(self) -> np.ndarray:
        inv = np.empty_like(self.elements)
        np.put_along_axis(
            inv, self.elements.astype(np.intp),
            np.broadcast_to(np.arange(self.degree, dtype=np.uint8), self.elements.shape),
            axis=1,
        )
        return self.lookup(inv)

    def right_mul(self, idx: np.ndarray, p: Sequence[int]) -> np.ndarray:
        """Indices of e * p for the elements e listed in ``idx``."""
        return self.lookup(np.asarray(p, dtype=np.uint8)[self.elements[idx]])

    def conj_table(self, p: Sequence[int]) -> np.ndarray:
        """Index map e -> p^-1 e p over the whole table."""
        return self.lookup(conjugate_rows_by(self.elements, p))

    @cached_property
    def generator_conj_tables(self) -> list[np.ndarray]:
        return [self.conj_table(g.images) for g in self.generators if not g.is_identity()]

    @cached_property
    def cayley(self) -> np.ndarray:
        """mult[i, j] = index of e_i * e_j (e_i applied first)."""
        if self.order > CAYLEY_LIMIT:
            raise ValueError(f"Cayley table limited to order {CAYLEY_LIMIT}")
        mult = np.empty((self.order, self.order), dtype=np.int32)
        all_idx = np.arange(self.order)
        for j in range(self.order):
            mult[:, j] = self.right_mul(all_idx, self.elements[j])
        return mult

    # ---- subgroups ------------------------------------------------------
    def closure(self, gens: Iterable[int]) -> np.ndarray:
        """Sorted indices of the subgroup generated by the given elements."""
        gens = [int(x) for x in gens if int(x) != self.identity]
        members = {self.identity}
        frontier = np.array([self.identity])
        while len(frontier):
            new = []
            for gi in gens:
                prod = self.right_mul(frontier, self.elements[gi])
                for x in prod.tolist():
                    if x not in members:
                        members.add(x)
                        new.append(x)
            frontier = np.array(new, dtype=np.int64)
        return np.array(sorted(members), dtype=np.int64)

    def mask(self, subset: np.ndarray) -> np.ndarray:
        m = np.zeros(self.order, dtype=bool)
        m[subset] = True
        return m

    def small_generating_set(self, sub: np.ndarray) -> list[int]:
        """Greedy generating set: repeatedly add the first element not yet covered."""
        gens: list[int] = []
        covered = self.mask(np.array([self.identity]))
        target = len(sub)
        # prefer high-order elements so few generators are needed
        cand = sorted(sub.tolist(), key=lambda i: (-self.element_orders[i], i))
        for x in cand:
            if covered.sum() == target:
                break
            if not covered[x]:
                gens.append(x)
                covered = self.mask(self.closure(gens))
        return gens

    def normalizer_mask(self, sub: np.ndarray, gens: Sequence[int] | None = None) -> np.ndarray:
        """Elements x with x^-1 sub x = sub, by scanning the whole table."""
        inside = self.mask(sub)
        gens = self.small_generating_set(sub) if gens is None else gens
        ok = np.ones(self.order, dtype=bool)
        for s in gens:
            conj = self.lookup(conjugate_rows(self.elements, self.elements[s]))
            ok &= inside[conj]
        return ok

    def normal_closure(self, elems: Sequence[int]) -> np.ndarray:
        sub = self.closure(elems)
        while True:
            inside = self.mask(sub)
            extra = []
            for tab in self.generator_conj_tables:
                img = tab[sub]
                extra.extend(img[~inside[img]].tolist())
            if not extra:
                return sub
            sub = self.closure(list(sub) + extra[:1])

    def conjugacy_classes(self) -> list[list[int]]:
        seen = np.zeros(self.order, dtype=bool)
        classes = []
        tabs = self.generator_conj_tables
        for start in range(self.order):
            if seen[start]:
                continue
            cls = [start]
            seen[start] = True
            for x in cls:
                for tab in tabs:
                    y = int(tab[x])
                    if not seen[y]:
                        seen[y] = True
                        cls.append(y)
            classes.append(sorted(cls))
        return classes

    def subgroup_key(self, sub: np.ndarray) -> bytes:
        return np.sort(np.asarray(sub, dtype=np.int64)).tobytes()

    def conjugacy_orbit(self, sub: np.ndarray) -> list[bytes]:
        """Keys of all conjugates of ``sub`` under the table's group."""
        start = np.sort(np.asarray(sub, dtype=np.int64))
        keys = {start.tobytes()}
        queue = [start]
        for s in queue:
            for tab in self.generator_conj_tables:
                img = np.sort(tab[s])
                k = img.tobytes()
                if k not in keys:
                    keys.add(k)
                    queue.append(img)
        return list(keys)

    def subgroup_perm_group(self, sub: np.ndarray, name=None) -> PermGroup:
        gens = [self.perm(i) for i in self.small_generating_set(np.asarray(sub))]
        return PermGroup(gens, self.degree, name)


# ---- structure invariants and isomorphism -----------------------------------

class SmallGroup:
    """A group of order <= CAYLEY_LIMIT through its Cayley table."""

    def __init__(self, table: ElementTable):
        self.table = table
        self.mult = table.cayley
        self.order = table.order
        self.e = table.identity
        self.orders = table.element_orders

    @classmethod
    def from_group(cls, g: PermGroup) -> SmallGroup:
        return cls(ElementTable.from_group(g))

    def closure(self, gens: Iterable[int]) -> np.ndarray:
        members = {self.e}
        frontier = [self.e]
        gens = [int(x) for x in gens]
        while frontier:
            f = np.array(frontier)
            frontier = []
            for g in gens:
                for x in self.mult[f, g].tolist():
                    if x not in members:
                        members.add(x)
                        frontier.append(x)
        return np.array(sorted(members))

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.argmax(self.mult == self.e, axis=1)

    @cached_property
    def centralizer_orders(self) -> np.ndarray:
        # x and y commute iff mult[x, y] == mult[y, x]
        comm = self.mult == self.mult.T
        return comm.sum(axis=1)

    @cached_property
    def center_order(self) -> int:
        return int((self.centralizer_orders == self.order).sum())

    @cached_property
    def derived_subgroup(self) -> np.ndarray:
        inv = self.inverse
        x = np.arange(self.order)
        comms = set()
        for y in range(self.order):
            # x^-1 y^-1 x y
            c = self.mult[self.mult[self.mult[inv[x], inv[y]], x], y]
            comms.update(c.tolist())
        return self.closure(sorted(comms))

    def abelianization_invariants(self) -> tuple[int, ...]:
        """Invariant factors of G/G' (elementary divisors, sorted)."""
        d = self.derived_subgroup
        dmask = np.zeros(self.order, dtype=bool)
        dmask[d] = True
        # coset label of each element: min element of x D
        label = np.array([int(self.mult[x, d].min()) for x in range(self.order)])
        reps = sorted(set(label.tolist()))
        q = len(reps)
        # order of each coset in the quotient
        qorders = []
        for r in reps:
            k, y = 1, r
            while label[y] != label[self.e]:
                y = int(self.mult[y, r])
                k += 1
            qorders.append(k)
        return _abelian_invariants(q, qorders)

    def fingerprint(self) -> dict:
        hist = Counter(int(o) for o in self.orders)
        return {
            "order": self.order,
            "element_orders": dict(sorted(hist.items())),
            "center": self.center_order,
            "derived": len(self.derived_subgroup),
            "abelianization": list(self.abelianization_invariants()),
        }

    def class_invariants(self) -> np.ndarray:
        """Per-element (order, centralizer order) pairs used to prune iso search."""
        return np.stack([self.orders, self.centralizer_orders], axis=1)

    def generating_pair_or_set(self) -> list[int]:
        """A short generating set, preferring elements with rare invariants."""
        inv = [tuple(r) for r in self.class_invariants().tolist()]
        freq = Counter(inv)
        ranked = sorted(range(self.order), key=lambda i: (freq[inv[i]], -self.orders[i], i))
        ranked = [i for i in ranked if i != self.e]
        for a in ranked:
            ca = self.closure([a])
            if len(ca) == self.order:
                return [a]
        for a in ranked[:64]:
            for b in ranked:
                if len(self.closure([a, b])) == self.order:
                    return [a, b]
        gens: list[int] = []
        cur = np.array([self.e])
        for a in ranked:
            if a not in set(cur.tolist()):
                gens.append(a)
                cur = self.closure(gens)
                if len(cur) == self.order:
                    break
        return gens

    def bfs_tree(self, gens: Sequence[int]) -> list[tuple[int, int, int]]:
        """(child, parent, generator position) in BFS order from the identity."""
        seen = {self.e}
        tree = []
        queue = [self.e]
        for x in queue:
            for k, g in enumerate(gens):
                y = int(self.mult[x, g])
                if y not in seen:
                    seen.add(y)
                    tree.append((y, x, k))
                    queue.append(y)
        return tree


def _abelian_invariants(q: int, orders: Sequence[int]) -> tuple[int, ...]:
    """Elementary divisors of an abelian group of order q from its element orders.

    With A_p = sum of Z_{p^e_i}, the number of elements of order dividing p^k
    is p^(sum min(k, e_i)), so consecutive ratios count the factors with
    e_i >= k.
    """
    cnt = Counter(orders)
    out = []
    for p in _primes_dividing(q):
        a = 0
        while q % (p ** (a + 1)) == 0:
            a += 1
        c = [sum(v for o, v in cnt.items() if (p**k) % o == 0) for k in range(a + 1)]
        ge = [round(math.log(c[k] // c[k - 1], p)) for k in range(1, a + 1)] + [0]
        for k in range(1, a + 1):
            out.extend([p**k] * (ge[k - 1] - ge[k]))
    return tuple(sorted(out))


def _primes_dividing(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def find_isomorphism(model: SmallGroup, target: SmallGroup) -> np.ndarray | None:
    """An isomorphism model -> target as an index map, or None.

    Generator images are searched among target elements with the same element
    order and centralizer order; each candidate map is extended along a BFS
    tree of the model and verified on every Cayley-table edge.
    """
    if model.order != target.order:
        return None
    mi = model.class_invariants()
    ti = target.class_invariants()
    m_inv = Counter(map(tuple, mi.tolist()))
    t_inv = Counter(map(tuple, ti.tolist()))
    if m_inv != t_inv:
        return None
    gens = model.generating_pair_or_set()
    tree = model.bfs_tree(gens)
    cands = [np.flatnonzero((ti == mi[g]).all(axis=1)) for g in gens]
    gen_cols = [model.mult[:, g] for g in gens]

    def attempt(images: Sequence[int]) -> np.ndarray | None:
        phi = np.full(model.order, -1, dtype=np.int64)
        phi[model.e] = target.e
        for child, parent, k in tree:
            phi[child] = target.mult[phi[parent], images[k]]
        for k, col in enumerate(gen_cols):
            if not (phi[col] == target.mult[phi, images[k]]).all():
                return None
        if len(np.unique(phi)) != model.order:
            return None
        return phi

    def search(k: int, chosen: list[int]):
        if k == len(gens):
            return attempt(chosen)
        for c in cands[k].tolist():
            res = search(k + 1, chosen + [c])
            if res is not None:
                return res
        return None

    return search(0, [])
