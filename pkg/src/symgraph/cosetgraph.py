"""Coset graphs Cos(G, H, HtH), their quotients, and a parity helper.

Vertices are the right cosets Hx, each named by its lexicographically
smallest member.  Hx is adjacent to Hdx for d in HtH; with t^2 in H the
double coset is closed under inverses and the graph is undirected.  The
neighbours of H are H t r for r running over right coset representatives
of H cap H^t in H, so the valency is |H : H cap H^t|.  Neighbour lists of
the other vertices are transported along a BFS tree of the right
multiplication action; symmetry and G-invariance of the result are then
checked separately rather than assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .bsgs import PermGroup, conjugate_rows_by
from .errors import (
    FewerThanThreeOrbits,
    InvolutionConditionFailed,
    Irregular,
    NotASubgroup,
    NotSemiregular,
    VertexBudgetExceeded,
)
from .perm import EVEN, ODD, Permutation
from .smallgroup import ElementTable

VERTEX_BUDGET = 10**5
ARC_VERTEX_LIMIT = 10**4
_BATCH = 1 << 22  # uint8 cells per canonicalization batch


def _lexmin(cands: np.ndarray) -> np.ndarray:
    """Lexicographically smallest row of each (m, n) slab of a (B, m, n) array."""
    B, m, n = cands.shape
    alive = np.ones((B, m), dtype=bool)
    for j in range(n):
        col = np.where(alive, cands[:, :, j], 255)
        alive &= col == col.min(axis=1)[:, None]
        if (alive.sum(axis=1) == 1).all():
            break
    return cands[np.arange(B), alive.argmax(axis=1)]


def _orbits(n: int, pairs_a: np.ndarray, pairs_b: np.ndarray) -> np.ndarray:
    """Connected-component labels of the graph with edges a[i] - b[i]."""
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    mat = coo_matrix((np.ones(len(pairs_a), dtype=np.int8), (pairs_a, pairs_b)), shape=(n, n))
    return connected_components(mat, directed=True, connection="weak")[1]


class _CosetSpace:
    """Right cosets of h in g with canonical representatives."""

    def __init__(self, h: PermGroup):
        self.hrows = ElementTable.from_group(h).elements.astype(np.intp)
        self.degree = h.degree

    def canonical(self, reps: np.ndarray) -> np.ndarray:
        """Canonical representative of H y for each row y of ``reps``."""
        reps = np.asarray(reps, dtype=np.uint8)
        m = len(self.hrows)
        step = max(1, _BATCH // (m * self.degree))
        out = np.empty_like(reps)
        for lo in range(0, len(reps), step):
            y = reps[lo:lo + step]
            # (h y)[i] = y[h[i]]
            out[lo:lo + step] = _lexmin(y[:, self.hrows])
        return out


@dataclass
class CosetGraph:
    vertex_count: int
    neighbors: list  # per-vertex sorted int arrays
    coset_labels: np.ndarray  # canonical representative per vertex, uint8 rows
    provenance: dict
    group: PermGroup = field(repr=False)
    stabilizer: PermGroup = field(repr=False)
    element: Permutation = field(repr=False)
    _space: _CosetSpace = field(repr=False, default=None)
    _index: dict = field(repr=False, default_factory=dict)

    def vertex_of(self, rows: np.ndarray) -> np.ndarray:
        """Vertex index of the coset H y for each row y."""
        canon = self._space.canonical(rows)
        return np.fromiter((self._index[r.tobytes()] for r in canon), dtype=np.int64, count=len(canon))

    def vertex_action(self, p: Permutation) -> np.ndarray:
        """The permutation of vertices induced by right multiplication by p."""
        moved = np.asarray(p.images, dtype=np.uint8)[self.coset_labels]
        return self.vertex_of(moved)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u, nb in enumerate(self.neighbors):
            out.extend((u, int(v)) for v in nb if u < v)
        return sorted(out)

    def arcs(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.concatenate([np.full(len(nb), u, dtype=np.int64) for u, nb in enumerate(self.neighbors)]) \
            if self.vertex_count else np.zeros(0, dtype=np.int64)
        dst = np.concatenate([np.asarray(nb, dtype=np.int64) for nb in self.neighbors]) \
            if self.vertex_count else np.zeros(0, dtype=np.int64)
        return src, dst

    def is_symmetric_adjacency(self) -> bool:
        sets = [set(map(int, nb)) for nb in self.neighbors]
        return all(u in sets[v] for u, s in enumerate(sets) for v in s)

    def group_preserves_edges(self, perms: Optional[Sequence[Permutation]] = None) -> bool:
        """Every given element (default: generators of G) maps edges onto edges."""
        src, dst = self.arcs()
        codes = np.sort(src * self.vertex_count + dst)
        for p in perms if perms is not None else self.group.generators:
            sigma = self.vertex_action(p)
            img = np.sort(sigma[src] * self.vertex_count + sigma[dst])
            if not np.array_equal(img, codes):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "provenance": self.provenance,
            "vertex_count": self.vertex_count,
            "edges": [list(e) for e in self.edges()],
        }

    def edge_list_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges())

    def save(self, path) -> None:
        path = str(path)
        if path.endswith(".json"):
            with open(path, "w") as fh:
                json.dump(self.to_json(), fh, indent=2)
                fh.write("\n")
        else:
            with open(path, "w") as fh:
                fh.write(self.edge_list_text())


def build_coset_graph(
    g: PermGroup, h: PermGroup, t: Permutation, vertex_budget: int = VERTEX_BUDGET,
    group_name: Optional[str] = None,
) -> CosetGraph:
    if not h.is_subgroup_of(g):
        raise NotASubgroup("stabilizer is not a subgroup of the group")
    if not g.contains(t):
        raise NotASubgroup("element is not in the group")
    if not h.contains(t * t):
        raise InvolutionConditionFailed("t^2 is not in H, so HtH is not closed under inverses")
    nv = g.order() // h.order()
    if nv > vertex_budget:
        raise VertexBudgetExceeded(f"|G:H| = {nv} exceeds vertex budget {vertex_budget}")

    space = _CosetSpace(h)
    n = g.degree
    gens = [np.asarray(s.images, dtype=np.uint8) for s in g.generators]
    ident = np.arange(n, dtype=np.uint8)

    # BFS over right multiplication; parent/generator recorded per vertex
    labels = [ident]
    index = {ident.tobytes(): 0}
    parent, via = [-1], [-1]
    sigma = [[] for _ in gens]
    frontier = np.arange(1)
    while len(frontier):
        reps = np.stack([labels[v] for v in frontier])
        new = []
        for gi, s in enumerate(gens):
            canon = space.canonical(s[reps])
            for v, row in zip(frontier.tolist(), canon):
                key = row.tobytes()
                w = index.get(key)
                if w is None:
                    w = len(labels)
                    index[key] = w
                    labels.append(row)
                    parent.append(v)
                    via.append(gi)
                    new.append(w)
                sigma[gi].append((v, w))
        frontier = np.asarray(new, dtype=np.int64)
    if len(labels) != nv:
        raise RuntimeError(f"found {len(labels)} cosets, expected {nv}")
    sig = np.zeros((len(gens), nv), dtype=np.int64)
    for gi, pairs in enumerate(sigma):
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        sig[gi, arr[:, 0]] = arr[:, 1]

    # neighbours of H: H t r, r over right cosets of M = H cap H^t in H
    htab = ElementTable.from_group(h)
    if h.contains(t):
        nb0 = np.zeros(0, dtype=np.int64)
    else:
        meet = htab.lookup(conjugate_rows_by(htab.elements, t.images), missing_ok=True)
        meet = np.sort(meet[meet >= 0])
        covered = np.zeros(htab.order, dtype=bool)
        reps = []
        for r in range(htab.order):
            if covered[r]:
                continue
            reps.append(r)
            # right coset M r: rows m r, (m r)[i] = r[m[i]]
            covered[htab.lookup(htab.elements[r][htab.elements[meet]])] = True
        tr = np.asarray(t.images, dtype=np.uint8)
        d_rows = htab.elements[reps][:, tr]  # t r: (t r)[i] = r[t[i]]
        nb0 = np.unique([index[row.tobytes()] for row in space.canonical(d_rows)])

    adj = np.zeros((nv, len(nb0)), dtype=np.int64)
    adj[0] = nb0
    for v in range(1, nv):  # BFS order: parents come first
        adj[v] = sig[via[v], adj[parent[v]]]

    # relabel so that vertices are sorted by canonical representative
    lab = np.stack(labels)
    order = np.lexsort(lab.T[::-1])
    rank = np.empty(nv, dtype=np.int64)
    rank[order] = np.arange(nv)
    neighbors = [np.sort(rank[adj[v]]) for v in order]
    lab = lab[order]
    index = {row.tobytes(): i for i, row in enumerate(lab)}

    cg = CosetGraph(
        vertex_count=nv,
        neighbors=neighbors,
        coset_labels=lab,
        provenance={
            "group": group_name or g.name or "G",
            "group_order": g.order(),
            "stabilizer_generators": [x.to_cycles() for x in h.generators],
            "stabilizer_order": h.order(),
            "element": t.to_cycles(),
            "convention": "right cosets Hx; Hx ~ Hdx for d in HtH; products apply the left factor first",
        },
        group=g, stabilizer=h, element=t, _space=space, _index=index,
    )
    if not cg.is_symmetric_adjacency():
        raise RuntimeError("adjacency is not symmetric")
    return cg


def is_connected(cg: CosetGraph) -> bool:
    if cg.vertex_count <= 1:
        return True
    src, dst = cg.arcs()
    return int(_orbits(cg.vertex_count, src, dst).max()) == 0


def valency(cg: CosetGraph) -> int:
    degs = {len(nb) for nb in cg.neighbors}
    if len(degs) > 1:
        raise Irregular(f"vertex degrees {sorted(degs)}")
    return degs.pop() if degs else 0


def arc_orbit_count(cg: CosetGraph, g: PermGroup, vertex_limit: int = ARC_VERTEX_LIMIT) -> int:
    """Number of orbits of g (acting by right multiplication) on arcs."""
    if cg.vertex_count > vertex_limit:
        raise VertexBudgetExceeded(f"{cg.vertex_count} vertices exceeds arc-orbit limit {vertex_limit}")
    src, dst = cg.arcs()
    na = len(src)
    if na == 0:
        return 0
    V = cg.vertex_count
    codes = src * V + dst  # already sorted: rows in vertex order, each row sorted
    a_list, b_list = [], []
    for p in g.generators:
        sigma = cg.vertex_action(p)
        img = np.searchsorted(codes, sigma[src] * V + sigma[dst])
        a_list.append(np.arange(na))
        b_list.append(img)
    if not a_list:
        return na
    comp = _orbits(na, np.concatenate(a_list), np.concatenate(b_list))
    return int(comp.max()) + 1


@dataclass
class QuotientGraph:
    parent: CosetGraph = field(repr=False)
    orbit_labels: np.ndarray
    orbit_sizes: list
    edges: list
    collapsed_edges: int
    internal_edges: int
    semiregular: bool
    normal: bool
    hypotheses: dict
    valency: Optional[int]
    issues: list

    @property
    def orbit_count(self) -> int:
        return len(self.orbit_sizes)

    def neighbor_sets(self) -> list[set]:
        adj = [set() for _ in range(self.orbit_count)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def to_json(self) -> dict:
        return {
            "orbit_count": self.orbit_count,
            "orbit_sizes": sorted(set(self.orbit_sizes)),
            "edges": [list(e) for e in self.edges],
            "collapsed_edges": self.collapsed_edges,
            "internal_edges": self.internal_edges,
            "semiregular": self.semiregular,
            "normal": self.normal,
            "hypotheses": self.hypotheses,
            "valency": self.valency,
            "issues": list(self.issues),
        }


def _is_prime(k: int) -> bool:
    return k >= 2 and all(k % d for d in range(2, int(k**0.5) + 1))


def quotient_graph(cg: CosetGraph, n: PermGroup, strict: bool = False) -> QuotientGraph:
    """Quotient of cg by the orbits of n (a subgroup of cg's group).

    Orbits are adjacent when some parent edge joins them; parallel parent
    edges collapse and are counted.  If n is normal and semiregular with at
    least three orbits and the parent is arc-transitive of prime valency,
    the quotient valency must equal the parent valency; a mismatch raises.
    Failed hypotheses are listed in ``issues`` (raised instead with
    ``strict``)."""
    V = cg.vertex_count
    if n.generators:
        sigmas = [cg.vertex_action(p) for p in n.generators]
        a = np.concatenate([np.arange(V)] * len(sigmas))
        b = np.concatenate(sigmas)
        lab = _orbits(V, a, b)
    else:
        lab = np.arange(V)
    # relabel orbits by their smallest vertex
    first = {}
    for v, c in enumerate(lab.tolist()):
        first.setdefault(c, len(first))
    lab = np.asarray([first[c] for c in lab.tolist()], dtype=np.int64)
    sizes = np.bincount(lab).tolist()

    qedges: dict[tuple[int, int], int] = {}
    internal = 0
    for u, v in cg.edges():
        a_, b_ = int(lab[u]), int(lab[v])
        if a_ == b_:
            internal += 1
            continue
        key = (min(a_, b_), max(a_, b_))
        qedges[key] = qedges.get(key, 0) + 1
    collapsed = sum(c - 1 for c in qedges.values())

    semiregular = all(s == n.order() for s in sizes)
    normal = n.is_normal_in(cg.group)
    issues = []
    if not semiregular:
        issues.append(NotSemiregular(f"orbit sizes {sorted(set(sizes))} vs |N| = {n.order()}"))
    if len(sizes) < 3:
        issues.append(FewerThanThreeOrbits(f"{len(sizes)} orbits"))
    if strict and issues:
        raise issues[0]

    qdeg = [0] * len(sizes)
    for a_, b_ in qedges:
        qdeg[a_] += 1
        qdeg[b_] += 1
    qval = qdeg[0] if qdeg and len(set(qdeg)) == 1 else None

    pval = valency(cg)
    hyp = {
        "semiregular": semiregular,
        "normal": normal,
        "at_least_three_orbits": len(sizes) >= 3,
        "prime_valency": _is_prime(pval),
    }
    if all(hyp.values()):
        arcs = arc_orbit_count(cg, cg.group) if V <= ARC_VERTEX_LIMIT else None
        # a coset graph on a single double coset is arc-transitive by construction
        hyp["arc_transitive"] = True if arcs is None else arcs == 1
        if hyp["arc_transitive"] and qval != pval:
            raise AssertionError(f"quotient valency {qval} differs from parent valency {pval}")
    return QuotientGraph(
        parent=cg, orbit_labels=lab, orbit_sizes=sizes, edges=sorted(qedges),
        collapsed_edges=collapsed, internal_edges=internal, semiregular=semiregular,
        normal=normal, hypotheses=hyp, valency=qval, issues=[str(e) for e in issues],
    )


def semiregular_parity(m: int, orbit_count: int = 7) -> str:
    """Parity of a permutation made of ``orbit_count`` disjoint m-cycles."""
    if m < 1:
        raise ValueError("m must be positive")
    return ODD if (orbit_count * (m - 1)) % 2 else EVEN


def semiregular_permutation(m: int, orbit_count: int = 7) -> Permutation:
    """Explicit product of ``orbit_count`` disjoint m-cycles on m*orbit_count points."""
    n = m * orbit_count
    img = list(range(n))
    for k in range(orbit_count):
        for j in range(m):
            img[k * m + j] = k * m + (j + 1) % m
    return Permutation(img)
