"""Regenerate the shipped atlas group files in src/symgraph/data/.

PSL(2,q) acts on the projective line; PSU(3,3) acts on the 28 isotropic
points and PSU(4,3) on the 112 totally isotropic lines of the standard
Hermitian form over GF(9).  The unitary groups are generated by transvections
x -> x + a h(x,v) v (v isotropic, a + a^3 = 0).  Each file keeps two random
elements that already generate the whole group; the order is checked before
anything is written.

Usage: python scripts/build_atlas_data.py [--seed N]
"""

import argparse
import itertools
import random
from pathlib import Path

from symgraph.atlas import GroupSpec, save_group_file
from symgraph.bsgs import PermGroup
from symgraph.perm import Permutation

DATA = Path(__file__).resolve().parents[1] / "src" / "symgraph" / "data"


# GF(9) = GF(3)[i]/(i^2 + 1); element a + b i encoded as 3*b + a
def f9_add(x, y):
    return 3 * ((x // 3 + y // 3) % 3) + (x % 3 + y % 3) % 3


def f9_mul(x, y):
    a, b = x % 3, x // 3
    c, d = y % 3, y // 3
    return 3 * ((a * d + b * c) % 3) + (a * c - b * d) % 3


def f9_conj(x):
    return 3 * ((-(x // 3)) % 3) + x % 3


def f9_inv(x):
    return next(y for y in range(1, 9) if f9_mul(x, y) == 1)


def herm(x, y):
    s = 0
    for a, b in zip(x, y):
        s = f9_add(s, f9_mul(a, f9_conj(b)))
    return s


def normalize(v):
    lead = next(c for c in v if c)
    inv = f9_inv(lead)
    return tuple(f9_mul(c, inv) for c in v)


def projective_points(dim):
    pts = set()
    for v in itertools.product(range(9), repeat=dim):
        if any(v):
            pts.add(normalize(v))
    return sorted(pts)


def transvection(v, a):
    def apply(x):
        c = f9_mul(a, herm(x, v))
        return tuple(f9_add(xi, f9_mul(c, vi)) for xi, vi in zip(x, v))
    return apply


def trace_zero_scalars():
    return [a for a in range(1, 9) if f9_add(a, f9_conj(a)) == 0]


def unitary_points(dim):
    return [p for p in projective_points(dim) if herm(p, p) == 0]


def point_action(points, fn):
    index = {p: k for k, p in enumerate(points)}
    return Permutation([index[normalize(fn(p))] for p in points])


def span_points(p, q):
    pts = set()
    for a, b in itertools.product(range(9), repeat=2):
        if a or b:
            pts.add(normalize(tuple(f9_add(f9_mul(a, x), f9_mul(b, y)) for x, y in zip(p, q))))
    return frozenset(pts)


def psu33_generators():
    pts = unitary_points(3)
    assert len(pts) == 28
    gens = [point_action(pts, transvection(v, a)) for v in pts for a in trace_zero_scalars()]
    return 28, gens


def psu43_generators():
    pts = unitary_points(4)
    assert len(pts) == 280
    lines = set()
    for p, q in itertools.combinations(pts, 2):
        if herm(p, q) == 0:
            lines.add(span_points(p, q))
    lines = sorted(lines, key=lambda s: sorted(s))
    assert len(lines) == 112
    line_index = {ln: k for k, ln in enumerate(lines)}
    gens = []
    # every 7th isotropic point: the sorted list starts inside a hyperplane
    for v in pts[::7]:
        t = transvection(v, trace_zero_scalars()[0])
        img = [line_index[frozenset(normalize(t(p)) for p in ln)] for ln in lines]
        gens.append(Permutation(img))
    return 112, gens


def projective_line(q):
    """Elements of GF(q) for q in {7, 8}, with add/mul/inv, plus infinity = q."""
    if q == 7:
        add = lambda x, y: (x + y) % 7
        mul = lambda x, y: (x * y) % 7
    else:
        # GF(8) = GF(2)[t]/(t^3 + t + 1), bitmask encoding
        add = lambda x, y: x ^ y

        def mul(x, y):
            r = 0
            for k in range(3):
                if (y >> k) & 1:
                    r ^= x << k
            for k in (4, 3):
                if (r >> k) & 1:
                    r ^= 0b1011 << (k - 3)
            return r
    inv = lambda x: next(y for y in range(1, q) if mul(x, y) == 1)
    return add, mul, inv


def psl2_generators(q):
    add, mul, inv = projective_line(q)
    inf = q
    shift = Permutation([inf if x == inf else add(x, 1) for x in range(q + 1)])
    prim = next(w for w in range(2, q) if len({_pow(mul, w, k) for k in range(1, q)}) == q - 1)
    # x -> w^2 x lies in PSL(2,q) for every q
    w2 = mul(prim, prim)
    scale = Permutation([inf if x == inf else mul(w2, x) for x in range(q + 1)])
    neg1 = next(y for y in range(q) if add(y, 1) == 0)

    def flip(x):
        if x == inf:
            return 0
        if x == 0:
            return inf
        return mul(neg1, inv(x))

    return q + 1, [shift, scale, Permutation([flip(x) for x in range(q + 1)])]


def _pow(mul, w, k):
    r = 1
    for _ in range(k):
        r = mul(r, w)
    return r


def two_generators(degree, gens, order, rng):
    full = PermGroup(gens, degree)
    assert full.order() == order, (full.order(), order)
    while True:
        a, b = full.random_element(rng), full.random_element(rng)
        if PermGroup([a, b], degree).order() == order:
            return [a, b]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=20170401)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    builds = [
        ("PSL(2,7)", psl2_generators(7), 168,
         "PSL(2,7) on the 8 points of the projective line over GF(7)"),
        ("PSL(2,8)", psl2_generators(8), 504,
         "PSL(2,8) on the 9 points of the projective line over GF(8)"),
        ("PSU(3,3)", psu33_generators(), 6048,
         "PSU(3,3) on the 28 isotropic points of the Hermitian form over GF(9)"),
        ("PSU(4,3)", psu43_generators(), 3265920,
         "PSU(4,3) on the 112 totally isotropic lines of the Hermitian form over GF(9)"),
    ]
    for name, (degree, gens), order, note in builds:
        pair = two_generators(degree, gens, order, rng)
        spec = GroupSpec(
            name=name,
            degree=degree,
            generators=[p.to_cycles() for p in pair],
            expected_order=order,
            source_note=note + f"; two random generators, seed {args.seed}",
        )
        path = DATA / spec.filename
        save_group_file(spec, path)
        print(f"wrote {path} (order {order})")


if __name__ == "__main__":
    main()
