"""Permutations of {0, ..., n-1}.

Composition convention: ``p * q`` applies ``p`` first, then ``q``, so
``(p * q)(i) == q(p(i))``.  Every module and file format in the package uses
this convention.  Points are 0-based internally; cycle notation strings are
1-based, e.g. ``"(1 2 3)(4 5)"``.
"""

from __future__ import annotations

import math
import re
from functools import reduce
from typing import Iterable, Sequence

from .errors import DegreeMismatch, NotAPermutation

MAX_DEGREE = 255

EVEN = "even"
ODD = "odd"

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


class Permutation:
    """An immutable permutation stored as its image tuple."""

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int], check: bool = True):
        images = tuple(int(x) for x in images)
        if check:
            n = len(images)
            if n == 0:
                raise NotAPermutation("degree must be positive")
            if n > MAX_DEGREE:
                raise NotAPermutation(f"degree {n} exceeds {MAX_DEGREE}")
            if sorted(images) != list(range(n)):
                raise NotAPermutation(f"not a bijection on 0..{n - 1}: {images!r}")
        self.images = images
        self._hash = hash(images)

    @classmethod
    def identity(cls, degree: int) -> Permutation:
        return cls(range(degree))

    @classmethod
    def from_cycles(cls, text: str, degree: int) -> Permutation:
        """Parse 1-based cycle notation such as ``"(1 2 3)(4 5)"``.

        ``"()"`` and the empty string give the identity.
        """
        return parse_cycles(text, degree)

    @classmethod
    def cycle(cls, points: Sequence[int], degree: int) -> Permutation:
        """The cycle ``points[0] -> points[1] -> ... -> points[0]`` (0-based)."""
        img = list(range(degree))
        k = len(points)
        for a, b in zip(points, points[1:] + points[:1] if k else []):
            img[a] = b
        if k and len(set(points)) != k:
            raise NotAPermutation(f"repeated point in cycle {points!r}")
        return cls(img)

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __getitem__(self, i: int) -> int:
        return self.images[i]

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    def __eq__(self, other) -> bool:
        if isinstance(other, Permutation):
            return self.images == other.images
        return NotImplemented

    def __lt__(self, other: Permutation) -> bool:
        return self.images < other.images

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Permutation({self.to_cycles()!r}, degree={self.degree})"

    def __str__(self) -> str:
        return self.to_cycles()

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __invert__(self) -> Permutation:
        return inverse(self)

    def __pow__(self, k: int) -> Permutation:
        return power(self, k)

    def conjugate(self, x: Permutation) -> Permutation:
        """``x^-1 * self * x``: relabel the points of ``self`` through ``x``."""
        if x.degree != self.degree:
            raise DegreeMismatch(f"{self.degree} != {x.degree}")
        img = [0] * self.degree
        xi = x.images
        for i, j in enumerate(self.images):
            img[xi[i]] = xi[j]
        return Permutation(img, check=False)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        """Disjoint cycles, each starting at its smallest point, sorted by that point."""
        seen = [False] * self.degree
        out = []
        for i in range(self.degree):
            if seen[i]:
                continue
            c = [i]
            seen[i] = True
            j = self.images[i]
            while j != i:
                seen[j] = True
                c.append(j)
                j = self.images[j]
            if len(c) > 1 or include_fixed:
                out.append(tuple(c))
        return out

    def cycle_type(self) -> tuple[int, ...]:
        return cycle_type(self)

    def parity(self) -> str:
        return parity(self)

    def sign(self) -> int:
        return 1 if parity(self) == EVEN else -1

    def order(self) -> int:
        return element_order(self)

    def support(self) -> list[int]:
        return [i for i, j in enumerate(self.images) if i != j]

    def to_cycles(self) -> str:
        return format_cycles(self)


def _check_degrees(p: Permutation, q: Permutation) -> None:
    if p.degree != q.degree:
        raise DegreeMismatch(f"degree {p.degree} != {q.degree}")


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Apply ``p`` then ``q``."""
    _check_degrees(p, q)
    qi = q.images
    return Permutation([qi[j] for j in p.images], check=False)


def compose_all(perms: Sequence[Permutation], degree: int) -> Permutation:
    return reduce(compose, perms, Permutation.identity(degree))


def inverse(p: Permutation) -> Permutation:
    img = [0] * p.degree
    for i, j in enumerate(p.images):
        img[j] = i
    return Permutation(img, check=False)


def power(p: Permutation, k: int) -> Permutation:
    if k < 0:
        return power(inverse(p), -k)
    result = Permutation.identity(p.degree)
    base = p
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


def cycle_type(p: Permutation) -> tuple[int, ...]:
    """Cycle lengths including fixed points, sorted descending."""
    return tuple(sorted((len(c) for c in p.cycles(include_fixed=True)), reverse=True))


def parity(p: Permutation) -> str:
    ncycles = len(p.cycles(include_fixed=True))
    return EVEN if (p.degree - ncycles) % 2 == 0 else ODD


def element_order(p: Permutation) -> int:
    return reduce(math.lcm, cycle_type(p), 1)


def format_cycles(p: Permutation) -> str:
    cyc = p.cycles()
    if not cyc:
        return "()"
    return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in cyc)


def parse_cycles(text: str, degree: int) -> Permutation:
    stripped = text.strip()
    img = list(range(degree))
    if not stripped:
        return Permutation(img)
    pos = 0
    cycles = []
    for m in _CYCLE_RE.finditer(stripped):
        if stripped[pos:m.start()].strip(" ,*"):
            raise NotAPermutation(f"cannot parse cycle notation {text!r}")
        pos = m.end()
        body = m.group(1).replace(",", " ").split()
        try:
            pts = [int(t) - 1 for t in body]
        except ValueError:
            raise NotAPermutation(f"cannot parse cycle notation {text!r}") from None
        if any(not 0 <= x < degree for x in pts):
            raise NotAPermutation(f"point out of range 1..{degree} in {text!r}")
        cycles.append(pts)
    if stripped[pos:].strip(" ,*"):
        raise NotAPermutation(f"cannot parse cycle notation {text!r}")
    # cycles in a product are applied left to right
    result = Permutation(img)
    for pts in cycles:
        if len(pts) > 1:
            result = compose(result, Permutation.cycle(pts, degree))
    return result
