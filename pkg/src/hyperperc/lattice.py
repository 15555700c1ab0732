"""Integer-lattice geometry: sites, index sets, boxes, surround checks.

Sites are plain tuples of ints. Two norms are in play and never
interchanged: boundaries of centered boxes use the sup norm, paths and
separation use the l1 norm.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Iterator

from .errors import InvalidArgumentError, InvalidCertificateError

Site = tuple[int, ...]

_INT64_MIN = -(2 ** 63)
_INT64_MAX = 2 ** 63 - 1


@dataclass(frozen=True)
class IndexSet:
    """A sorted k-subset of {1..n} naming one coordinate hyperplane."""

    members: tuple[int, ...]

    def __post_init__(self):
        m = self.members
        if len(m) == 0:
            raise InvalidArgumentError("index set must be nonempty")
        if any(x < 1 for x in m):
            raise InvalidArgumentError("index set members are 1-based")
        if any(m[i] >= m[i + 1] for i in range(len(m) - 1)):
            raise InvalidArgumentError(
                f"index set members must be strictly increasing: {m}")

    @classmethod
    def of(cls, *members: int) -> "IndexSet":
        return cls(tuple(sorted(members)))

    @property
    def k(self) -> int:
        return len(self.members)

    def rank(self) -> int:
        """Colexicographic rank among all subsets of the same size."""
        return sum(comb(a - 1, i + 1) for i, a in enumerate(self.members))

    def complement(self, n: int) -> "IndexSet":
        mem = tuple(i for i in range(1, n + 1) if i not in self.members)
        return IndexSet(mem)

    def positions(self) -> tuple[int, ...]:
        """0-based coordinate positions, for array indexing."""
        return tuple(i - 1 for i in self.members)

    def __contains__(self, i: int) -> bool:
        return i in self.members

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


def all_index_sets(n: int, k: int) -> tuple[IndexSet, ...]:
    """Every k-subset of {1..n}, sorted by colexicographic rank."""
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= k <= n, got k={k}, n={n}")
    sets = [IndexSet(c) for c in itertools.combinations(range(1, n + 1), k)]
    sets.sort(key=IndexSet.rank)
    return tuple(sets)


@dataclass(frozen=True)
class Box:
    """Inclusive integer box [lo_1, hi_1] x ... x [lo_n, hi_n]."""

    lo: Site
    hi: Site

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise InvalidArgumentError("box corners have mismatched length")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise InvalidArgumentError(f"empty box: lo={self.lo} hi={self.hi}")

    @classmethod
    def centered(cls, n: int, radius: int) -> "Box":
        if radius < 0:
            raise InvalidArgumentError("radius must be nonnegative")
        return cls((-radius,) * n, (radius,) * n)

    @classmethod
    def corner(cls, corner: Site, side: int) -> "Box":
        """Half-open-style corner box with ``side`` sites per axis."""
        if side < 1:
            raise InvalidArgumentError("side must be positive")
        return cls(tuple(corner), tuple(c + side - 1 for c in corner))

    @property
    def n(self) -> int:
        return len(self.lo)

    def side(self, d: int) -> int:
        return self.hi[d] - self.lo[d] + 1

    def volume(self) -> int:
        v = 1
        for d in range(self.n):
            v *= self.side(d)
        return v

    def contains(self, v: Site) -> bool:
        return all(a <= c <= b for a, c, b in zip(self.lo, v, self.hi))

    def sites(self) -> Iterator[Site]:
        ranges = [range(a, b + 1) for a, b in zip(self.lo, self.hi)]
        return itertools.product(*ranges)

    def project(self, index_set: IndexSet) -> "Box":
        pos = index_set.positions()
        return Box(tuple(self.lo[i] for i in pos),
                   tuple(self.hi[i] for i in pos))


@dataclass(frozen=True)
class Lattice:
    """Run-scoped ambient dimension; validates sites at construction."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError("ambient dimension must be >= 1")

    @property
    def origin(self) -> Site:
        return (0,) * self.n

    def site(self, coords: Iterable[int]) -> Site:
        v = tuple(int(c) for c in coords)
        if len(v) != self.n:
            raise InvalidArgumentError(
                f"site has {len(v)} coordinates, lattice dimension is {self.n}")
        if any(c < _INT64_MIN or c > _INT64_MAX for c in v):
            raise InvalidArgumentError("coordinate exceeds 64-bit range")
        return v

    def index_sets(self, k: int) -> tuple[IndexSet, ...]:
        return all_index_sets(self.n, k)


def project(v: Site, index_set: IndexSet) -> tuple[int, ...]:
    """Coordinates of ``v`` at the positions of ``index_set``, in order."""
    if index_set.members[-1] > len(v):
        raise InvalidArgumentError(
            f"index set {index_set.members} exceeds dimension {len(v)}")
    return tuple(v[i - 1] for i in index_set.members)


def l1_norm(v: Site) -> int:
    return sum(abs(c) for c in v)


def linf_norm(v: Site) -> int:
    return max(abs(c) for c in v)


def neighbors(v: Site) -> list[Site]:
    """The 2n sites at l1-distance one, ordered +e1, -e1, +e2, -e2, ..."""
    out = []
    for d in range(len(v)):
        for step in (1, -1):
            out.append(v[:d] + (v[d] + step,) + v[d + 1:])
    return out


def on_boundary(v: Site, radius: int) -> bool:
    """True iff ``v`` lies on the sup-norm sphere of the given radius."""
    return linf_norm(v) == radius


@dataclass(frozen=True)
class SurroundCertificate:
    """A finite connected region around the origin and a barrier enclosing it.

    ``region_a`` must be connected, finite and contain the origin; every
    site at l1-distance one outside it must belong to ``barrier_t``.
    """

    region_a: frozenset[Site]
    barrier_t: frozenset[Site]


def _connected(sites: frozenset[Site], start: Site) -> bool:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in neighbors(v):
            if w in sites and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(sites)


def exterior_neighborhood(region: frozenset[Site]) -> frozenset[Site]:
    out = set()
    for v in region:
        for w in neighbors(v):
            if w not in region:
                out.add(w)
    return frozenset(out)


def verify_surround(cert: SurroundCertificate,
                    predicate: Callable[[Site], bool]) -> bool:
    """Check that the barrier both encloses the region and satisfies
    ``predicate`` sitewise.

    Structural defects (empty or disconnected region, origin missing,
    barrier overlapping the region) raise InvalidCertificateError; a barrier
    that fails to enclose or fails the predicate returns False.
    """
    region = cert.region_a
    if not region:
        raise InvalidCertificateError("region is empty")
    dim = len(next(iter(region)))
    origin = (0,) * dim
    if origin not in region:
        raise InvalidCertificateError("region does not contain the origin")
    if region & cert.barrier_t:
        raise InvalidCertificateError("region and barrier overlap")
    if not _connected(region, origin):
        raise InvalidCertificateError("region is not connected")
    if not exterior_neighborhood(region) <= cert.barrier_t:
        return False
    return all(predicate(v) for v in cert.barrier_t)
