"""Synchronized-walk machinery and crossing lifting.

Given one bottom-to-top crossing per coordinate plane through axis 1, a
single lattice path is constructed whose projection to every such plane
stays on the given crossing. The synchronization step runs all the
extracted height walks through a common clock by searching a product graph
whose vertices are tuples of walk positions at equal heights.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import backends
from .errors import FalsificationError, InvalidArgumentError
from .field import FieldView, hyperplane_bit
from .lattice import Box, IndexSet, Site, project


@dataclass(frozen=True)
class HeightWalk:
    """Unit-step height profile from 0 to ``target`` within [0, target].

    Walks extracted from crossings additionally stay strictly below the
    target before their final time; the synchronization machinery does not
    need that, so it is not enforced here.
    """

    values: tuple[int, ...]
    target: int

    def __post_init__(self):
        v = self.values
        if not v:
            raise InvalidArgumentError("walk must have at least one value")
        if v[0] != 0 or v[-1] != self.target:
            raise InvalidArgumentError("walk must run from 0 to target")
        for t in range(1, len(v)):
            if abs(v[t] - v[t - 1]) != 1:
                raise InvalidArgumentError("walk steps must be +-1")
        if any(not 0 <= h <= self.target for h in v):
            raise InvalidArgumentError("walk must stay inside [0, target]")

    @property
    def length(self) -> int:
        return len(self.values) - 1


@dataclass(frozen=True)
class SyncSchedule:
    """Common clock of length ``length`` with one reparametrization per
    walk; composing each walk with its reparametrization keeps all heights
    equal at all times."""

    length: int
    reparams: tuple[tuple[int, ...], ...]


class SyncGraph:
    """Product graph over walk-position tuples with equal heights.

    Edges join tuples whose every coordinate differs by exactly one.
    Membership is decided by formula; the full vertex list is materialized
    only on demand (audits), so large instances stay cheap to search.
    """

    def __init__(self, walks: Sequence[HeightWalk]):
        if not walks:
            raise InvalidArgumentError("need at least one walk")
        targets = {w.target for w in walks}
        if len(targets) != 1:
            raise InvalidArgumentError(
                f"walks disagree on the target height: {sorted(targets)}")
        self.walks = tuple(walks)
        self.target = walks[0].target
        self.width = len(walks)
        self.start = (0,) * self.width
        self.goal = tuple(w.length for w in walks)
        self._signs = tuple(itertools.product((-1, 1), repeat=self.width))

    def has_vertex(self, v: tuple[int, ...]) -> bool:
        for i, w in enumerate(self.walks):
            if not 0 <= v[i] <= w.length:
                return False
        h = self.walks[0].values[v[0]]
        return all(w.values[v[i]] == h for i, w in enumerate(self.walks))

    def neighbors(self, v: tuple[int, ...]) -> list[tuple[int, ...]]:
        out = []
        for sign in self._signs:
            w = tuple(t + s for t, s in zip(v, sign))
            if self.has_vertex(w):
                out.append(w)
        return out

    def degree(self, v: tuple[int, ...]) -> int:
        return len(self.neighbors(v))

    def vertices(self):
        by_height = []
        for w in self.walks:
            slots = [[] for _ in range(self.target + 1)]
            for t, h in enumerate(w.values):
                slots[h].append(t)
            by_height.append(slots)
        for h in range(self.target + 1):
            pools = [slots[h] for slots in by_height]
            if any(not pool for pool in pools):
                continue
            yield from itertools.product(*pools)

    def vertex_count(self) -> int:
        return sum(1 for _ in self.vertices())


def build_sync_graph(walks: Sequence[HeightWalk]) -> SyncGraph:
    return SyncGraph(walks)


def degree_parity_audit(graph: SyncGraph) -> bool:
    """Every vertex has even degree except the two clock endpoints, which
    have degree exactly one (zero when they coincide)."""
    start, goal = graph.start, graph.goal
    for v in graph.vertices():
        deg = graph.degree(v)
        if v == start and v == goal:
            ok = deg == 0
        elif v == start or v == goal:
            ok = deg == 1
        else:
            ok = deg % 2 == 0
        if not ok:
            return False
    return True


def sync_walks(walks: Sequence[HeightWalk]) -> SyncSchedule:
    """Shortest synchronization schedule, found by breadth-first search
    from the all-zero tuple with lexicographic tie-breaking.

    A missing path would contradict the parity argument that guarantees
    the endpoints share a component, so it raises FalsificationError.
    """
    graph = build_sync_graph(walks)
    start, goal = graph.start, graph.goal
    if start == goal:
        schedule = SyncSchedule(0, tuple((0,) for _ in walks))
        _validate_schedule(walks, schedule)
        return schedule
    parent: dict = {start: None}
    queue = deque([start])
    found = False
    while queue:
        v = queue.popleft()
        if v == goal:
            found = True
            break
        for w in graph.neighbors(v):
            if w not in parent:
                parent[w] = v
                queue.append(w)
    if not found:
        raise FalsificationError(
            "no synchronization path between walk endpoints; this "
            "contradicts the degree-parity argument")
    chain = []
    cur: Optional[tuple] = goal
    while cur is not None:
        chain.append(cur)
        cur = parent[cur]
    chain.reverse()
    reparams = tuple(tuple(v[i] for v in chain) for i in range(graph.width))
    schedule = SyncSchedule(len(chain) - 1, reparams)
    _validate_schedule(walks, schedule)
    return schedule


def _validate_schedule(walks: Sequence[HeightWalk],
                       schedule: SyncSchedule) -> None:
    T = schedule.length
    for i, walk in enumerate(walks):
        f = schedule.reparams[i]
        if len(f) != T + 1:
            raise FalsificationError("schedule length mismatch")
        for t in range(1, T + 1):
            if abs(f[t] - f[t - 1]) != 1:
                raise FalsificationError("reparametrization step is not +-1")
    ref = walks[0]
    f0 = schedule.reparams[0]
    if ref.values[f0[0]] != 0 or ref.values[f0[T]] != ref.target:
        raise FalsificationError("schedule does not span 0..target")
    for t in range(T + 1):
        h = ref.values[f0[t]]
        for i, walk in enumerate(walks):
            if walk.values[schedule.reparams[i][t]] != h:
                raise FalsificationError("heights desynchronized")


@dataclass(frozen=True)
class ProjectedCrossing:
    """A bottom-to-top crossing inside one projected plane rectangle.

    ``host`` is the plane index set {1, j}; path entries are (height, x_j)
    pairs: nearest-neighbor steps, height 0 at the start, the target height
    reached exactly once at the very end.
    """

    host: IndexSet
    path: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.host) != 2 or 1 not in self.host:
            raise InvalidArgumentError(
                "crossing host must be a plane {1, j}")
        p = self.path
        if not p:
            raise InvalidArgumentError("crossing path is empty")
        if p[0][0] != 0:
            raise InvalidArgumentError("crossing must start at height 0")
        top = p[-1][0]
        for t in range(1, len(p)):
            d = abs(p[t][0] - p[t - 1][0]) + abs(p[t][1] - p[t - 1][1])
            if d != 1:
                raise InvalidArgumentError(
                    "crossing steps must be nearest-neighbor")
        for t in range(len(p) - 1):
            if not 0 <= p[t][0] < top:
                raise InvalidArgumentError(
                    "crossing must stay strictly below its top before the end")
        if top < 0:
            raise InvalidArgumentError("crossing top height is negative")

    @property
    def top(self) -> int:
        return self.path[-1][0]

    @property
    def axis(self) -> int:
        return self.host.members[1]


def extract_height_walk(crossing: ProjectedCrossing
                        ) -> tuple[HeightWalk, tuple[int, ...]]:
    """Subsequence of height-changing times of a crossing.

    Returns the height profile sampled at those times together with the
    time map itself; the final crossing step always changes height, so the
    map ends at the last path index.
    """
    p = crossing.path
    taus = [0]
    for s in range(1, len(p)):
        if p[s][0] != p[s - 1][0]:
            taus.append(s)
    values = tuple(p[t][0] for t in taus)
    return HeightWalk(values, crossing.top), tuple(taus)


def _stitch(upper: Site, lower: Site, upper_axes: set[int]) -> list[Site]:
    """Connector from ``upper`` (height h+1) to ``lower`` (height h).

    Axes in ``upper_axes`` are aligned to the lower endpoint before the
    height drop, the rest after it; each group in ascending axis order.
    The split keeps every intermediate site on the walk runs that are
    known open in its plane.
    """
    n = len(upper)
    sites = [tuple(upper)]
    cur = list(upper)

    def slide(axis):
        target = lower[axis]
        step = 1 if target > cur[axis] else -1
        while cur[axis] != target:
            cur[axis] += step
            sites.append(tuple(cur))

    for axis in range(1, n):
        if axis in upper_axes:
            slide(axis)
    cur[0] -= 1
    sites.append(tuple(cur))
    for axis in range(1, n):
        if axis not in upper_axes:
            slide(axis)
    return sites


def _loop_erase(path: list[Site]) -> list[Site]:
    out: list[Site] = []
    index: dict[Site, int] = {}
    for v in path:
        if v in index:
            cut = index[v]
            for w in out[cut + 1:]:
                del index[w]
            del out[cut + 1:]
        else:
            index[v] = len(out)
            out.append(v)
    return out


def lift_crossings(crossings: Sequence[ProjectedCrossing],
                   box: Box) -> list[Site]:
    """Lift one crossing per axis plane to a single path in ``box``.

    The result runs from a site projecting onto every crossing's start to
    a site projecting onto every crossing's end, and each of its sites
    projects into the respective crossing in every plane (hence is open
    there whenever the crossing sites are open).
    """
    n = box.n
    if n < 2:
        raise InvalidArgumentError("box dimension must be at least 2")
    if len(crossings) != n - 1:
        raise InvalidArgumentError(
            f"expected {n - 1} crossings for dimension {n}, "
            f"got {len(crossings)}")
    by_axis = sorted(crossings, key=lambda c: c.axis)
    axes = [c.axis for c in by_axis]
    if axes != list(range(2, n + 1)):
        raise InvalidArgumentError(
            f"crossing hosts must cover planes {{1,2}}..{{1,{n}}}, "
            f"got axes {axes}")
    if box.lo[0] != 0:
        raise InvalidArgumentError("box height range must start at 0")
    top = box.hi[0]
    tops = {c.top for c in by_axis}
    if tops != {top}:
        raise InvalidArgumentError(
            f"crossing heights {sorted(tops)} do not match box height {top}")
    for c in by_axis:
        d = c.axis - 1
        for h, x in c.path:
            if not (0 <= h <= top and box.lo[d] <= x <= box.hi[d]):
                raise InvalidArgumentError(
                    f"crossing for axis {c.axis} leaves the box")

    walks, taus = [], []
    for c in by_axis:
        walk, tau = extract_height_walk(c)
        walks.append(walk)
        taus.append(tau)
    schedule = sync_walks(walks)
    T = schedule.length

    def node(t: int) -> Site:
        h = walks[0].values[schedule.reparams[0][t]]
        coords = [h]
        for i, c in enumerate(by_axis):
            coords.append(c.path[taus[i][schedule.reparams[i][t]]][1])
        return tuple(coords)

    path = [node(0)]
    for t in range(1, T + 1):
        prev, cur = node(t - 1), node(t)
        if cur[0] == prev[0] + 1:
            down_moves = {i + 1 for i in range(n - 1)
                          if schedule.reparams[i][t]
                          < schedule.reparams[i][t - 1]}
            seg = _stitch(cur, prev, down_moves)
            seg.reverse()
        else:
            down_moves = {i + 1 for i in range(n - 1)
                          if schedule.reparams[i][t]
                          > schedule.reparams[i][t - 1]}
            seg = _stitch(prev, cur, down_moves)
        path.extend(seg[1:])
    return _loop_erase(path)


def audit_lifted_path(path: Sequence[Site],
                      crossings: Sequence[ProjectedCrossing],
                      box: Box) -> bool:
    """Independent sitewise check of a lifted path.

    Verifies nearest-neighbor steps, containment in the box, endpoint
    projections, and that every site projects into every crossing.
    """
    if not path:
        return False
    by_axis = sorted(crossings, key=lambda c: c.axis)
    site_sets = {c.axis: set(c.path) for c in by_axis}
    for t in range(1, len(path)):
        if sum(abs(a - b) for a, b in zip(path[t], path[t - 1])) != 1:
            return False
    for v in path:
        if not box.contains(v):
            return False
        for c in by_axis:
            if (v[0], v[c.axis - 1]) not in site_sets[c.axis]:
                return False
    for c in by_axis:
        if (path[0][0], path[0][c.axis - 1]) != c.path[0]:
            return False
        if (path[-1][0], path[-1][c.axis - 1]) != c.path[-1]:
            return False
    return True


@dataclass(frozen=True)
class FactorizationReport:
    trials: int
    counterexamples: tuple


def _box_product_cross(plane_bits: dict[int, np.ndarray], box: Box) -> bool:
    """Bottom-to-top crossing of the box under the product of axis-plane
    bits (grid indexed by box-relative coordinates, height along axis 0)."""
    n = box.n
    sides = [box.side(d) for d in range(n)]
    top = sides[0] - 1

    def is_open(v):
        return all(plane_bits[axis][v[0], v[axis - 1]]
                   for axis in range(2, n + 1))

    seen = set()
    queue = deque()
    for rest in itertools.product(*[range(s) for s in sides[1:]]):
        v = (0,) + rest
        if is_open(v):
            seen.add(v)
            queue.append(v)
    while queue:
        v = queue.popleft()
        if v[0] == top:
            return True
        for d in range(n):
            for step in (1, -1):
                w = v[:d] + (v[d] + step,) + v[d + 1:]
                if not 0 <= w[d] < sides[d]:
                    continue
                if w in seen or not is_open(w):
                    continue
                seen.add(w)
                queue.append(w)
    return False


def bt_factorization_check(box: Box, trials: int,
                           seed: int) -> FactorizationReport:
    """Randomized check of the crossing identity: the product field crosses
    the box bottom-to-top iff every axis-plane projection crosses.

    Plane configurations are sampled uniformly; any counterexample is
    reported verbatim.
    """
    n = box.n
    if n < 3:
        raise InvalidArgumentError("box dimension must be at least 3")
    counterexamples = []
    for trial in range(trials):
        plane = {}
        for axis in range(2, n + 1):
            h = box.side(0)
            w = box.side(axis - 1)
            cells = np.array([(i, j) for i in range(h) for j in range(w)],
                             dtype=np.int64)
            bits = backends.plane_bits(
                backends.derive_seed(seed, axis, trial), 0, 0.5, cells)
            plane[axis] = bits.reshape(h, w)
        lhs = _box_product_cross(plane, box)
        rhs = all(backends.cross_grid(plane[axis], 0)
                  for axis in range(2, n + 1))
        if lhs != rhs:
            counterexamples.append(
                {axis: plane[axis].tolist() for axis in plane})
    return FactorizationReport(trials, tuple(counterexamples))


@dataclass(frozen=True)
class ExhaustiveIdentityReport:
    boxes: int
    configurations: int
    violations: int


def exhaustive_bt_identity(max_projected_sites: int
                           ) -> ExhaustiveIdentityReport:
    """Exhaustively sweep every 3-d box whose two projected rectangles hold
    at most ``max_projected_sites`` sites in total, over all of their bit
    configurations, counting violations of the crossing identity."""
    boxes = 0
    configs = 0
    violations = 0
    limit = max_projected_sites
    for hgt in range(1, limit + 1):
        for nb in range(1, limit + 1):
            if hgt * nb > limit - hgt:
                break
            for nc in range(1, limit + 1):
                if hgt * (nb + nc) > limit:
                    break
                boxes += 1
                configs += 1 << (hgt * (nb + nc))
                violations += backends.bt_identity_violations(hgt, nb, nc)
    return ExhaustiveIdentityReport(boxes, configs, violations)


def crossing_from_field(view: FieldView, index_set: IndexSet,
                        rect_lo: tuple[int, int],
                        shape: tuple[int, int]) -> Optional[ProjectedCrossing]:
    """Extract an actual bottom-to-top crossing of one plane rectangle from
    a sampled field, trimmed at its first arrival at the top."""
    h, w = shape
    cells = np.array([(rect_lo[0] + i, rect_lo[1] + j)
                      for i in range(h) for j in range(w)], dtype=np.int64)
    bits = np.array([hyperplane_bit(view.field, index_set, tuple(c))
                     for c in cells], dtype=np.uint8).reshape(h, w)
    from .cluster import find_crossing_path
    path = find_crossing_path(bits, rect_lo)
    if path is None:
        return None
    return ProjectedCrossing(index_set, tuple(path))
