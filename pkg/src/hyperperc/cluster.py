"""Cluster exploration and crossing events.

The functions here are the reference implementations: deterministic
breadth-first search driven by the scalar field API, suitable for oracle
tests and desk-scale runs. The Monte Carlo estimators in
:mod:`hyperperc.stats` use the backend kernels instead; both see the same
field bits.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import backends
from .errors import InvalidArgumentError
from .field import FieldView, HyperplaneField, hyperplane_bit, site_open
from .lattice import (Box, IndexSet, Site, SurroundCertificate,
                      exterior_neighborhood, linf_norm, neighbors, project,
                      verify_surround)


@dataclass(frozen=True)
class ClusterResult:
    sites: frozenset[Site]
    touched_boundary: bool
    frontier_exhausted: bool


def explore_origin_cluster(view: FieldView, radius: int,
                           cap: int = 2 ** 62) -> ClusterResult:
    """Breadth-first exploration of the open cluster of the origin inside
    the centered sup-norm box of the given radius.

    ``touched_boundary`` reports whether any cluster site lies on the box
    boundary; ``frontier_exhausted`` is False iff the site cap cut the
    search short.
    """
    if radius < 0 or cap < 1:
        raise InvalidArgumentError("radius must be >= 0 and cap >= 1")
    n = view.field.n
    origin = (0,) * n
    if site_open(view, origin) == 0:
        return ClusterResult(frozenset(), False, True)
    seen = {origin}
    queue = deque([origin])
    touched = radius == 0
    exhausted = True
    while queue:
        v = queue.popleft()
        for w in neighbors(v):
            if w in seen or linf_norm(w) > radius:
                continue
            if site_open(view, w) == 0:
                continue
            if len(seen) >= cap:
                exhausted = False
                queue.clear()
                break
            seen.add(w)
            if linf_norm(w) == radius:
                touched = True
            queue.append(w)
    return ClusterResult(frozenset(seen), touched, exhausted)


def connects_to_boundary(view: FieldView, radius: int) -> bool:
    """True iff the origin cluster reaches the sup-norm sphere ``radius``."""
    return explore_origin_cluster(view, radius).touched_boundary


def truncated_connect(view: FieldView, radius: int, outer: int) -> bool:
    """True iff the origin cluster reaches sup-norm ``radius`` but dies
    before reaching ``outer`` (the finite-volume stand-in for staying
    finite)."""
    if outer <= radius:
        raise InvalidArgumentError("outer radius must exceed inner radius")
    result = explore_origin_cluster(view, outer)
    if result.touched_boundary:
        return False
    return any(linf_norm(v) >= radius for v in result.sites)


@dataclass(frozen=True)
class Rectangle2D:
    """Integer rectangle [a, b] x [c, d]; ``height_axis`` names the axis
    along which bottom-to-top crossings run (1 = second coordinate, the
    planar convention; projected boxes use 0)."""

    a: int
    b: int
    c: int
    d: int
    height_axis: int = 1

    def __post_init__(self):
        if self.a >= self.b or self.c >= self.d:
            raise InvalidArgumentError("rectangle requires a < b and c < d")
        if self.height_axis not in (0, 1):
            raise InvalidArgumentError("height_axis must be 0 or 1")


def _materialize(rect: Rectangle2D,
                 open_pred: Callable[[int, int], bool]) -> np.ndarray:
    h = rect.b - rect.a + 1
    w = rect.d - rect.c + 1
    grid = np.empty((h, w), dtype=np.uint8)
    for i in range(h):
        for j in range(w):
            grid[i, j] = 1 if open_pred(rect.a + i, rect.c + j) else 0
    return grid


def crossing_bt(rect: Rectangle2D,
                open_pred: Callable[[int, int], bool]) -> bool:
    """Open path spanning the rectangle along its height axis."""
    return backends.cross_grid(_materialize(rect, open_pred),
                               rect.height_axis)


def crossing_lr(rect: Rectangle2D,
                open_pred: Callable[[int, int], bool]) -> bool:
    """Open path spanning the rectangle across its height axis."""
    return backends.cross_grid(_materialize(rect, open_pred),
                               1 - rect.height_axis)


def find_crossing_path(grid: np.ndarray,
                       lo: tuple[int, int] = (0, 0)) -> Optional[list]:
    """Shortest open path from the bottom row to the top row of a 0/1 grid
    (height along axis 0), or None.

    The path stays strictly below the top row until its final site, which
    makes it directly usable as a lifting input. Coordinates are offset by
    ``lo``.
    """
    grid = np.asarray(grid)
    h, w = grid.shape
    parent = {}
    queue = deque()
    for j in range(w):
        if grid[0, j]:
            parent[(0, j)] = None
            queue.append((0, j))
    while queue:
        i, j = queue.popleft()
        if i == h - 1:
            path = []
            cur = (i, j)
            while cur is not None:
                path.append((cur[0] + lo[0], cur[1] + lo[1]))
                cur = parent[cur]
            path.reverse()
            return path
        for i2, j2 in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= i2 < h and 0 <= j2 < w and grid[i2, j2] \
                    and (i2, j2) not in parent:
                parent[(i2, j2)] = (i, j)
                queue.append((i2, j2))
    return None


def plane_open_cluster(f: HyperplaneField, index_set: IndexSet,
                       window: Box) -> tuple[set, bool]:
    """Open cluster of the plane origin inside a k-dimensional window.

    Returns (cluster cells, certified) where ``certified`` is False when
    the cluster touches the window boundary, i.e. finiteness cannot be
    concluded from this window.
    """
    k = f.k
    if window.n != k:
        raise InvalidArgumentError("window dimension must equal k")
    origin = (0,) * k
    if not window.contains(origin):
        raise InvalidArgumentError("window must contain the plane origin")
    if hyperplane_bit(f, index_set, origin) == 0:
        return set(), True
    on_edge = lambda c: any(c[d] == window.lo[d] or c[d] == window.hi[d]
                            for d in range(k))
    seen = {origin}
    queue = deque([origin])
    certified = not on_edge(origin)
    while queue:
        c = queue.popleft()
        for w in neighbors(c):
            if w in seen or not window.contains(w):
                continue
            if hyperplane_bit(f, index_set, w) == 0:
                continue
            seen.add(w)
            if on_edge(w):
                certified = False
            queue.append(w)
    return seen, certified


def fiber_site_closed(f: HyperplaneField, index_set: IndexSet,
                      plane_cell: tuple[int, ...],
                      comp_cell: tuple[int, ...]) -> bool:
    """Whether the unique site over ``plane_cell`` with complement
    coordinates ``comp_cell`` is closed in some plane other than
    ``index_set``."""
    n = f.n
    comp = index_set.complement(n)
    coords = [0] * n
    for pos, c in zip(index_set.positions(), plane_cell):
        coords[pos] = c
    for pos, c in zip(comp.positions(), comp_cell):
        coords[pos] = c
    site = tuple(coords)
    for other in f.params.index_sets:
        if other == index_set:
            continue
        if hyperplane_bit(f, other, project(site, other)) == 0:
            return True
    return False


def _sphere_and_ball(k: int, r: int) -> tuple[frozenset, frozenset]:
    box = Box.centered(k, r)
    sphere, ball = set(), set()
    for v in box.sites():
        if linf_norm(v) == r:
            sphere.add(v)
        else:
            ball.add(v)
    return frozenset(ball), frozenset(sphere)


def finiteness_certificate_check(view: FieldView, index_set: IndexSet,
                                 window: Box) -> Optional[SurroundCertificate]:
    """Search for a deterministic finiteness certificate.

    Looks for (a) a finite open cluster of the origin in the ``index_set``
    plane and (b) a barrier in the complement coordinates, every site of
    which is fiber-closed for every cluster cell. Sup-norm spheres of
    growing radius are tried first, then shell-of-rectangle barriers built
    from fully closed hyperplane lines. Returns None when the window holds
    no certificate.
    """
    f = view.field
    n, k = f.n, f.k
    if not (1 <= k <= n - 1):
        raise InvalidArgumentError("need both k >= 1 and n - k >= 1")
    if window.n != n:
        raise InvalidArgumentError("window dimension must equal n")
    comp = index_set.complement(n)
    cluster, certified = plane_open_cluster(f, index_set, window.project(index_set))
    if not certified:
        return None
    cluster_cells = sorted(cluster)

    def barrier_site_ok(v):
        return all(fiber_site_closed(f, index_set, x, v)
                   for x in cluster_cells)

    comp_window = window.project(comp)
    cap = min(min(-comp_window.lo[d], comp_window.hi[d])
              for d in range(comp_window.n))
    for r in range(1, cap + 1):
        ball, sphere = _sphere_and_ball(n - k, r)
        if all(barrier_site_ok(v) for v in sphere):
            return SurroundCertificate(ball, sphere)
    cert = _rectangle_certificate(f, index_set, cluster_cells, comp_window)
    if cert is not None and verify_surround(cert, barrier_site_ok):
        return cert
    cert = _flood_fill_certificate(barrier_site_ok, comp_window)
    if cert is not None and verify_surround(cert, barrier_site_ok):
        return cert
    return None


def _flood_fill_certificate(barrier_site_ok, comp_window: Box
                            ) -> Optional[SurroundCertificate]:
    """Maximal in-window barrier: grow the origin's component through
    non-blocked sites; its exterior neighborhood is blocked by
    construction, so the component works as the enclosed region whenever
    it stays inside the window."""
    origin = (0,) * comp_window.n
    blocked_cache: dict = {}

    def blocked(v):
        if v not in blocked_cache:
            blocked_cache[v] = barrier_site_ok(v)
        return blocked_cache[v]

    region = {origin}
    stack = [origin]
    while stack:
        v = stack.pop()
        for w in neighbors(v):
            if w in region:
                continue
            if not comp_window.contains(w):
                return None
            if blocked(w):
                continue
            region.add(w)
            stack.append(w)
    barrier = exterior_neighborhood(frozenset(region))
    return SurroundCertificate(frozenset(region), frozenset(barrier))


def _rectangle_certificate(f: HyperplaneField, index_set: IndexSet,
                           cluster_cells: list,
                           comp_window: Box) -> Optional[SurroundCertificate]:
    """Barrier as the shell of a rectangle bounded by closed lines.

    For each complement direction m, hunt for offsets +t/-t and a plane J
    sharing k-1 members with ``index_set`` whose cells over the cluster
    footprint are all closed; the hyperplane v_m = t is then fiber-closed
    for every cluster cell.
    """
    import itertools

    n, k = f.n, f.k
    comp_members = index_set.complement(n).members
    subsets = list(itertools.combinations(index_set.members, k - 1))

    def line_blocked(member: int, offset: int) -> bool:
        if not cluster_cells:
            return True
        for sub in subsets:
            joined = tuple(sorted(sub + (member,)))
            j_set = IndexSet(joined)
            pos_in_site = {m: i for i, m in enumerate(joined)}
            blocked = True
            for x in cluster_cells:
                cell = [0] * k
                for m_i, c in zip(index_set.members, x):
                    if m_i in pos_in_site:
                        cell[pos_in_site[m_i]] = c
                cell[pos_in_site[member]] = offset
                if hyperplane_bit(f, j_set, tuple(cell)) == 1:
                    blocked = False
                    break
            if blocked:
                return True
        return False

    lo, hi = [], []
    for d, member in enumerate(comp_members):
        t_plus = next((t for t in range(1, comp_window.hi[d] + 1)
                       if line_blocked(member, t)), None)
        t_minus = next((t for t in range(1, -comp_window.lo[d] + 1)
                        if line_blocked(member, -t)), None)
        if t_plus is None or t_minus is None:
            return None
        lo.append(-t_minus)
        hi.append(t_plus)
    shell, interior = set(), set()
    rect = Box(tuple(lo), tuple(hi))
    for v in rect.sites():
        if any(v[d] == lo[d] or v[d] == hi[d] for d in range(rect.n)):
            shell.add(v)
        else:
            interior.add(v)
    if not interior:
        return None
    ext = exterior_neighborhood(frozenset(interior))
    if not ext <= shell:
        return None
    return SurroundCertificate(frozenset(interior), frozenset(shell))
