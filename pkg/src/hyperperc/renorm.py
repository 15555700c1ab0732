"""Renormalized wall of boxes: goodness, spiral geometry, diagnostics.

Corner boxes of side N are declared good when both spanning crossings
exist in each axis-plane projection of the box joined with its two forward
neighbors. Stacking boxes along axis 1 and spiraling the base through the
remaining directions yields a two-parameter family whose distant members
have disjoint projected supports, which is checked here exhaustively
rather than probabilistically.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import backends
from .cluster import finiteness_certificate_check
from .errors import FalsificationError, InvalidArgumentError
from .field import (FieldMode, FieldView, HyperplaneField, hyperplane_bit,
                    plane_bits_window, site_open_many)
from .lattice import Box, IndexSet, Site, all_index_sets
from .stats import STREAM_WALL, CurvePoint, wilson_interval


@dataclass(frozen=True)
class GoodBoxSpec:
    corner: Site
    side: int

    def box(self) -> Box:
        return Box.corner(self.corner, self.side)


def spiral_point(t: int, side: int, n: int) -> Site:
    """Corner of the t-th spiral step: step s advances ``side`` units along
    direction 2 + (s mod (n-1))."""
    if t < 0:
        raise InvalidArgumentError("spiral index must be nonnegative")
    if n < 3:
        raise InvalidArgumentError("need ambient dimension n >= 3")
    coords = [0] * n
    for s in range(1, t + 1):
        coords[1 + (s % (n - 1))] += side
    return tuple(coords)


def spiral_direction(t: int, n: int) -> int:
    """1-based axis advanced by the step into index t."""
    return 2 + (t % (n - 1))


def _grid_cells(h0: int, h1: int, x0: int, x1: int) -> np.ndarray:
    hs = np.arange(h0, h1 + 1, dtype=np.int64)
    xs = np.arange(x0, x1 + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(hs, xs, indexing="ij"), axis=-1)
    return grid.reshape(-1, 2)


def projected_tromino(corner: Site, side: int, axis: int) -> frozenset:
    """L-shaped projection to the plane {1, axis} of a box joined with its
    axis-1 and axis-``axis`` forward neighbors."""
    if not 2 <= axis <= len(corner):
        raise InvalidArgumentError("axis must lie in [2, n]")
    h, x = corner[0], corner[axis - 1]
    cells = set()
    for dh, dx in ((0, 0), (side, 0), (0, side)):
        for i in range(side):
            for j in range(side):
                cells.add((h + dh + i, x + dx + j))
    return frozenset(cells)


def _tromino_rects(h: int, x: int, side: int):
    return (((h, h + side - 1), (x, x + side - 1)),
            ((h + side, h + 2 * side - 1), (x, x + side - 1)),
            ((h, h + side - 1), (x + side, x + 2 * side - 1)))


def is_good_box(view: FieldView, corner: Site, side: int) -> bool:
    """Both spanning crossings in every axis-plane projection: a height
    crossing of the box stacked with its axis-1 neighbor and a sideways
    crossing of the box joined with its axis-j neighbor."""
    if side < 1:
        raise InvalidArgumentError("box side must be positive")
    f = view.field
    n = f.n
    h = corner[0]
    for axis in range(2, n + 1):
        plane = IndexSet.of(1, axis)
        x = corner[axis - 1]
        vert = plane_bits_window(
            f, plane, _grid_cells(h, h + 2 * side - 1, x, x + side - 1)
        ).reshape(2 * side, side)
        if not backends.cross_grid(vert, 0):
            return False
        horiz = plane_bits_window(
            f, plane, _grid_cells(h, h + side - 1, x, x + 2 * side - 1)
        ).reshape(side, 2 * side)
        if not backends.cross_grid(horiz, 1):
            return False
    return True


def wall_bit(view: FieldView, t: int, x: int, side: int) -> int:
    """Goodness indicator of the wall box at spiral index t and height
    step x."""
    corner = list(spiral_point(t, side, view.field.n))
    corner[0] += side * x
    return int(is_good_box(view, tuple(corner), side))


def calibrate_box_side(params, seed: int, threshold: float = 0.95,
                       trials: int = 200, max_side: int = 64) -> int:
    """Smallest box side (by doubling search) whose goodness frequency
    exceeds ``threshold`` at the given parameters.

    Existence holds whenever the axis planes are supercritical, but no
    closed form is available, so the choice is empirical.
    """
    if not 0 < threshold < 1:
        raise InvalidArgumentError("threshold must lie in (0, 1)")
    side = 1
    while side <= max_side:
        hits = 0
        for t in range(trials):
            trial_seed = backends.derive_seed(seed, STREAM_WALL + 1, t)
            view = FieldView(HyperplaneField(trial_seed, params),
                             FieldMode.ALL_PLANES)
            hits += is_good_box(view, (0,) * params.n, side)
        if hits / trials > threshold:
            return side
        side *= 2
    raise InvalidArgumentError(
        f"no box side up to {max_side} reaches goodness {threshold} at "
        "these parameters")


@dataclass(frozen=True)
class IndependenceAuditReport:
    pairs_checked: int
    violations: tuple


def independence_radius_audit(n: int, side: int, t_max: int,
                              x_shift_max: int) -> IndependenceAuditReport:
    """Deterministic support-disjointness scan over the wall.

    For every pair of wall coordinates within the horizon that is far
    apart in spiral index (>= 2(n-1)) or in height step (>= 2), all
    projected tromino supports must be disjoint. Any violating pair is
    reported; the expected report is empty.
    """
    violations = []
    checked = 0
    spirals = [spiral_point(t, side, n) for t in range(t_max + 1)]
    for t in range(t_max + 1):
        for s in range(t_max + 1):
            for dx in range(-x_shift_max, x_shift_max + 1):
                if abs(t - s) < 2 * (n - 1) and abs(dx) < 2:
                    continue
                checked += 1
                pt, ps = spirals[t], spirals[s]
                for axis in range(2, n + 1):
                    ra = _tromino_rects(pt[0], pt[axis - 1], side)
                    rb = _tromino_rects(ps[0] + side * dx, ps[axis - 1],
                                        side)
                    if _rect_sets_overlap(ra, rb):
                        violations.append((t, 0, s, dx, axis))
                        break
    return IndependenceAuditReport(checked, tuple(violations))


def _rect_sets_overlap(rects_a, rects_b) -> bool:
    for (ha, xa) in rects_a:
        for (hb, xb) in rects_b:
            if ha[0] <= hb[1] and hb[0] <= ha[1] \
                    and xa[0] <= xb[1] and xb[0] <= xa[1]:
                return True
    return False


def zigzag_region(n: int, height_steps: int, side: int,
                  width_factor: float) -> frozenset:
    """Site set of the jagged wall: boxes at spiral indices up to
    floor(width_factor * log(height_steps)) stacked ``height_steps`` + 1
    high along axis 1."""
    if height_steps < 2 or width_factor <= 0:
        raise InvalidArgumentError(
            "need height_steps >= 2 and positive width factor")
    t_max = int(math.floor(width_factor * math.log(height_steps)))
    sites = set()
    for t in range(t_max + 1):
        base = spiral_point(t, side, n)
        for x in range(height_steps + 1):
            corner = list(base)
            corner[0] += side * x
            sites.update(Box.corner(tuple(corner), side).sites())
    return frozenset(sites)


def good_path_to_open_path(view: FieldView,
                           box_path: list[GoodBoxSpec]) -> list[Site]:
    """Explicit all-axis-planes-open path through a path of good boxes.

    The box path must step by one box side along a coordinate direction at
    a time and consist of good boxes only; the returned path starts in the
    first box and ends in the last. A search failure is raised loudly: the
    goodness structure guarantees existence.
    """
    if not box_path:
        raise InvalidArgumentError("box path is empty")
    side = box_path[0].side
    n = view.field.n
    for spec in box_path:
        if spec.side != side:
            raise InvalidArgumentError("box sides must agree")
        if len(spec.corner) != n:
            raise InvalidArgumentError("box corner dimension mismatch")
    for a, b in zip(box_path, box_path[1:]):
        delta = tuple(y - x for x, y in zip(a.corner, b.corner))
        moved = [abs(d) for d in delta]
        if sorted(moved)[-1] != side or sum(moved) != side:
            raise InvalidArgumentError(
                "consecutive boxes must differ by one side along one axis")
    for spec in box_path:
        if not is_good_box(view, spec.corner, side):
            raise InvalidArgumentError(
                f"box at {spec.corner} is not good")

    xi_view = FieldView(view.field, FieldMode.AXIS_PLANES)
    boxes = [spec.box() for spec in box_path]
    union = set()
    for b in boxes:
        union.update(b.sites())
    union_sorted = sorted(union)
    bits = site_open_many(xi_view, np.array(union_sorted, dtype=np.int64))
    open_sites = {v for v, bit in zip(union_sorted, bits) if bit}
    first, last = boxes[0], boxes[-1]
    parent = {}
    queue = deque()
    for v in union_sorted:
        if first.contains(v) and v in open_sites:
            parent[v] = None
            queue.append(v)
    goal = None
    while queue:
        v = queue.popleft()
        if last.contains(v):
            goal = v
            break
        for d in range(n):
            for step in (1, -1):
                w = v[:d] + (v[d] + step,) + v[d + 1:]
                if w in parent or w not in open_sites:
                    continue
                parent[w] = v
                queue.append(w)
    if goal is None:
        raise FalsificationError(
            "no open path through a path of good boxes; goodness should "
            "guarantee one")
    path = []
    cur: Optional[Site] = goal
    while cur is not None:
        path.append(cur)
        cur = parent[cur]
    path.reverse()
    return path


@dataclass(frozen=True)
class EventStat:
    name: str
    trials: int
    successes: int

    def as_point(self) -> CurvePoint:
        lo, hi = wilson_interval(self.successes, self.trials) \
            if self.trials else (0.0, 1.0)
        p = self.successes / self.trials if self.trials else 0.0
        return CurvePoint(0, self.trials, self.successes, p, lo, hi)


@dataclass(frozen=True)
class WallDiagnostics:
    events: tuple[EventStat, ...]
    implication_failures: tuple[int, ...]

    def frequency(self, name: str) -> float:
        for e in self.events:
            if e.name == name:
                return e.successes / e.trials if e.trials else 0.0
        raise KeyError(name)


def wall_event_diagnostics(view: FieldView, height_steps: int, side: int,
                           width_factor: float, barrier_radius: int,
                           trials: int) -> WallDiagnostics:
    """Monte Carlo frequencies of the wall-construction events.

    Events per fresh field: origin_axis_open (every axis plane open at the
    origin), wall_crossing (the goodness field crosses the renormalized
    rectangle sideways), region_offaxis_open (every wall site open in all
    planes avoiding axis 1), basement_open (the height -1 layer under the
    wall open in all axis planes), circuit_closed (a fully closed square
    circuit around the plane {2,3} origin), barrier_found (a finiteness
    certificate for plane {2,3} inside ``barrier_radius``). Whenever the
    first four events hold jointly, the origin must reach the sup-norm
    sphere of radius side * height_steps; failures of that implication are
    collected (expected: none).
    """
    if view.field.k != 2:
        raise InvalidArgumentError("wall diagnostics require k = 2")
    f = view.field
    n = f.n
    params = f.params
    t_wall = int(math.floor(width_factor * math.log(height_steps)))
    region = sorted(zigzag_region(n, height_steps, side, width_factor))
    region_arr = np.array(region, dtype=np.int64)
    base = [v for v in region if v[0] == 0]
    basement_arr = np.array([(v[0] - 1,) + v[1:] for v in base],
                            dtype=np.int64)
    off_axis = [s for s in all_index_sets(n, 2) if 1 not in s]
    axis_sets = [s for s in all_index_sets(n, 2) if 1 in s]
    circuit_half = 4 * side * width_factor * math.floor(
        math.log(height_steps))
    circuit_hi = int(circuit_half) + 1
    plane23 = IndexSet.of(2, 3)
    circuit = [(i, j) for i in range(-2, circuit_hi + 1)
               for j in range(-2, circuit_hi + 1)
               if i in (-2, circuit_hi) or j in (-2, circuit_hi)]
    circuit_arr = np.array(circuit, dtype=np.int64)

    names = ["origin_axis_open", "wall_crossing", "region_offaxis_open",
             "basement_open", "circuit_closed", "barrier_found",
             "core_conjunction", "boundary_reached"]
    counts = {name: 0 for name in names}
    failures = []
    reach = side * height_steps
    pair_a = np.array([s.positions()[0] for s in params.index_sets],
                      dtype=np.int64)
    pair_b = np.array([s.positions()[1] for s in params.index_sets],
                      dtype=np.int64)
    from .backends._purepy import TWO53
    ranks = np.array([s.rank() for s in params.index_sets], dtype=np.int64)
    thrs = np.array([p * TWO53 for p in params.values], dtype=np.float64)

    for trial in range(trials):
        seed_t = backends.derive_seed(f.seed, STREAM_WALL, trial)
        ft = HyperplaneField(seed_t, params)
        vt = FieldView(ft, FieldMode.ALL_PLANES)

        origin_axis = all(
            hyperplane_bit(ft, s, (0, 0)) == 1 for s in axis_sets)

        grid = np.empty((t_wall + 1, height_steps + 1), dtype=np.uint8)
        for t in range(t_wall + 1):
            for x in range(height_steps + 1):
                grid[t, x] = wall_bit(vt, t, x, side)
        crossing = backends.cross_grid(grid, 1)

        offaxis_ok = True
        for s in off_axis:
            pos = s.positions()
            cells = np.unique(region_arr[:, pos], axis=0)
            if not plane_bits_window(ft, s, cells).all():
                offaxis_ok = False
                break

        basement_ok = True
        for s in axis_sets:
            pos = s.positions()
            cells = np.unique(basement_arr[:, pos], axis=0)
            if not plane_bits_window(ft, s, cells).all():
                basement_ok = False
                break

        circuit_closed = not plane_bits_window(ft, plane23,
                                               circuit_arr).any()

        barrier = finiteness_certificate_check(
            vt, plane23, Box.centered(n, barrier_radius)) is not None

        core = origin_axis and crossing and offaxis_ok and basement_ok
        reached = False
        if core:
            _, reached_m, _, _ = backends.explore_origin(
                seed_t, n, pair_a, pair_b, ranks, thrs, reach, reach)
            reached = reached_m
            if not reached:
                failures.append(trial)

        counts["origin_axis_open"] += int(origin_axis)
        counts["wall_crossing"] += int(crossing)
        counts["region_offaxis_open"] += int(offaxis_ok)
        counts["basement_open"] += int(basement_ok)
        counts["circuit_closed"] += int(circuit_closed)
        counts["barrier_found"] += int(barrier)
        counts["core_conjunction"] += int(core)
        counts["boundary_reached"] += int(reached)

    events = tuple(EventStat(name, trials, counts[name]) for name in names)
    return WallDiagnostics(events, tuple(failures))
