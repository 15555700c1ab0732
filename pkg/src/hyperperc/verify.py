"""Deterministic audit battery behind the ``verify`` CLI subcommand.

Every audit is seed-fixed and either passes or names its counterexample;
statistical spot checks are kept separate so that a deterministic
falsification and a bad-luck statistical miss exit differently.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import backends
from .backends import _numpy_impl, _purepy
from .cluster import find_crossing_path
from .errors import FalsificationError
from .field import (FieldMode, FieldView, HyperplaneField, ParamVector,
                    site_open_many)
from .lattice import (Box, IndexSet, SurroundCertificate, all_index_sets,
                      l1_norm, linf_norm, project, verify_surround)
from .lifting import (HeightWalk, ProjectedCrossing, audit_lifted_path,
                      build_sync_graph, degree_parity_audit,
                      exhaustive_bt_identity, lift_crossings, sync_walks)
from .plane import (build_inclined_basis, injectivity_certificate,
                    staircase_gadget)
from .renorm import (independence_radius_audit, projected_tromino,
                     spiral_point, zigzag_region)
from .stats import box_all_open_frequency


@dataclass(frozen=True)
class AuditResult:
    name: str
    passed: bool
    detail: str = ""


def _audit(name):
    def wrap(fn):
        fn.audit_name = name
        return fn
    return wrap


@_audit("generator-cross-check")
def _audit_generator() -> AuditResult:
    probes = [0, 1, 2, 12345, 2 ** 63, 2 ** 64 - 1, _purepy.GOLDEN]
    for v in probes:
        a = _purepy.mix64(v)
        b = backends.mix64_scalar(v)
        c = _numpy_impl.mix64_scalar(v)
        if not a == b == c:
            return AuditResult("generator-cross-check", False,
                               f"mix64 mismatch at {v}: {a} {b} {c}")
    rng = random.Random(7)
    for _ in range(200):
        seed = rng.getrandbits(64)
        rank = rng.randrange(0, 64)
        cell = tuple(rng.randrange(-10 ** 6, 10 ** 6) for _ in range(2))
        p = rng.random()
        ref = _purepy.cell_bit(seed, rank, cell, p)
        got = int(backends.plane_bits(seed, rank, p,
                                      np.array([cell], dtype=np.int64))[0])
        alt = int(_numpy_impl.plane_bits(seed, rank, p,
                                         np.array([cell],
                                                  dtype=np.int64))[0])
        if not ref == got == alt:
            return AuditResult("generator-cross-check", False,
                               f"cell bit mismatch at {(seed, rank, cell, p)}")
    return AuditResult("generator-cross-check", True, "672 probes")


@_audit("inclined-basis-certificates")
def _audit_basis() -> AuditResult:
    rng = random.Random(11)
    for n in range(3, 9):
        basis = build_inclined_basis(n)
        if sum(a * b for a, b in zip(basis.w1, basis.w2)) != 0:
            return AuditResult("inclined-basis-certificates", False,
                               f"n={n}: pair not orthogonal")
        if l1_norm(basis.w1) != basis.reach \
                or l1_norm(basis.w2) != basis.reach:
            return AuditResult("inclined-basis-certificates", False,
                               f"n={n}: unequal l1 norms")
        for s in all_index_sets(n, 2):
            report = injectivity_certificate(basis, s)
            if report.min_abs_det == 0:
                return AuditResult(
                    "inclined-basis-certificates", False,
                    f"n={n}: singular pair {s.members}")
        c = basis.separation
        if c <= 0:
            return AuditResult("inclined-basis-certificates", False,
                               f"n={n}: nonpositive separation")
        for _ in range(500):
            u = (rng.randrange(-1000, 1001), rng.randrange(-1000, 1001))
            v = (rng.randrange(-1000, 1001), rng.randrange(-1000, 1001))
            du = basis.map_cell(*u)
            dv = basis.map_cell(*v)
            delta = tuple(a - b for a, b in zip(du, dv))
            dist = abs(u[0] - v[0]) + abs(u[1] - v[1])
            for s in all_index_sets(n, 2):
                lhs = l1_norm(project(delta, s))
                if lhs * c.denominator < c.numerator * dist:
                    return AuditResult(
                        "inclined-basis-certificates", False,
                        f"n={n}: separation violated at {u}, {v}, "
                        f"{s.members}")
    return AuditResult("inclined-basis-certificates", True, "n=3..8 exact")


@_audit("staircase-structure")
def _audit_staircase() -> AuditResult:
    for n in (3, 4, 5):
        basis = build_inclined_basis(n)
        g0 = staircase_gadget(basis, 0, 0)
        for path, end in ((g0.to_right, basis.w1), (g0.to_up, basis.w2)):
            for a, b in zip(path, path[1:]):
                if sum(abs(x - y) for x, y in zip(a, b)) != 1:
                    return AuditResult("staircase-structure", False,
                                       f"n={n}: path step not unit")
            if path[0] != (0,) * n or path[-1] != end:
                return AuditResult("staircase-structure", False,
                                   f"n={n}: path endpoints wrong")
        if any(l1_norm(v) > basis.reach for v in g0.sites):
            return AuditResult("staircase-structure", False,
                               f"n={n}: gadget leaves its l1 ball")
        for (x, y) in ((2, -1), (0, 1), (5, 3)):
            gx = staircase_gadget(basis, x, y)
            shift = basis.map_cell(x, y)
            expected = {tuple(c + d for c, d in zip(v, shift))
                        for v in g0.sites}
            if set(gx.sites) != expected:
                return AuditResult("staircase-structure", False,
                                   f"n={n}: translation equivariance fails")
            if gx.to_right[-1] != basis.map_cell(x + 1, y) \
                    or gx.to_up[-1] != basis.map_cell(x, y + 1):
                return AuditResult("staircase-structure", False,
                                   f"n={n}: forward anchors missing")
    return AuditResult("staircase-structure", True, "n=3..5")


def random_height_walk(rng: random.Random, target: int,
                       max_len: int) -> HeightWalk:
    """Rejection-sampled unit walk from 0 to ``target`` staying below it."""
    while True:
        length = rng.randrange(target, max_len + 1)
        if (length - target) % 2 != 0:
            continue
        values = [0]
        ok = True
        for t in range(1, length + 1):
            remaining = length - t
            choices = []
            for step in (-1, 1):
                h = values[-1] + step
                if h < 0:
                    continue
                if h >= target and t != length:
                    continue
                if remaining < abs(target - h):
                    continue
                if (remaining - abs(target - h)) % 2 != 0:
                    continue
                choices.append(h)
            if not choices:
                ok = False
                break
            values.append(rng.choice(choices))
        if ok and values[-1] == target:
            return HeightWalk(tuple(values), target)


@_audit("walk-synchronization")
def _audit_walks() -> AuditResult:
    rng = random.Random(23)
    for case in range(200):
        width = rng.choice((2, 3, 4))
        target = rng.randrange(1, 5)
        walks = [random_height_walk(rng, target, 10) for _ in range(width)]
        graph = build_sync_graph(walks)
        if not degree_parity_audit(graph):
            return AuditResult("walk-synchronization", False,
                               f"case {case}: parity audit failed")
        schedule = sync_walks(walks)  # validates its own conditions
        if schedule.length < 0:
            return AuditResult("walk-synchronization", False, "negative T")
    return AuditResult("walk-synchronization", True, "200 random instances")


def random_crossing(rng: random.Random, axis: int, target: int,
                    width: int) -> ProjectedCrossing:
    """A crossing sampled from random grids, retried until one exists."""
    while True:
        grid = np.array([[1 if rng.random() < 0.75 else 0
                          for _ in range(width)]
                         for _ in range(target + 1)], dtype=np.uint8)
        path = find_crossing_path(grid)
        if path is not None:
            return ProjectedCrossing(IndexSet.of(1, axis), tuple(path))


@_audit("crossing-lift")
def _audit_lift() -> AuditResult:
    rng = random.Random(31)
    for case in range(100):
        n = rng.choice((3, 4))
        target = rng.randrange(1, 4)
        widths = [rng.randrange(1, 4) for _ in range(n - 1)]
        box = Box((0,) * n, (target,) + tuple(w - 1 for w in widths))
        crossings = [random_crossing(rng, j + 2, target, widths[j])
                     for j in range(n - 1)]
        path = lift_crossings(crossings, box)
        if not audit_lifted_path(path, crossings, box):
            return AuditResult("crossing-lift", False,
                               f"case {case}: sitewise audit failed")
    return AuditResult("crossing-lift", True, "100 random lifts")


@_audit("crossing-identity-exhaustive")
def _audit_identity() -> AuditResult:
    report = exhaustive_bt_identity(10)
    if report.violations:
        return AuditResult("crossing-identity-exhaustive", False,
                           f"{report.violations} violating configurations")
    return AuditResult(
        "crossing-identity-exhaustive", True,
        f"{report.boxes} boxes, {report.configurations} configurations")


@_audit("independence-radius")
def _audit_independence() -> AuditResult:
    for n in (3, 4):
        for side in (1, 2):
            report = independence_radius_audit(n, side, 30, 6)
            if report.violations:
                return AuditResult(
                    "independence-radius", False,
                    f"n={n} side={side}: {report.violations[:3]}")
    return AuditResult("independence-radius", True, "n=3,4 side=1,2")


@_audit("wall-geometry-oracles")
def _audit_wall_geometry() -> AuditResult:
    # spiral recursion against the cyclic direction rule
    expect = {0: (0, 0, 0, 0), 1: (0, 0, 2, 0), 2: (0, 0, 2, 2),
              3: (0, 2, 2, 2), 4: (0, 2, 4, 2)}
    for t, point in expect.items():
        if spiral_point(t, 2, 4) != point:
            return AuditResult("wall-geometry-oracles", False,
                               f"spiral point {t} wrong")
    # tromino projection against brute force
    n, side = 3, 2
    corner = (1, -2, 3)
    for axis in (2, 3):
        brute = set()
        for box_corner in (corner,
                           (corner[0] + side,) + corner[1:],
                           tuple(c + (side if d == axis - 1 else 0)
                                 for d, c in enumerate(corner))):
            for v in Box.corner(box_corner, side).sites():
                brute.add((v[0], v[axis - 1]))
        if projected_tromino(corner, side, axis) != frozenset(brute):
            return AuditResult("wall-geometry-oracles", False,
                               f"tromino axis {axis} mismatch")
    # jagged wall against brute-force box union
    region = zigzag_region(3, 4, 2, 3.0)
    brute = set()
    import math
    for t in range(int(math.floor(3.0 * math.log(4))) + 1):
        base = spiral_point(t, 2, 3)
        for x in range(5):
            c = (base[0] + 2 * x,) + base[1:]
            brute.update(Box.corner(c, 2).sites())
    if region != frozenset(brute):
        return AuditResult("wall-geometry-oracles", False,
                           "jagged wall union mismatch")
    return AuditResult("wall-geometry-oracles", True, "")


@_audit("surround-flood-fill")
def _audit_surround() -> AuditResult:
    ball = frozenset(v for v in Box.centered(2, 2).sites())
    sphere = frozenset(v for v in Box.centered(2, 3).sites()
                       if linf_norm(v) == 3)
    cert = SurroundCertificate(ball, sphere)
    if not verify_surround(cert, lambda v: True):
        return AuditResult("surround-flood-fill", False,
                           "valid certificate rejected")
    # flood fill from the origin, blocked by the barrier, must stay inside
    seen = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        v = stack.pop()
        for d in range(2):
            for step in (1, -1):
                w = (v[0] + (step if d == 0 else 0),
                     v[1] + (step if d == 1 else 0))
                if w in sphere or w in seen or linf_norm(w) > 6:
                    continue
                seen.add(w)
                stack.append(w)
    if not seen <= ball:
        return AuditResult("surround-flood-fill", False,
                           "flood fill escaped the barrier")
    return AuditResult("surround-flood-fill", True, "")


_AUDITS = [
    _audit_generator,
    _audit_basis,
    _audit_staircase,
    _audit_walks,
    _audit_lift,
    _audit_identity,
    _audit_independence,
    _audit_wall_geometry,
    _audit_surround,
]


def run_deterministic_audits() -> list[AuditResult]:
    results = []
    for fn in _AUDITS:
        try:
            results.append(fn())
        except FalsificationError as exc:
            results.append(AuditResult(fn.audit_name, False, str(exc)))
    return results


def run_statistical_checks(seed: int = 20240601) -> list[AuditResult]:
    """Quick seeded statistical spot checks (3-sigma gates)."""
    results = []
    params = ParamVector(3, 2, (0.9, 0.8, 0.7))
    view = FieldView(HyperplaneField(seed, params), FieldMode.ALL_PLANES)
    m = 200_000
    diag = np.arange(m, dtype=np.int64)[:, None].repeat(3, axis=1)
    mean = float(site_open_many(view, diag).mean())
    want = 0.9 * 0.8 * 0.7
    sigma = (want * (1 - want) / m) ** 0.5
    ok = abs(mean - want) <= 3 * sigma
    results.append(AuditResult(
        "product-formula-spot", ok,
        f"mean {mean:.5f} vs {want:.5f} (3 sigma {3 * sigma:.5f})"))

    params99 = ParamVector.uniform(3, 2, 0.99)
    point = box_all_open_frequency(params99, 2, 20_000, seed)
    want = params99.product() ** 25
    sigma = (want * (1 - want) / point.trials) ** 0.5
    ok = abs(point.p_hat - want) <= 3 * sigma
    results.append(AuditResult(
        "box-open-formula-spot", ok,
        f"freq {point.p_hat:.5f} vs {want:.5f} (3 sigma {3 * sigma:.5f})"))
    return results
