"""Inclined integer plane: basis construction and certificates.

A pair of orthogonal integer vectors with equal l1 norms spans a planar
sublattice whose projection to every coordinate plane is injective; open
sites along it are therefore independent. Staircase gadgets thicken the
sublattice into a connected subgraph. All certificates use exact rational
arithmetic; floats appear only in probabilities.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import FalsificationError, InvalidArgumentError
from .field import FieldView, ParamVector, site_open_many
from .lattice import IndexSet, Site, all_index_sets, l1_norm, project


def plane_kernel_vectors(n: int) -> tuple[Site, Site, Callable]:
    """Integer basis (v1, v2) of the kernel of the map sending x to
    (x_j + x_{n-1} + j*x_n)_{j<=n-2}, plus the map itself for audits."""
    if n < 3:
        raise InvalidArgumentError("need ambient dimension n >= 3")
    v1 = (-1,) * (n - 2) + (1, 0)
    v2 = tuple(-j for j in range(1, n - 1)) + (0, 1)

    def kernel_map(v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != n:
            raise InvalidArgumentError(f"vector must have length {n}")
        return tuple(v[j - 1] + v[n - 2] + j * v[n - 1]
                     for j in range(1, n - 1))

    return v1, v2, kernel_map


@dataclass(frozen=True)
class InclinedBasis:
    """Orthogonal integer spanning pair with equal l1 norms.

    ``reach`` is the common l1 norm: every staircase gadget fits inside an
    l1 ball of that radius. ``separation`` certifies that projected images
    of distinct plane cells stay proportionally far apart.
    """

    w1: Site
    w2: Site
    reach: int
    separation: Fraction

    @property
    def n(self) -> int:
        return len(self.w1)

    def map_cell(self, x: int, y: int) -> Site:
        return tuple(x * a + y * b for a, b in zip(self.w1, self.w2))


def _l1_frac(v) -> Fraction:
    return sum(abs(Fraction(c)) for c in v)


def separation_constant_of(w1: Site, w2: Site) -> Fraction:
    """Certified lower bound for the projected-separation ratio.

    For each coordinate pair J the 2x2 block of the spanning map is
    inverted exactly; the reciprocal of its induced l1 norm bounds the
    contraction through that pair, and projecting to any superset of J can
    only increase the l1 norm, so the minimum over all J is a valid bound
    for every projection of size >= 2.
    """
    n = len(w1)
    best = None
    for i, j in itertools.combinations(range(n), 2):
        det = w1[i] * w2[j] - w2[i] * w1[j]
        if det == 0:
            raise FalsificationError(
                f"projection to coordinates ({i + 1}, {j + 1}) is singular; "
                "the separation certificate degenerates")
        bound = Fraction(abs(det),
                         max(abs(w1[i]) + abs(w2[i]),
                             abs(w1[j]) + abs(w2[j])))
        if best is None or bound < best:
            best = bound
    if best is None or best <= 0:
        raise FalsificationError("no positive separation bound")
    return best


def build_inclined_basis(n: int) -> InclinedBasis:
    """Orthogonalize the kernel vectors exactly and rescale both by twice
    the other's l1 norm, which lands the pair back in the integer lattice
    with equal l1 norms."""
    v1, v2, _ = plane_kernel_vectors(n)
    t1 = tuple(Fraction(c) for c in v1)
    dot12 = sum(a * b for a, b in zip(v1, v2))
    dot11 = sum(a * a for a in v1)
    coef = Fraction(dot12, dot11)
    t2 = tuple(Fraction(b) - coef * a for a, b in zip(v1, v2))
    assert t2 == tuple(Fraction(b) + Fraction(2 - n, 2) * a
                       for a, b in zip(v1, v2))
    n1 = _l1_frac(t1)
    n2 = _l1_frac(t2)
    w1f = tuple(2 * n2 * c for c in t1)
    w2f = tuple(2 * n1 * c for c in t2)
    for c in w1f + w2f:
        if c.denominator != 1:
            raise FalsificationError(f"scaled basis entry {c} is not integer")
    w1 = tuple(int(c) for c in w1f)
    w2 = tuple(int(c) for c in w2f)
    if sum(a * b for a, b in zip(w1, w2)) != 0:
        raise FalsificationError("scaled basis lost orthogonality")
    r1, r2 = l1_norm(w1), l1_norm(w2)
    if r1 != r2:
        raise FalsificationError(f"l1 norms differ: {r1} != {r2}")
    return InclinedBasis(w1, w2, r1, separation_constant_of(w1, w2))


def separation_constant(basis: InclinedBasis) -> Fraction:
    return separation_constant_of(basis.w1, basis.w2)


@dataclass(frozen=True)
class InjectivityReport:
    index_set: tuple[int, ...]
    determinants: tuple[tuple[tuple[int, int], int], ...]
    min_abs_det: int
    injective: bool


def injectivity_certificate(basis: InclinedBasis,
                            index_set: IndexSet) -> InjectivityReport:
    """Exact 2x2 minors of the projected spanning map for every coordinate
    pair inside ``index_set``; any nonzero minor certifies injectivity."""
    if len(index_set) < 2:
        raise InvalidArgumentError("index set must have at least 2 members")
    if index_set.members[-1] > basis.n:
        raise InvalidArgumentError("index set exceeds basis dimension")
    dets = []
    for a, b in itertools.combinations(index_set.members, 2):
        i, j = a - 1, b - 1
        det = basis.w1[i] * basis.w2[j] - basis.w2[i] * basis.w1[j]
        dets.append(((a, b), det))
    min_abs = min(abs(d) for _, d in dets)
    return InjectivityReport(index_set.members, tuple(dets), min_abs,
                             any(d != 0 for _, d in dets))


@dataclass(frozen=True)
class StaircaseGadget:
    """Axis-aligned staircases linking a plane cell's image to the images
    of its two forward neighbors; the whole gadget fits inside the l1 ball
    of radius ``reach`` around the anchor."""

    cell: tuple[int, int]
    anchor: Site
    to_right: tuple[Site, ...]  # anchor -> image of (x+1, y)
    to_up: tuple[Site, ...]     # anchor -> image of (x, y+1)
    sites: tuple[Site, ...]


def _staircase(start: Site, components: Site) -> list[Site]:
    path = [start]
    cur = list(start)
    for axis, delta in enumerate(components):
        step = 1 if delta > 0 else -1
        for _ in range(abs(delta)):
            cur[axis] += step
            path.append(tuple(cur))
    return path


def staircase_gadget(basis: InclinedBasis, x: int, y: int) -> StaircaseGadget:
    anchor = basis.map_cell(x, y)
    right = _staircase(anchor, basis.w1)
    up = _staircase(anchor, basis.w2)
    seen = {}
    for v in right + up:
        seen.setdefault(v, None)
    return StaircaseGadget((x, y), anchor, tuple(right), tuple(up),
                           tuple(seen))


def gadget_open(view: FieldView, basis: InclinedBasis, x: int, y: int) -> int:
    """1 iff every site of the staircase gadget at (x, y) is open."""
    gadget = staircase_gadget(basis, x, y)
    sites = np.array(gadget.sites, dtype=np.int64)
    return int(site_open_many(view, sites).all())


@dataclass(frozen=True)
class MixingClassParams:
    """Finite-dependence class of the gadget indicator process: fields at
    plane distance >= ``dependence_radius`` are independent, and each
    indicator is 1 with probability at least ``lower_bound``."""

    dependence_radius: Fraction
    lower_bound: float


def mixing_class_params(basis: InclinedBasis, params: ParamVector,
                        k: int | None = None) -> MixingClassParams:
    k = params.k if k is None else k
    if k != params.k:
        raise InvalidArgumentError("k disagrees with the parameter vector")
    chi = Fraction(3 * basis.reach) / basis.separation
    s = params.product() ** ((2 * basis.reach + 1) ** k)
    return MixingClassParams(chi, s)


def projected_supports_disjoint(basis: InclinedBasis, index_set: IndexSet,
                                u: tuple[int, int],
                                v: tuple[int, int]) -> bool:
    """Whether the projected l1 balls of radius ``reach`` around the
    images of two plane cells are disjoint in the given plane."""
    du = basis.map_cell(*u)
    dv = basis.map_cell(*v)
    delta = tuple(a - b for a, b in zip(du, dv))
    return l1_norm(project(delta, index_set)) > 2 * basis.reach


def all_projections_injective(basis: InclinedBasis, k: int) -> bool:
    return all(injectivity_certificate(basis, s).injective
               for s in all_index_sets(basis.n, k))
