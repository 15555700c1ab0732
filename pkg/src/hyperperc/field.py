"""Deterministic sampling of the hyperplane fields and their products.

Each coordinate hyperplane carries an independent Bernoulli field; a lattice
site is open in the product field iff the projection to every active plane
is open. Bits come from a counter-based generator keyed by
(seed, plane rank, cell coordinates), so the field is consistent over the
whole infinite lattice without storing state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from . import backends
from .backends._purepy import TWO53, cell_bit
from .errors import InvalidArgumentError
from .lattice import Box, IndexSet, Site, all_index_sets, project

MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class ParamVector:
    """Open probability for every k-subset plane of {1..n}."""

    n: int
    k: int
    values: tuple[float, ...]  # aligned with all_index_sets(n, k)

    def __post_init__(self):
        sets = all_index_sets(self.n, self.k)
        if len(self.values) != len(sets):
            raise InvalidArgumentError(
                f"expected {len(sets)} probabilities, got {len(self.values)}")
        if any(not 0.0 <= p <= 1.0 for p in self.values):
            raise InvalidArgumentError("probabilities must lie in [0, 1]")

    @classmethod
    def from_mapping(cls, n: int, k: int,
                     mapping: Mapping[IndexSet, float]) -> "ParamVector":
        sets = all_index_sets(n, k)
        missing = [s for s in sets if s not in mapping]
        if missing:
            raise InvalidArgumentError(
                f"missing probabilities for {[s.members for s in missing]}")
        if len(mapping) != len(sets):
            extra = [s for s in mapping if s not in sets]
            raise InvalidArgumentError(
                f"unexpected index sets {[tuple(s) for s in extra]}")
        return cls(n, k, tuple(float(mapping[s]) for s in sets))

    @classmethod
    def uniform(cls, n: int, k: int, p: float) -> "ParamVector":
        return cls(n, k, (float(p),) * len(all_index_sets(n, k)))

    @cached_property
    def index_sets(self) -> tuple[IndexSet, ...]:
        return all_index_sets(self.n, self.k)

    def p(self, index_set: IndexSet) -> float:
        try:
            pos = self.index_sets.index(index_set)
        except ValueError:
            raise InvalidArgumentError(
                f"unknown index set {index_set.members}") from None
        return self.values[pos]

    def product(self) -> float:
        out = 1.0
        for p in self.values:
            out *= p
        return out

    def replace(self, index_set: IndexSet, p: float) -> "ParamVector":
        pos = self.index_sets.index(index_set)
        vals = list(self.values)
        vals[pos] = float(p)
        return ParamVector(self.n, self.k, tuple(vals))

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {s.members: p for s, p in zip(self.index_sets, self.values)}


@dataclass(frozen=True)
class HyperplaneField:
    """Seeded family of independent Bernoulli fields, one per plane."""

    seed: int
    params: ParamVector

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def seed_u64(self) -> int:
        return self.seed & MASK64


class FieldMode(enum.Enum):
    ALL_PLANES = "all"
    AXIS_PLANES = "axis"  # only the planes containing coordinate 1
    CUSTOM = "custom"


@dataclass(frozen=True)
class FieldView:
    """A field together with the subset of planes entering the product."""

    field: HyperplaneField
    mode: FieldMode = FieldMode.ALL_PLANES
    custom: tuple[IndexSet, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.mode is FieldMode.AXIS_PLANES and self.field.k != 2:
            raise InvalidArgumentError(
                "axis-plane products are defined only for k = 2")
        if self.mode is FieldMode.CUSTOM:
            known = set(self.field.params.index_sets)
            bad = [s for s in self.custom if s not in known]
            if bad:
                raise InvalidArgumentError(
                    f"custom planes unknown to field: {bad}")

    @cached_property
    def active_sets(self) -> tuple[IndexSet, ...]:
        sets = self.field.params.index_sets
        if self.mode is FieldMode.ALL_PLANES:
            return sets
        if self.mode is FieldMode.AXIS_PLANES:
            return tuple(s for s in sets if 1 in s)
        return tuple(s for s in sets if s in set(self.custom))

    @cached_property
    def kernel_arrays(self):
        """(ranks, thresholds, positions) arrays for the active planes."""
        sets = self.active_sets
        ranks = np.array([s.rank() for s in sets], dtype=np.int64)
        thrs = np.array([self.field.params.p(s) * TWO53 for s in sets],
                        dtype=np.float64)
        proj = np.array([s.positions() for s in sets], dtype=np.int64)
        return ranks, thrs, proj


def all_planes_view(seed: int, params: ParamVector) -> FieldView:
    return FieldView(HyperplaneField(seed, params), FieldMode.ALL_PLANES)


def axis_planes_view(seed: int, params: ParamVector) -> FieldView:
    return FieldView(HyperplaneField(seed, params), FieldMode.AXIS_PLANES)


def hyperplane_bit(f: HyperplaneField, index_set: IndexSet,
                   cell: Iterable[int]) -> int:
    """The Bernoulli bit of one plane at one cell; pure in (seed, I, cell)."""
    cell = tuple(int(c) for c in cell)
    if len(cell) != f.k:
        raise InvalidArgumentError(
            f"cell has {len(cell)} coordinates, plane dimension is {f.k}")
    p = f.params.p(index_set)
    return cell_bit(f.seed_u64, index_set.rank(), cell, p)


def site_open(view: FieldView, v: Site) -> int:
    """Product-field bit at ``v``: 1 iff every active plane bit is 1."""
    if len(v) != view.field.n:
        raise InvalidArgumentError(
            f"site has {len(v)} coordinates, field dimension is {view.field.n}")
    for s in view.active_sets:
        if hyperplane_bit(view.field, s, project(v, s)) == 0:
            return 0
    return 1


def site_open_many(view: FieldView, sites: np.ndarray) -> np.ndarray:
    """Vectorized ``site_open`` over an (m, n) int64 array of sites."""
    sites = np.ascontiguousarray(sites, dtype=np.int64)
    if sites.ndim != 2 or sites.shape[1] != view.field.n:
        raise InvalidArgumentError("sites must be an (m, n) array")
    ranks, thrs, proj = view.kernel_arrays
    return backends.site_open_bits(view.field.seed_u64, ranks, thrs, proj,
                                   sites)


def plane_bits_window(f: HyperplaneField, index_set: IndexSet,
                      cells: np.ndarray) -> np.ndarray:
    """Vectorized plane bits over an (m, k) int64 array of cells."""
    cells = np.ascontiguousarray(cells, dtype=np.int64)
    if cells.ndim != 2 or cells.shape[1] != f.k:
        raise InvalidArgumentError("cells must be an (m, k) array")
    return backends.plane_bits(f.seed_u64, index_set.rank(),
                               f.params.p(index_set), cells)


def column_structure_check(view: FieldView, index_set: IndexSet,
                           cell: tuple[int, ...], window: Box) -> bool:
    """A closed plane cell must close its whole fiber inside ``window``."""
    if hyperplane_bit(view.field, index_set, cell) == 1:
        return True
    pos = set(index_set.positions())
    fiber = [v for v in window.sites()
             if all(v[i] == c for i, c in zip(sorted(pos), cell))]
    if not fiber:
        return True
    arr = np.array(fiber, dtype=np.int64)
    return not site_open_many(view, arr).any()


def box_all_open_probability(params: ParamVector, radius: int) -> float:
    """Exact probability that every site of the centered box of the given
    sup-norm radius is open: (prod p_I) ** ((2R+1)**k)."""
    if radius < 0:
        raise InvalidArgumentError("radius must be nonnegative")
    return params.product() ** ((2 * radius + 1) ** params.k)
