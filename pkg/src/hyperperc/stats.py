"""Decay-curve estimation, model discrimination and phase scans.

Monte Carlo trials derive one field seed per trial index, independent of
how trials are split across workers, so results are bit-identical for any
worker count. Frequencies carry Wilson 95% intervals, which stay honest
next to 0 and 1 where decay curves live.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import backends
from .cluster import connects_to_boundary, truncated_connect
from .errors import InvalidArgumentError
from .field import FieldMode, FieldView, HyperplaneField, ParamVector
from .lattice import IndexSet, all_index_sets

Z95 = 1.959963984540054

# Stream tags keep per-purpose trial seeds disjoint. Decay trials share one
# stream across radii so the boundary indicator is coupled monotonically.
STREAM_DECAY = 1
STREAM_BOX = 2
STREAM_PHASE = 100
STREAM_WALL = 200

# Window volume past which the stamped-array kernel is not attempted.
_KERNEL_VOLUME_LIMIT = 2 ** 31


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    if trials <= 0 or not 0 <= successes <= trials:
        raise InvalidArgumentError("need 0 <= successes <= trials, trials > 0")
    z2 = Z95 * Z95
    phat = successes / trials
    denom = trials + z2
    center = (successes + z2 / 2) / denom
    half = Z95 * math.sqrt(successes * (trials - successes) / trials
                           + z2 / 4) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class CurvePoint:
    radius: int
    trials: int
    successes: int
    p_hat: float
    ci_lo: float
    ci_hi: float


def _point(radius: int, trials: int, successes: int) -> CurvePoint:
    lo, hi = wilson_interval(successes, trials)
    return CurvePoint(radius, trials, successes, successes / trials, lo, hi)


@dataclass(frozen=True)
class DecayCurve:
    entries: tuple[CurvePoint, ...]
    truncated: bool = False
    outer_multiple: int = 4

    def __post_init__(self):
        radii = [e.radius for e in self.entries]
        if any(radii[i] >= radii[i + 1] for i in range(len(radii) - 1)):
            raise InvalidArgumentError("radii must be strictly increasing")


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, workers)
    bounds = np.linspace(0, trials, workers + 1, dtype=np.int64)
    return [(int(bounds[i]), int(bounds[i + 1]))
            for i in range(workers) if bounds[i] < bounds[i + 1]]


def _pairs_arrays(params: ParamVector):
    from .backends._purepy import TWO53
    sets = params.index_sets
    pair_a = np.array([s.positions()[0] for s in sets], dtype=np.int64)
    pair_b = np.array([s.positions()[1] for s in sets], dtype=np.int64)
    ranks = np.array([s.rank() for s in sets], dtype=np.int64)
    thrs = np.array([p * TWO53 for p in params.values], dtype=np.float64)
    return pair_a, pair_b, ranks, thrs


def _count_boundary_python(params: ParamVector, stream: int, t0: int,
                           t1: int, radius: int, outer: int,
                           truncated: bool, seed: int) -> int:
    hits = 0
    for t in range(t0, t1):
        trial_seed = backends.derive_seed(seed, stream, t)
        view = FieldView(HyperplaneField(trial_seed, params),
                         FieldMode.ALL_PLANES)
        if truncated:
            hits += int(truncated_connect(view, radius, outer))
        else:
            hits += int(connects_to_boundary(view, radius))
    return hits


def boundary_hit_counts(params: ParamVector, radius: int, outer: int,
                        truncated: bool, trials: int, seed: int,
                        stream: int = STREAM_DECAY,
                        workers: int = 1) -> int:
    """Count trials whose origin cluster reaches the target boundary.

    Dispatches to the backend kernel for k = 2 when the search window fits
    the stamped-array layout, otherwise runs the reference explorer.
    """
    n = params.n
    window = outer if truncated else radius
    vol = (2 * window + 1) ** n
    use_kernel = params.k == 2 and vol <= _KERNEL_VOLUME_LIMIT
    chunks = _chunks(trials, workers)

    if not use_kernel:
        total = 0
        for t0, t1 in chunks:
            total += _count_boundary_python(params, stream, t0, t1, radius,
                                            outer, truncated, seed)
        return total

    pair_a, pair_b, ranks, thrs = _pairs_arrays(params)

    def run(chunk):
        t0, t1 = chunk
        return backends.count_boundary_trials(
            seed & 0xFFFFFFFFFFFFFFFF, stream, t0, t1, n, pair_a, pair_b,
            ranks, thrs, radius, window, truncated)

    if len(chunks) == 1:
        return run(chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return sum(pool.map(run, chunks))


def estimate_decay_curve(params: ParamVector, radii: Sequence[int],
                         trials, seed: int, truncated: bool = False,
                         outer_multiple: int = 4,
                         workers: int = 1) -> DecayCurve:
    """Monte Carlo frequency of the boundary-connection event per radius.

    Trial t at every radius reuses the same derived field seed, so the
    per-trial indicators are coupled and, at a uniform trial count, the
    estimated curve is exactly monotone in the radius. ``trials`` may be a
    single count or one count per radius; deep subcritical curves need far
    more depth at large radii than at small ones.
    """
    radii = [int(r) for r in radii]
    if any(radii[i] >= radii[i + 1] for i in range(len(radii) - 1)):
        raise InvalidArgumentError("radii must be strictly increasing")
    if isinstance(trials, int):
        per_radius = [trials] * len(radii)
    else:
        per_radius = [int(t) for t in trials]
        if len(per_radius) != len(radii):
            raise InvalidArgumentError(
                "need one trial count per radius")
    if any(t < 100 for t in per_radius):
        raise InvalidArgumentError("need at least 100 trials")
    if truncated and outer_multiple < 2:
        raise InvalidArgumentError("outer multiple must be at least 2")
    entries = []
    for radius, n_trials in zip(radii, per_radius):
        outer = outer_multiple * radius if truncated else radius
        hits = boundary_hit_counts(params, radius, outer, truncated,
                                   n_trials, seed, STREAM_DECAY, workers)
        entries.append(_point(radius, n_trials, hits))
    return DecayCurve(tuple(entries), truncated, outer_multiple)


def box_all_open_frequency(params: ParamVector, radius: int, trials: int,
                           seed: int, workers: int = 1) -> CurvePoint:
    """Frequency, over fresh fields, of every site in the centered box of
    the given radius being open."""
    from .backends._purepy import TWO53
    sets = params.index_sets
    ranks = np.array([s.rank() for s in sets], dtype=np.int64)
    thrs = np.array([p * TWO53 for p in params.values], dtype=np.float64)
    cells = np.array(list(itertools.product(range(-radius, radius + 1),
                                            repeat=params.k)),
                     dtype=np.int64)
    chunks = _chunks(trials, workers)

    def run(chunk):
        t0, t1 = chunk
        return backends.count_box_allopen_trials(
            seed & 0xFFFFFFFFFFFFFFFF, STREAM_BOX, t0, t1, ranks, thrs,
            cells)

    if len(chunks) == 1:
        hits = run(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            hits = sum(pool.map(run, chunks))
    return _point(radius, trials, hits)


class DecayModel(enum.Enum):
    POWER_LAW = "power_law"
    EXPONENTIAL = "exponential"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FitReport:
    model: DecayModel
    amplitude: float
    exponent: float  # decay exponent (power law) or rate (exponential)
    gof: float       # weighted residual sum of squares
    aic: float
    points: int


_TINY = 1e-300


def _weighted_fit(xs: np.ndarray, ys: np.ndarray,
                  weights: np.ndarray) -> tuple[float, float, float]:
    sw = weights.sum()
    sx = (weights * xs).sum()
    sy = (weights * ys).sum()
    sxx = (weights * xs * xs).sum()
    sxy = (weights * xs * ys).sum()
    denom = sw * sxx - sx * sx
    if denom <= 0:
        raise InvalidArgumentError("degenerate regression design")
    b1 = (sw * sxy - sx * sy) / denom
    b0 = (sy - b1 * sx) / sw
    resid = ys - (b0 + b1 * xs)
    return b0, b1, float((weights * resid * resid).sum())


def _positive_entries(curve: DecayCurve):
    pts = [e for e in curve.entries if e.p_hat > 0.0]
    if len(pts) < 4:
        raise InvalidArgumentError(
            "need at least 4 entries with positive frequency")
    return pts


def _log_weights(pts) -> np.ndarray:
    out = []
    for e in pts:
        var = (1.0 - e.p_hat) / (e.trials * e.p_hat)
        var = max(var, 1.0 / (e.trials * e.trials))
        out.append(1.0 / var)
    return np.array(out, dtype=np.float64)


def _fit(curve: DecayCurve, model: DecayModel) -> FitReport:
    pts = _positive_entries(curve)
    ys = np.log(np.array([e.p_hat for e in pts]))
    if model is DecayModel.POWER_LAW:
        xs = np.log(np.array([float(e.radius) for e in pts]))
    else:
        xs = np.array([float(e.radius) for e in pts])
    w = _log_weights(pts)
    b0, b1, gof = _weighted_fit(xs, ys, w)
    m = len(pts)
    aic = m * math.log(max(gof, _TINY) / m) + 4.0
    return FitReport(model, math.exp(b0), -b1, gof, aic, m)


def fit_power_law(curve: DecayCurve) -> FitReport:
    """Weighted regression of log frequency on log radius."""
    return _fit(curve, DecayModel.POWER_LAW)


def fit_exponential(curve: DecayCurve) -> FitReport:
    """Weighted regression of log frequency on the radius."""
    return _fit(curve, DecayModel.EXPONENTIAL)


def model_select(curve: DecayCurve, margin: float = 10.0) -> DecayModel:
    """Pick the decay law by AIC with a decision margin; curves that fit
    both (or support neither) come back INCONCLUSIVE."""
    try:
        power = fit_power_law(curve)
        expo = fit_exponential(curve)
    except InvalidArgumentError:
        return DecayModel.INCONCLUSIVE
    if power.aic + margin < expo.aic:
        return DecayModel.POWER_LAW
    if expo.aic + margin < power.aic:
        return DecayModel.EXPONENTIAL
    return DecayModel.INCONCLUSIVE


@dataclass(frozen=True)
class CriticalRefs:
    """Reference critical values used only for labeling parameter vectors.

    Site-percolation thresholds per lattice dimension; never consulted by
    the simulation itself.
    """

    pc_by_dim: dict = field(default_factory=lambda: {
        2: 0.592746,
        3: 0.311608,
        4: 0.196885,
        5: 0.140797,
        6: 0.109017,
        7: 0.088951,
    })
    supercritical_product: float = 0.99

    def pc(self, dim: int) -> float:
        try:
            return self.pc_by_dim[dim]
        except KeyError:
            raise InvalidArgumentError(
                f"no reference critical value for dimension {dim}") from None


def _has_subcritical_partition(params: ParamVector, pc_k: float) -> bool:
    n, k = params.n, params.k
    if n % k != 0:
        return False
    sub = [s for s in params.index_sets if params.p(s) < pc_k]

    def cover(remaining: frozenset) -> bool:
        if not remaining:
            return True
        pivot = min(remaining)
        for s in sub:
            mem = set(s.members)
            if pivot in mem and mem <= remaining:
                if cover(remaining - mem):
                    return True
        return False

    return cover(frozenset(range(1, n + 1)))


def classify_regime(params: ParamVector,
                    refs: Optional[CriticalRefs] = None) -> tuple[str, ...]:
    """Arithmetic regime tags for a parameter vector.

    pivot_subcritical: one plane below the k-dimensional critical value
    whose n-k sibling planes (sharing k-1 members) all sit below 1.
    partition_subcritical: k divides n and some partition of the axes into
    planes is entirely subcritical. exponential_decay: enough subcritical
    planes that every direction meets one. axis_power_law: all planes
    through axis 1 above the planar critical value with some other plane
    below 1. supercritical: product of all parameters near 1.
    """
    refs = refs or CriticalRefs()
    n, k = params.n, params.k
    pc_k = refs.pc(k)
    tags = []

    pivot = False
    for s in params.index_sets:
        if params.p(s) >= pc_k:
            continue
        outside = [m for m in range(1, n + 1) if m not in s]
        for core in itertools.combinations(s.members, k - 1):
            if all(params.p(IndexSet(tuple(sorted(core + (m,))))) < 1.0
                   for m in outside):
                pivot = True
                break
        if pivot:
            break
    if pivot:
        tags.append("pivot_subcritical")

    if _has_subcritical_partition(params, pc_k):
        tags.append("partition_subcritical")

    subcritical_count = sum(1 for p in params.values if p < pc_k)
    if subcritical_count >= math.comb(n - 1, k) + 1:
        tags.append("exponential_decay")

    if k == 2:
        pc2 = refs.pc(2)
        axis_sets = [s for s in params.index_sets if 1 in s]
        off_sets = [s for s in params.index_sets if 1 not in s]
        if all(params.p(s) > pc2 for s in axis_sets) \
                and any(params.p(s) < 1.0 for s in off_sets):
            tags.append("axis_power_law")

    if params.product() >= refs.supercritical_product:
        tags.append("supercritical")

    return tuple(tags)


@dataclass(frozen=True)
class PhaseRow:
    params: dict
    point: CurvePoint
    regimes: tuple[str, ...]


def phase_scan(grid: Sequence[ParamVector], probe_radius: int, trials: int,
               seed: int, refs: Optional[CriticalRefs] = None,
               workers: int = 1) -> tuple[PhaseRow, ...]:
    """Boundary-connection frequency at one probe radius for each parameter
    vector, tagged with the regimes its entries satisfy."""
    refs = refs or CriticalRefs()
    rows = []
    for i, params in enumerate(grid):
        hits = boundary_hit_counts(params, probe_radius, probe_radius,
                                   False, trials, seed,
                                   STREAM_PHASE + i, workers)
        rows.append(PhaseRow(params.as_dict(), _point(probe_radius, trials,
                                                      hits),
                             classify_regime(params, refs)))
    return tuple(rows)
