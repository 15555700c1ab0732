import itertools
import random

import numpy as np
import pytest

from hyperperc.errors import FalsificationError, InvalidArgumentError
from hyperperc.field import ParamVector, all_planes_view
from hyperperc.lattice import Box, IndexSet
from hyperperc.lifting import (HeightWalk, ProjectedCrossing, SyncSchedule,
                               audit_lifted_path, bt_factorization_check,
                               build_sync_graph, crossing_from_field,
                               degree_parity_audit, exhaustive_bt_identity,
                               extract_height_walk, lift_crossings,
                               sync_walks)

from tests_lifting_util import random_valid_walk, schedule_conditions_hold


class TestHeightWalk:
    def test_validation(self):
        HeightWalk((0, 1, 2), 2)
        with pytest.raises(InvalidArgumentError):
            HeightWalk((0, 2), 2)
        with pytest.raises(InvalidArgumentError):
            HeightWalk((1, 2), 2)
        with pytest.raises(InvalidArgumentError):
            HeightWalk((0, 1), 2)
        with pytest.raises(InvalidArgumentError):
            HeightWalk((0, -1, 0, 1), 1)


class TestSyncGraph:
    def test_two_trivial_walks(self):
        g = build_sync_graph([HeightWalk((0, 1), 1), HeightWalk((0, 1), 1)])
        assert sorted(g.vertices()) == [(0, 0), (1, 1)]
        assert g.neighbors((0, 0)) == [(1, 1)]
        assert degree_parity_audit(g)

    def test_spec_neighbor_classification(self):
        g = build_sync_graph([HeightWalk((0, 1, 0, 1), 1),
                              HeightWalk((0, 1), 1)])
        # (1, 1): first walk has a local peak, second sits at its endpoint;
        # both moves go down, so exactly the two downward tuples remain
        assert sorted(g.neighbors((1, 1))) == [(0, 0), (2, 0)]
        assert degree_parity_audit(g)

    def test_peak_valley_clash_is_isolated(self):
        w1 = HeightWalk((0, 1, 2, 1, 2, 3), 3)  # valley at index 3, height 1
        w2 = HeightWalk((0, 1, 0, 1, 2, 3), 3)  # peak at index 1, height 1
        g = build_sync_graph([w1, w2])
        assert g.degree((3, 1)) == 0
        assert degree_parity_audit(g)

    def test_two_valleys_and_pass_through_has_degree_four(self):
        w1 = HeightWalk((0, 1, 2, 1, 2, 3), 3)
        w2 = HeightWalk((0, 1, 2, 1, 2, 3), 3)
        w3 = HeightWalk((0, 1, 2, 3), 3)
        g = build_sync_graph([w1, w2, w3])
        # two valley coordinates and one straight-through coordinate: the
        # upward move count is 2 * 2 * 1 and no downward move exists
        assert g.degree((3, 3, 1)) == 4
        assert degree_parity_audit(g)

    def test_mismatched_targets(self):
        with pytest.raises(InvalidArgumentError):
            build_sync_graph([HeightWalk((0, 1), 1), HeightWalk((0, 1, 2), 2)])


class TestSyncWalks:
    def test_identity_schedule(self):
        s = sync_walks([HeightWalk((0, 1), 1), HeightWalk((0, 1), 1)])
        assert s.length == 1
        assert s.reparams == ((0, 1), (0, 1))

    def test_backtracking_schedule(self):
        s = sync_walks([HeightWalk((0, 1, 0, 1), 1), HeightWalk((0, 1), 1)])
        assert s.length == 3
        assert s.reparams == ((0, 1, 2, 3), (0, 1, 0, 1))

    def test_degenerate_target_zero(self):
        s = sync_walks([HeightWalk((0,), 0), HeightWalk((0,), 0)])
        assert s.length == 0

    def test_random_triples_satisfy_conditions(self):
        rng = random.Random(17)
        for _ in range(200):
            width = rng.choice((2, 3))
            target = rng.randrange(1, 4)
            walks = [random_valid_walk(rng, target, 10)
                     for _ in range(width)]
            schedule = sync_walks(walks)
            assert schedule_conditions_hold(walks, schedule)


class TestExtractHeightWalk:
    def test_straight_up_is_identity(self):
        cr = ProjectedCrossing(IndexSet.of(1, 2),
                               ((0, 0), (1, 0), (2, 0), (3, 0)))
        walk, tau = extract_height_walk(cr)
        assert tau == (0, 1, 2, 3)
        assert walk.values == (0, 1, 2, 3)

    def test_detours_skipped_and_recomposable(self):
        path = ((0, 0), (0, 1), (1, 1), (1, 2), (1, 3), (2, 3))
        cr = ProjectedCrossing(IndexSet.of(1, 2), path)
        walk, tau = extract_height_walk(cr)
        assert walk.values == (0, 1, 2)
        assert tau == (0, 2, 5)
        # recomposition reproduces exactly the height-change skeleton
        skeleton = [path[0]] + [path[t] for t in range(1, len(path))
                                if path[t][0] != path[t - 1][0]]
        assert [path[t] for t in tau] == skeleton

    def test_final_step_is_height_change(self):
        path = ((0, 0), (1, 0), (1, 1), (1, 2), (2, 2))
        cr = ProjectedCrossing(IndexSet.of(1, 2), path)
        _, tau = extract_height_walk(cr)
        assert tau[-1] == len(path) - 1

    def test_crossing_validation(self):
        with pytest.raises(InvalidArgumentError):
            ProjectedCrossing(IndexSet.of(1, 2), ((0, 0), (0, 1)))
        with pytest.raises(InvalidArgumentError):
            ProjectedCrossing(IndexSet.of(1, 2), ((1, 0), (2, 0)))
        with pytest.raises(InvalidArgumentError):
            ProjectedCrossing(IndexSet.of(2, 3), ((0, 0), (1, 0)))


class TestLiftCrossings:
    def test_aligned_straight_up(self):
        cr2 = ProjectedCrossing(IndexSet.of(1, 2), ((0, 0), (1, 0)))
        cr3 = ProjectedCrossing(IndexSet.of(1, 3), ((0, 0), (1, 0)))
        box = Box((0, 0, 0), (1, 1, 1))
        assert lift_crossings([cr2, cr3], box) == [(0, 0, 0), (1, 0, 0)]

    def test_degenerate_single_site(self):
        cr2 = ProjectedCrossing(IndexSet.of(1, 2), ((0, 2),))
        cr3 = ProjectedCrossing(IndexSet.of(1, 3), ((0, 1),))
        box = Box((0, 0, 0), (0, 3, 3))
        path = lift_crossings([cr2, cr3], box)
        assert path == [(0, 2, 1)]

    def test_horizontal_shuffle_audited(self):
        cr2 = ProjectedCrossing(IndexSet.of(1, 2),
                                ((0, 0), (0, 1), (1, 1), (2, 1)))
        cr3 = ProjectedCrossing(IndexSet.of(1, 3),
                                ((0, 2), (1, 2), (1, 1), (1, 0), (2, 0)))
        box = Box((0, 0, 0), (2, 2, 2))
        path = lift_crossings([cr2, cr3], box)
        assert audit_lifted_path(path, [cr2, cr3], box)

    def test_forced_backtrack_keeps_sites_on_crossings(self):
        # the synchronization of these two walks is forced to re-traverse
        # a descent of the second crossing; the connector must therefore
        # align the backtracking coordinate before dropping, not after
        g2 = ProjectedCrossing(IndexSet.of(1, 2),
                               ((0, 0), (1, 0), (2, 0), (2, 1), (1, 1),
                                (1, 2), (0, 2), (0, 3), (1, 3), (2, 3),
                                (3, 3)))
        g3 = ProjectedCrossing(IndexSet.of(1, 3),
                               ((0, 0), (1, 0), (1, 1), (2, 1), (3, 1)))
        box = Box((0, 0, 0), (3, 3, 1))
        path = lift_crossings([g2, g3], box)
        assert audit_lifted_path(path, [g2, g3], box)

    def test_mismatched_heights_rejected(self):
        cr2 = ProjectedCrossing(IndexSet.of(1, 2), ((0, 0), (1, 0)))
        cr3 = ProjectedCrossing(IndexSet.of(1, 3), ((0, 0), (1, 0), (2, 0)))
        with pytest.raises(InvalidArgumentError):
            lift_crossings([cr2, cr3], Box((0, 0, 0), (2, 1, 1)))

    def test_random_lifts_audited(self):
        rng = random.Random(41)
        from hyperperc.cluster import find_crossing_path
        for _ in range(60):
            n = rng.choice((3, 4, 5))
            target = rng.randrange(1, 4)
            crossings = []
            for j in range(2, n + 1):
                width = rng.randrange(1, 4)
                while True:
                    grid = np.array(
                        [[rng.random() < 0.75 for _ in range(width)]
                         for _ in range(target + 1)], dtype=np.uint8)
                    path = find_crossing_path(grid)
                    if path:
                        crossings.append(
                            ProjectedCrossing(IndexSet.of(1, j),
                                              tuple(path)))
                        break
            box = Box((0,) * n,
                      (target,) + tuple(max(c.path, key=lambda p: p[1])[1]
                                        for c in crossings))
            path = lift_crossings(crossings, box)
            assert audit_lifted_path(path, crossings, box)


class TestFactorization:
    def test_all_open_both_sides_true(self):
        box = Box((0, 0, 0), (2, 1, 1))
        report = bt_factorization_check(box, 40, 1)
        assert report.counterexamples == ()

    def test_exhaustive_small(self):
        report = exhaustive_bt_identity(8)
        assert report.violations == 0
        assert report.boxes > 0

    def test_blocked_projection_blocks_product(self):
        # direct check on one configuration: a closed row in one plane
        from hyperperc import backends
        import numpy as np
        bits_a = np.ones((3, 2), dtype=np.uint8)
        bits_a[1, :] = 0
        bits_b = np.ones((3, 2), dtype=np.uint8)
        assert not backends.cross_grid(bits_a, 0)
        from hyperperc.lifting import _box_product_cross
        assert not _box_product_cross({2: bits_a, 3: bits_b},
                                      Box((0, 0, 0), (2, 1, 1)))

    def test_empirical_factorization_probability(self):
        # the product-field crossing frequency equals the product of the
        # per-plane crossing frequencies (independent planes)
        import math

        from hyperperc import backends
        box = Box((0, 0, 0), (2, 2, 2))
        trials = 4000
        joint = 0
        margs = [0, 0]
        from hyperperc.lifting import _box_product_cross
        for t in range(trials):
            planes = {}
            for i, axis in enumerate((2, 3)):
                cells = np.array([(a, b) for a in range(3)
                                  for b in range(3)], dtype=np.int64)
                bits = backends.plane_bits(
                    backends.derive_seed(5150, axis, t), 0, 0.7, cells)
                planes[axis] = bits.reshape(3, 3)
                margs[i] += backends.cross_grid(planes[axis], 0)
            joint += _box_product_cross(planes, box)
        lhs = joint / trials
        rhs = (margs[0] / trials) * (margs[1] / trials)
        sigma = math.sqrt(lhs * (1 - lhs) / trials)
        assert abs(lhs - rhs) <= 4 * sigma


class TestCrossingFromField:
    def test_extracted_crossing_is_valid(self):
        view = all_planes_view(8, ParamVector.uniform(3, 2, 0.8))
        for axis in (2, 3):
            cr = crossing_from_field(view, IndexSet.of(1, axis), (0, 0),
                                     (5, 6))
            if cr is not None:
                assert cr.path[0][0] == 0
                assert cr.path[-1][0] == 4
