import math

import numpy as np
import pytest

from hyperperc.backends import _numpy_impl, _purepy
from hyperperc.errors import InvalidArgumentError
from hyperperc.field import (FieldMode, FieldView, HyperplaneField,
                             ParamVector, all_planes_view, axis_planes_view,
                             box_all_open_probability, column_structure_check,
                             hyperplane_bit, plane_bits_window, site_open,
                             site_open_many)
from hyperperc.lattice import Box, IndexSet


def _field(seed, *probs, n=3, k=2):
    return HyperplaneField(seed, ParamVector(n, k, tuple(probs)))


def _diag_sites(m, n=3):
    return np.arange(m, dtype=np.int64)[:, None].repeat(n, axis=1)


class TestParamVector:
    def test_shape_validation(self):
        with pytest.raises(InvalidArgumentError):
            ParamVector(3, 2, (0.5, 0.5))
        with pytest.raises(InvalidArgumentError):
            ParamVector(3, 2, (0.5, 0.5, 1.5))

    def test_mapping_roundtrip(self):
        mapping = {IndexSet.of(1, 2): 0.9, IndexSet.of(1, 3): 0.8,
                   IndexSet.of(2, 3): 0.7}
        pv = ParamVector.from_mapping(3, 2, mapping)
        assert pv.values == (0.9, 0.8, 0.7)
        assert pv.p(IndexSet.of(1, 3)) == 0.8
        assert abs(pv.product() - 0.504) < 1e-12

    def test_missing_entry(self):
        with pytest.raises(InvalidArgumentError):
            ParamVector.from_mapping(3, 2, {IndexSet.of(1, 2): 0.9})


class TestHyperplaneBit:
    def test_degenerate_one(self):
        f = _field(5, 1.0, 0.5, 0.5)
        for u in ((0, 0), (7, -3), (100, 200)):
            assert hyperplane_bit(f, IndexSet.of(1, 2), u) == 1

    def test_degenerate_zero(self):
        f = _field(5, 0.0, 0.5, 0.5)
        for u in ((0, 0), (7, -3), (-5, 11)):
            assert hyperplane_bit(f, IndexSet.of(1, 2), u) == 0

    def test_repeat_queries_agree(self):
        f = _field(99, 0.5, 0.5, 0.5)
        cells = [(-3, 8), (0, 0), (12, -1)]
        first = [hyperplane_bit(f, IndexSet.of(1, 3), u) for u in cells]
        for _ in range(3):
            again = [hyperplane_bit(f, IndexSet.of(1, 3), u)
                     for u in cells]
            assert again == first

    def test_monte_carlo_frequency(self):
        # one million distinct plane cells are i.i.d. Bernoulli(0.7)
        f = _field(1234, 0.7, 0.7, 0.7)
        cells = np.stack(np.meshgrid(np.arange(1000), np.arange(1000),
                                     indexing="ij"), -1).reshape(-1, 2)
        bits = plane_bits_window(f, IndexSet.of(1, 2),
                                 cells.astype(np.int64))
        sigma = math.sqrt(0.7 * 0.3 / bits.size)
        assert abs(bits.mean() - 0.7) <= 3 * sigma

    def test_unknown_index_set(self):
        f = _field(5, 0.5, 0.5, 0.5)
        with pytest.raises(InvalidArgumentError):
            hyperplane_bit(f, IndexSet.of(1, 4), (0, 0))


class TestSiteOpen:
    def test_all_ones(self):
        view = all_planes_view(3, ParamVector.uniform(3, 2, 1.0))
        assert all(site_open(view, v) == 1
                   for v in ((0, 0, 0), (5, -2, 9), (-100, 3, 7)))

    def test_single_zero_annihilates(self):
        view = all_planes_view(3, ParamVector(3, 2, (0.0, 1.0, 1.0)))
        assert all(site_open(view, v) == 0
                   for v in ((0, 0, 0), (5, -2, 9)))

    def test_product_formula_diagonal(self):
        # diagonal sites share no plane cells, hence are independent
        view = all_planes_view(7, ParamVector.uniform(3, 2, 0.9))
        bits = site_open_many(view, _diag_sites(10 ** 6))
        want = 0.9 ** 3
        sigma = math.sqrt(want * (1 - want) / bits.size)
        assert abs(float(bits.mean()) - want) <= 3 * sigma

    def test_scalar_matches_vectorized(self):
        view = all_planes_view(21, ParamVector(3, 2, (0.6, 0.7, 0.8)))
        rng = np.random.default_rng(0)
        sites = rng.integers(-50, 50, size=(200, 3)).astype(np.int64)
        vec = site_open_many(view, sites)
        scal = [site_open(view, tuple(map(int, s))) for s in sites]
        assert vec.tolist() == scal

    def test_consistency_under_projection(self):
        view = all_planes_view(3, ParamVector(3, 2, (0.6, 0.6, 0.6)))
        from hyperperc.lattice import project
        rng = np.random.default_rng(1)
        for site in rng.integers(-30, 30, size=(300, 3)).tolist():
            v = tuple(site)
            if site_open(view, v):
                for s in view.field.params.index_sets:
                    assert hyperplane_bit(view.field, s, project(v, s)) == 1

    def test_axis_view_dominates_full_view(self):
        f = HyperplaneField(11, ParamVector(3, 2, (0.5, 0.5, 0.5)))
        full = FieldView(f, FieldMode.ALL_PLANES)
        axis = FieldView(f, FieldMode.AXIS_PLANES)
        rng = np.random.default_rng(2)
        sites = rng.integers(-40, 40, size=(500, 3)).astype(np.int64)
        full_bits = site_open_many(full, sites)
        axis_bits = site_open_many(axis, sites)
        assert (full_bits <= axis_bits).all()

    def test_axis_view_needs_k2(self):
        pv = ParamVector.uniform(4, 3, 0.5)
        with pytest.raises(InvalidArgumentError):
            FieldView(HyperplaneField(0, pv), FieldMode.AXIS_PLANES)


class TestDeterminism:
    def test_same_seed_same_bits_any_order(self):
        pv = ParamVector(3, 2, (0.4, 0.5, 0.6))
        a = HyperplaneField(1000, pv)
        b = HyperplaneField(1000, pv)
        cells = [(i, j) for i in range(-5, 5) for j in range(-5, 5)]
        bits_a = {(s, u): hyperplane_bit(a, s, u)
                  for s in pv.index_sets for u in cells}
        for s in reversed(pv.index_sets):
            for u in reversed(cells):
                assert hyperplane_bit(b, s, u) == bits_a[(s, u)]

    def test_independence_across_planes(self):
        f = _field(77, 0.5, 0.5, 0.5)
        m = 10 ** 5
        cells = np.arange(m, dtype=np.int64)
        grid = np.stack([cells, cells + 1], axis=1)
        x = plane_bits_window(f, IndexSet.of(1, 2), grid).astype(float)
        y = plane_bits_window(f, IndexSet.of(1, 3), grid).astype(float)
        corr = float(np.mean((x - x.mean()) * (y - y.mean())))
        # 3 sigma for the empirical covariance of two Bernoulli(1/2)
        assert abs(corr) <= 3 * 0.25 / math.sqrt(m)

    def test_monotone_coupling_in_parameters(self):
        # raising one probability at fixed seed never closes an open site
        lo = all_planes_view(5, ParamVector(3, 2, (0.4, 0.6, 0.7)))
        hi = all_planes_view(5, ParamVector(3, 2, (0.8, 0.6, 0.7)))
        rng = np.random.default_rng(3)
        sites = rng.integers(-30, 30, size=(2000, 3)).astype(np.int64)
        assert (site_open_many(lo, sites)
                <= site_open_many(hi, sites)).all()


class TestColumnStructure:
    def test_closed_cell_closes_fiber(self):
        view = all_planes_view(13, ParamVector(3, 2, (0.5, 0.5, 0.5)))
        window = Box.centered(3, 6)
        found_closed = 0
        for i in range(-4, 5):
            for j in range(-4, 5):
                cell = (i, j)
                s = IndexSet.of(1, 2)
                if hyperplane_bit(view.field, s, cell) == 0:
                    found_closed += 1
                assert column_structure_check(view, s, cell, window)
        assert found_closed > 0

    def test_open_fiber_with_other_fields_forced(self):
        view = all_planes_view(13, ParamVector(3, 2, (0.5, 1.0, 1.0)))
        s = IndexSet.of(1, 2)
        window = Box.centered(3, 4)
        for cell in ((0, 0), (1, -2)):
            if hyperplane_bit(view.field, s, cell) == 1:
                fiber = [(cell[0], cell[1], z) for z in range(-4, 5)]
                assert all(site_open(view, v) for v in fiber)

    def test_random_fibers(self):
        view = all_planes_view(29, ParamVector(3, 2, (0.5, 0.6, 0.7)))
        rng = np.random.default_rng(4)
        window = Box.centered(3, 6)
        for s in view.field.params.index_sets:
            for _ in range(34):
                cell = tuple(rng.integers(-6, 7, size=2).tolist())
                assert column_structure_check(view, s, cell, window)


class TestBoxAllOpenProbability:
    def test_radius_zero(self):
        pv = ParamVector(3, 2, (0.9, 0.8, 0.7))
        assert box_all_open_probability(pv, 0) == pytest.approx(0.504)

    def test_degenerate(self):
        pv = ParamVector.uniform(3, 2, 1.0)
        for r in range(4):
            assert box_all_open_probability(pv, r) == 1.0

    def test_monte_carlo_event_frequency(self):
        from hyperperc.stats import box_all_open_frequency
        pv = ParamVector.uniform(3, 2, 0.99)
        want = box_all_open_probability(pv, 2)
        point = box_all_open_frequency(pv, 2, 10 ** 4, 31337)
        sigma = math.sqrt(want * (1 - want) / point.trials)
        assert abs(point.p_hat - want) <= 3 * sigma


class TestBackendAgreement:
    def test_bits_match_reference(self):
        import random
        rng = random.Random(8)
        from hyperperc import backends
        for _ in range(200):
            seed = rng.getrandbits(64)
            rank = rng.randrange(20)
            p = rng.random()
            cell = (rng.randrange(-10 ** 9, 10 ** 9),
                    rng.randrange(-10 ** 9, 10 ** 9))
            ref = _purepy.cell_bit(seed, rank, cell, p)
            arr = np.array([cell], dtype=np.int64)
            assert int(backends.plane_bits(seed, rank, p, arr)[0]) == ref
            assert int(_numpy_impl.plane_bits(seed, rank, p, arr)[0]) == ref
