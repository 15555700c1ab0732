import math
import random
from fractions import Fraction

import numpy as np
import pytest

from hyperperc.errors import InvalidArgumentError
from hyperperc.field import ParamVector, all_planes_view
from hyperperc.lattice import IndexSet, all_index_sets, l1_norm, project
from hyperperc.plane import (InclinedBasis, build_inclined_basis,
                             gadget_open, injectivity_certificate,
                             mixing_class_params, plane_kernel_vectors,
                             projected_supports_disjoint,
                             separation_constant, staircase_gadget)


def _gram_schmidt_oracle(n):
    """Independent exact construction: orthogonalize, then scale each
    vector by twice the other's l1 norm."""
    v1, v2, _ = plane_kernel_vectors(n)
    t1 = [Fraction(c) for c in v1]
    num = sum(a * b for a, b in zip(v1, v2))
    den = sum(a * a for a in v1)
    t2 = [Fraction(b) - Fraction(num, den) * Fraction(a)
          for a, b in zip(v1, v2)]
    n1 = sum(abs(c) for c in t1)
    n2 = sum(abs(c) for c in t2)
    w1 = [2 * n2 * c for c in t1]
    w2 = [2 * n1 * c for c in t2]
    return tuple(int(c) for c in w1), tuple(int(c) for c in w2)


class TestKernelVectors:
    def test_n3(self):
        v1, v2, L = plane_kernel_vectors(3)
        assert v1 == (-1, 1, 0)
        assert v2 == (-1, 0, 1)
        assert L(v1) == (0,)
        assert L(v2) == (0,)
        assert L((1, 0, 0)) == (1,)

    def test_n4(self):
        v1, v2, L = plane_kernel_vectors(4)
        assert v1 == (-1, -1, 1, 0)
        assert v2 == (-1, -2, 0, 1)
        assert L(v1) == (0, 0)
        assert L(v2) == (0, 0)

    def test_kernel_membership_all_n(self):
        for n in range(3, 10):
            v1, v2, L = plane_kernel_vectors(n)
            assert all(y == 0 for y in L(v1))
            assert all(y == 0 for y in L(v2))

    def test_small_n_rejected(self):
        with pytest.raises(InvalidArgumentError):
            plane_kernel_vectors(2)


class TestInclinedBasis:
    def test_n3_exact(self):
        b = build_inclined_basis(3)
        assert b.w1 == (-4, 4, 0)
        assert b.w2 == (-2, -2, 4)
        assert b.reach == 8
        assert sum(a * c for a, c in zip(b.w1, b.w2)) == 0

    def test_n4_exact(self):
        b = build_inclined_basis(4)
        assert b.w1 == (-6, -6, 6, 0)
        assert b.w2 == (0, -6, -6, 6)
        assert b.reach == 18

    def test_matches_independent_oracle(self):
        for n in range(3, 9):
            b = build_inclined_basis(n)
            w1, w2 = _gram_schmidt_oracle(n)
            assert b.w1 == w1
            assert b.w2 == w2
            assert l1_norm(b.w1) == l1_norm(b.w2)
            assert sum(a * c for a, c in zip(b.w1, b.w2)) == 0

    def test_factorized_map_identity(self):
        # the spanning map factors through the kernel vectors via an
        # integer upper-triangular change of coordinates
        for n in range(3, 7):
            b = build_inclined_basis(n)
            v1, v2, _ = plane_kernel_vectors(n)
            t1 = [Fraction(c) for c in v1]
            num = sum(a * c for a, c in zip(v1, v2))
            den = sum(a * a for a in v1)
            t2 = [Fraction(c2) - Fraction(num, den) * Fraction(c1)
                  for c1, c2 in zip(v1, v2)]
            n1 = sum(abs(c) for c in t1)
            n2 = sum(abs(c) for c in t2)
            h = ((2 * n2, (2 - n) * n1), (0, 2 * n1))
            for (x, y) in ((1, 0), (0, 1), (3, -2), (-1, 4)):
                u = (h[0][0] * x + h[0][1] * y, h[1][0] * x + h[1][1] * y)
                direct = b.map_cell(x, y)
                via = tuple(u[0] * a + u[1] * c for a, c in zip(v1, v2))
                assert all(f == Fraction(g) for f, g in zip(via, direct))


class TestInjectivity:
    def test_full_set_injective(self):
        for n in (3, 4, 5):
            b = build_inclined_basis(n)
            full = IndexSet(tuple(range(1, n + 1)))
            assert injectivity_certificate(b, full).injective

    def test_n4_pair_34(self):
        b = build_inclined_basis(4)
        report = injectivity_certificate(b, IndexSet.of(3, 4))
        assert dict(report.determinants)[(3, 4)] == 36

    def test_all_pairs_nonzero_n3(self):
        b = build_inclined_basis(3)
        for s in all_index_sets(3, 2):
            report = injectivity_certificate(b, s)
            assert report.min_abs_det > 0

    def test_needs_two_members(self):
        b = build_inclined_basis(3)
        with pytest.raises(InvalidArgumentError):
            injectivity_certificate(b, IndexSet.of(2))


class TestSeparation:
    def test_positive_for_all_n_k(self):
        for n in range(3, 9):
            b = build_inclined_basis(n)
            c = separation_constant(b)
            assert c > 0
            assert c == b.separation

    def test_sampled_inequality_exact_arithmetic(self):
        rng = random.Random(12)
        for n in (3, 4, 6):
            b = build_inclined_basis(n)
            c = b.separation
            for _ in range(1000):
                u = (rng.randrange(-1000, 1001), rng.randrange(-1000, 1001))
                v = (rng.randrange(-1000, 1001), rng.randrange(-1000, 1001))
                delta = tuple(a - d for a, d in
                              zip(b.map_cell(*u), b.map_cell(*v)))
                dist = abs(u[0] - v[0]) + abs(u[1] - v[1])
                for s in all_index_sets(n, 2):
                    lhs = l1_norm(project(delta, s))
                    assert lhs * c.denominator >= c.numerator * dist

    def test_equality_case(self):
        b = build_inclined_basis(3)
        assert b.map_cell(3, 3) == b.map_cell(3, 3)
        delta = tuple(0 for _ in range(3))
        assert l1_norm(delta) == 0


class TestStaircaseGadget:
    def test_contains_anchor_and_forward_images(self):
        b = build_inclined_basis(3)
        g = staircase_gadget(b, 0, 0)
        assert (0, 0, 0) in g.sites
        assert b.map_cell(1, 0) in g.sites
        assert b.map_cell(0, 1) in g.sites

    def test_translation_equivariance(self):
        b = build_inclined_basis(3)
        g0 = set(staircase_gadget(b, 0, 0).sites)
        for (x, y) in ((1, 0), (-2, 3), (4, 4)):
            shift = b.map_cell(x, y)
            gx = set(staircase_gadget(b, x, y).sites)
            assert gx == {tuple(a + s for a, s in zip(v, shift))
                          for v in g0}

    def test_inside_reach_ball(self):
        for n in (3, 4, 5):
            b = build_inclined_basis(n)
            g = staircase_gadget(b, 0, 0)
            assert all(l1_norm(v) <= b.reach for v in g.sites)

    def test_union_is_connected_forward(self):
        b = build_inclined_basis(3)
        for (x, y) in ((0, 0), (2, -1)):
            g = staircase_gadget(b, x, y)
            right = staircase_gadget(b, x + 1, y)
            up = staircase_gadget(b, x, y + 1)
            assert set(g.sites) & set(right.sites)
            assert set(g.sites) & set(up.sites)


class TestGadgetOpen:
    def test_all_open(self):
        b = build_inclined_basis(3)
        view = all_planes_view(3, ParamVector.uniform(3, 2, 1.0))
        for (x, y) in ((0, 0), (5, -3)):
            assert gadget_open(view, b, x, y) == 1

    def test_single_closed_site_kills_gadget(self):
        b = build_inclined_basis(3)
        view = all_planes_view(3, ParamVector(3, 2, (0.0, 1.0, 1.0)))
        assert gadget_open(view, b, 0, 0) == 0

    def test_density_meets_box_bound(self):
        from hyperperc.field import box_all_open_probability
        b = build_inclined_basis(3)
        pv = ParamVector.uniform(3, 2, 0.995)
        view = all_planes_view(9, pv)
        m = 0
        hits = 0
        # cells far enough apart that the indicators are independent
        chi = math.ceil(3 * b.reach / b.separation)
        for x in range(0, 40 * chi, chi):
            m += 1
            hits += gadget_open(view, b, x, 0)
        bound = pv.product() ** ((2 * b.reach + 1) ** 2)
        sigma = math.sqrt(max(bound * (1 - bound), 1e-9) / m)
        assert hits / m >= bound - 3 * sigma


class TestMixingClassParams:
    def test_degenerate_probability_one(self):
        b = build_inclined_basis(3)
        mix = mixing_class_params(b, ParamVector.uniform(3, 2, 1.0))
        assert mix.lower_bound == 1.0

    def test_n3_radius_from_certificates(self):
        b = build_inclined_basis(3)
        mix = mixing_class_params(b, ParamVector.uniform(3, 2, 0.9))
        # reach 8 and separation 8/3 give radius 24 * 3 / 8 = 9 exactly
        assert b.separation == Fraction(8, 3)
        assert mix.dependence_radius == Fraction(9)

    def test_support_disjointness_beyond_radius(self):
        b = build_inclined_basis(3)
        mix = mixing_class_params(b, ParamVector.uniform(3, 2, 0.9))
        chi = mix.dependence_radius
        rng = random.Random(77)
        for _ in range(500):
            u = (rng.randrange(-30, 31), rng.randrange(-30, 31))
            v = (rng.randrange(-30, 31), rng.randrange(-30, 31))
            if abs(u[0] - v[0]) + abs(u[1] - v[1]) < chi:
                continue
            for s in all_index_sets(3, 2):
                assert projected_supports_disjoint(b, s, u, v)

    def test_empirical_independence_beyond_radius(self):
        b = build_inclined_basis(3)
        pv = ParamVector.uniform(3, 2, 0.9)
        view = all_planes_view(15, pv)
        chi = math.ceil(3 * b.reach / b.separation)
        m = 2000
        xs = np.array([gadget_open(view, b, i * chi, 0)
                       for i in range(m)], dtype=float)
        ys = np.array([gadget_open(view, b, i * chi, chi)
                       for i in range(m)], dtype=float)
        cov = float(np.mean((xs - xs.mean()) * (ys - ys.mean())))
        sigma = xs.std() * ys.std() / math.sqrt(m)
        assert abs(cov) <= 3 * max(sigma, 1e-6)
