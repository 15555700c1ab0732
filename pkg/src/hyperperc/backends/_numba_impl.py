"""Numba kernels for the hot inner loops.

Mirrors :mod:`hyperperc.backends._numpy_impl` function for function; the
dispatcher in ``hyperperc.backends`` picks one of the two at import time.
All kernels reproduce the reference bit stream in ``_purepy`` exactly.
"""

import numpy as np
from numba import njit

from ._purepy import GOLDEN, MIX_A, MIX_B, SEED_SALT, TWO53

name = "numba"

_GOLDEN = np.uint64(GOLDEN)
_MIX_A = np.uint64(MIX_A)
_MIX_B = np.uint64(MIX_B)
_SEED_SALT = np.uint64(SEED_SALT)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


@njit(inline="always")
def _mix(z):
    z ^= z >> _S30
    z *= _MIX_A
    z ^= z >> _S27
    z *= _MIX_B
    z ^= z >> _S31
    return z


@njit(cache=True)
def _mix64_jit(z):
    return _mix(z)


def mix64_scalar(z: int) -> int:
    return int(_mix64_jit(np.uint64(z & 0xFFFFFFFFFFFFFFFF)))


@njit(inline="always")
def _derive(seed_u, stream, index):
    h = _mix(seed_u ^ _SEED_SALT)
    h = _mix(h ^ np.uint64(stream))
    return _mix(h ^ np.uint64(index))


@njit(cache=True)
def _derive_jit(seed_u, stream, index):
    return _derive(seed_u, stream, index)


def derive_seed(seed: int, stream: int, index: int) -> int:
    return int(_derive_jit(np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                           np.int64(stream), np.int64(index)))


@njit(inline="always")
def _cell_bit2(seed_u, rank_u, a, b, thr):
    # k=2 fast path: thr = p * 2**53
    h = _mix(seed_u ^ _GOLDEN)
    h = _mix(h ^ rank_u)
    h = _mix(h ^ np.uint64(a))
    h = _mix(h ^ np.uint64(b))
    return np.float64(h >> _S11) < thr


@njit(cache=True)
def _plane_bits_impl(seed_u, rank_u, thr, coords):
    m, k = coords.shape
    out = np.empty(m, dtype=np.uint8)
    for i in range(m):
        h = _mix(seed_u ^ _GOLDEN)
        h = _mix(h ^ rank_u)
        for j in range(k):
            h = _mix(h ^ np.uint64(coords[i, j]))
        out[i] = 1 if np.float64(h >> _S11) < thr else 0
    return out


def plane_bits(seed, rank, p, coords):
    """Bernoulli bits of one hyperplane field at ``coords`` ((m, k) int64)."""
    return _plane_bits_impl(np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                            np.uint64(rank & 0xFFFFFFFFFFFFFFFF),
                            p * TWO53,
                            np.ascontiguousarray(coords, dtype=np.int64))


@njit(cache=True)
def _site_open_bits_impl(seed_u, ranks, thrs, proj, sites):
    m = sites.shape[0]
    npl, k = proj.shape
    out = np.empty(m, dtype=np.uint8)
    h0 = _mix(seed_u ^ _GOLDEN)
    for i in range(m):
        ok = True
        for p in range(npl):
            h = _mix(h0 ^ np.uint64(ranks[p]))
            for j in range(k):
                h = _mix(h ^ np.uint64(sites[i, proj[p, j]]))
            if np.float64(h >> _S11) >= thrs[p]:
                ok = False
                break
        out[i] = 1 if ok else 0
    return out


def site_open_bits(seed, ranks, thrs, proj, sites):
    """Product-field bits at ``sites`` ((m, n) int64).

    ``proj[p]`` lists the 0-based coordinate positions of plane ``p``;
    ``thrs[p]`` is p_I * 2**53. A site is open iff every plane bit is 1.
    """
    return _site_open_bits_impl(np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                                np.ascontiguousarray(ranks, dtype=np.int64),
                                np.ascontiguousarray(thrs,
                                                     dtype=np.float64),
                                np.ascontiguousarray(proj, dtype=np.int64),
                                np.ascontiguousarray(sites, dtype=np.int64))


@njit(inline="always")
def _plane_bit_cached(seed_u, p, a, b, M, W, ranks, thrs,
                      plane_val, plane_stamp, stamp):
    cell = (a + M) * W + (b + M)
    if plane_stamp[p, cell] != stamp:
        plane_stamp[p, cell] = stamp
        bit = _cell_bit2(seed_u, np.uint64(ranks[p]), a, b, thrs[p])
        plane_val[p, cell] = 1 if bit else 0
    return plane_val[p, cell]


@njit(inline="always")
def _site_open_cached(seed_u, coords, pair_a, pair_b, M, W, ranks, thrs,
                      plane_val, plane_stamp, stamp):
    for p in range(pair_a.shape[0]):
        if _plane_bit_cached(seed_u, p, coords[pair_a[p]], coords[pair_b[p]],
                             M, W, ranks, thrs, plane_val, plane_stamp,
                             stamp) == 0:
            return False
    return True


@njit(cache=True)
def _explore_impl(seed_u, n, pair_a, pair_b, ranks, thrs, K, M, cap,
                  site_stamp, plane_val, plane_stamp, stack, coords, stamp):
    """Depth-first search of the open cluster of the origin inside [-M, M]^n.

    Marks on push; stops as soon as the outer boundary (sup-norm M) is hit.
    Returns (reached_K, reached_M, visited, exhausted).
    """
    W = 2 * M + 1
    for d in range(n):
        coords[d] = 0
    if not _site_open_cached(seed_u, coords, pair_a, pair_b, M, W, ranks,
                             thrs, plane_val, plane_stamp, stamp):
        return False, False, 0, True
    powers = np.empty(n, dtype=np.int64)
    powers[0] = 1
    for d in range(1, n):
        powers[d] = powers[d - 1] * W
    origin = 0
    for d in range(n):
        origin += M * powers[d]
    site_stamp[origin] = stamp
    stack[0] = origin
    top = 1
    visited = 0
    reached_k = K == 0
    reached_m = M == 0
    exhausted = True
    while top > 0:
        top -= 1
        lin = stack[top]
        visited += 1
        rem = lin
        linf = 0
        for d in range(n - 1, -1, -1):
            c = rem // powers[d] - M
            rem -= (c + M) * powers[d]
            coords[d] = c
            a = -c if c < 0 else c
            if a > linf:
                linf = a
        if linf >= K:
            reached_k = True
        if linf >= M:
            reached_m = True
            exhausted = False
            break
        if visited >= cap:
            exhausted = False
            break
        for d in range(n):
            for s in range(2):
                step = 1 if s == 0 else -1
                c = coords[d] + step
                if c > M or c < -M:
                    continue
                lin2 = lin + step * powers[d]
                if site_stamp[lin2] == stamp:
                    continue
                coords[d] = c
                is_open = _site_open_cached(seed_u, coords, pair_a, pair_b,
                                            M, W, ranks, thrs, plane_val,
                                            plane_stamp, stamp)
                coords[d] = c - step
                if is_open:
                    site_stamp[lin2] = stamp
                    stack[top] = lin2
                    top += 1
    return reached_k, reached_m, visited, exhausted


def _buffers(n, M, npl):
    W = 2 * M + 1
    vol = W ** n
    return (np.zeros(vol, dtype=np.int32),
            np.zeros((npl, W * W), dtype=np.uint8),
            np.zeros((npl, W * W), dtype=np.int32),
            np.empty(vol, dtype=np.int64),
            np.empty(n, dtype=np.int64))


def explore_origin(seed, n, pair_a, pair_b, ranks, thrs, K, M,
                   cap=2 ** 62):
    site_stamp, pv, ps, stack, coords = _buffers(n, M, len(pair_a))
    return _explore_impl(np.uint64(seed & 0xFFFFFFFFFFFFFFFF), n,
                         np.ascontiguousarray(pair_a, dtype=np.int64),
                         np.ascontiguousarray(pair_b, dtype=np.int64),
                         np.ascontiguousarray(ranks, dtype=np.int64),
                         np.ascontiguousarray(thrs, dtype=np.float64),
                         K, M, cap, site_stamp, pv, ps, stack, coords,
                         np.int32(1))


@njit(cache=True, nogil=True)
def _count_boundary_impl(seed_u, stream, t0, t1, n, pair_a, pair_b, ranks,
                         thrs, K, M, truncated, site_stamp, plane_val,
                         plane_stamp, stack, coords):
    hits = 0
    for t in range(t0, t1):
        trial_seed = _derive(seed_u, stream, t)
        stamp = np.int32(t - t0 + 1)
        rk, rm, _, _ = _explore_impl(trial_seed, n, pair_a, pair_b, ranks,
                                     thrs, K, M, 2 ** 62, site_stamp,
                                     plane_val, plane_stamp, stack, coords,
                                     stamp)
        if truncated:
            if rk and not rm:
                hits += 1
        else:
            if rm:
                hits += 1
    return hits


def count_boundary_trials(seed, stream, t0, t1, n, pair_a, pair_b, ranks,
                          thrs, K, M, truncated):
    """Number of trials in [t0, t1) whose origin cluster reaches the target.

    Untruncated mode explores [-M, M]^n (with M = K) and counts boundary
    hits; truncated mode counts clusters that reach sup-norm K but die
    before sup-norm M.
    """
    site_stamp, pv, ps, stack, coords = _buffers(n, M, len(pair_a))
    return int(_count_boundary_impl(
        np.uint64(seed), np.int64(stream), np.int64(t0), np.int64(t1),
        n, pair_a, pair_b, ranks, thrs, K, M, truncated,
        site_stamp, pv, ps, stack, coords))


@njit(cache=True, nogil=True)
def _count_box_impl(seed_u, stream, t0, t1, ranks, thrs, cells):
    hits = 0
    npl = ranks.shape[0]
    m, k = cells.shape
    for t in range(t0, t1):
        trial_seed = _derive(seed_u, stream, t)
        h0 = _mix(trial_seed ^ _GOLDEN)
        ok = True
        for p in range(npl):
            hp = _mix(h0 ^ np.uint64(ranks[p]))
            for i in range(m):
                h = hp
                for j in range(k):
                    h = _mix(h ^ np.uint64(cells[i, j]))
                if np.float64(h >> _S11) >= thrs[p]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            hits += 1
    return hits


def count_box_allopen_trials(seed, stream, t0, t1, ranks, thrs, cells):
    """Trials in [t0, t1) where every projected cell of every plane is open."""
    return int(_count_box_impl(np.uint64(seed), np.int64(stream),
                               np.int64(t0), np.int64(t1), ranks, thrs,
                               cells))


@njit(cache=True)
def _cross_grid(open_bits, axis):
    """Spanning crossing of a 2-d 0/1 grid along ``axis`` (4-neighbor)."""
    h, w = open_bits.shape
    reach = np.zeros((h, w), dtype=np.uint8)
    queue = np.empty(h * w, dtype=np.int64)
    top = 0
    if axis == 0:
        for j in range(w):
            if open_bits[0, j]:
                reach[0, j] = 1
                queue[top] = j
                top += 1
    else:
        for i in range(h):
            if open_bits[i, 0]:
                reach[i, 0] = 1
                queue[top] = i * w
                top += 1
    while top > 0:
        top -= 1
        lin = queue[top]
        i = lin // w
        j = lin - i * w
        if axis == 0 and i == h - 1:
            return True
        if axis == 1 and j == w - 1:
            return True
        for d in range(4):
            if d == 0:
                i2, j2 = i + 1, j
            elif d == 1:
                i2, j2 = i - 1, j
            elif d == 2:
                i2, j2 = i, j + 1
            else:
                i2, j2 = i, j - 1
            if 0 <= i2 < h and 0 <= j2 < w and open_bits[i2, j2] \
                    and not reach[i2, j2]:
                reach[i2, j2] = 1
                queue[top] = i2 * w + j2
                top += 1
    if axis == 0:
        for j in range(w):
            if reach[h - 1, j]:
                return True
    else:
        for i in range(h):
            if reach[i, w - 1]:
                return True
    return False


def cross_grid(open_bits, axis):
    return bool(_cross_grid(np.ascontiguousarray(open_bits, dtype=np.uint8),
                            axis))


@njit(cache=True)
def _box_bt_cross(bits_a, bits_b):
    """Height crossing of the 3-d box whose site bit is the AND of the two
    projected plane bits (bits_a: (H, B), bits_b: (H, C); height axis 0)."""
    hgt, nb = bits_a.shape
    nc = bits_b.shape[1]
    reach = np.zeros((hgt, nb, nc), dtype=np.uint8)
    queue = np.empty(hgt * nb * nc, dtype=np.int64)
    top = 0
    for y in range(nb):
        for z in range(nc):
            if bits_a[0, y] and bits_b[0, z]:
                reach[0, y, z] = 1
                queue[top] = y * nc + z
                top += 1
    while top > 0:
        top -= 1
        lin = queue[top]
        x = lin // (nb * nc)
        rem = lin - x * nb * nc
        y = rem // nc
        z = rem - y * nc
        if x == hgt - 1:
            return True
        for d in range(6):
            x2, y2, z2 = x, y, z
            if d == 0:
                x2 += 1
            elif d == 1:
                x2 -= 1
            elif d == 2:
                y2 += 1
            elif d == 3:
                y2 -= 1
            elif d == 4:
                z2 += 1
            else:
                z2 -= 1
            if 0 <= x2 < hgt and 0 <= y2 < nb and 0 <= z2 < nc \
                    and bits_a[x2, y2] and bits_b[x2, z2] \
                    and not reach[x2, y2, z2]:
                reach[x2, y2, z2] = 1
                queue[top] = (x2 * nb + y2) * nc + z2
                top += 1
    return False


@njit(cache=True)
def _bt_identity_violations(hgt, nb, nc):
    """Exhaustive crossing-factorization scan for one box shape.

    Enumerates every configuration of the two projected planes of the
    hgt x nb x nc box and counts configurations where "both projections
    cross" differs from "the 3-d product field crosses".
    """
    bits_a = np.zeros((hgt, nb), dtype=np.uint8)
    bits_b = np.zeros((hgt, nc), dtype=np.uint8)
    na = hgt * nb
    ncc = hgt * nc
    bad = 0
    for cfg_a in range(1 << na):
        for i in range(hgt):
            for j in range(nb):
                bits_a[i, j] = (cfg_a >> (i * nb + j)) & 1
        cross_a = _cross_grid(bits_a, 0)
        for cfg_b in range(1 << ncc):
            for i in range(hgt):
                for j in range(nc):
                    bits_b[i, j] = (cfg_b >> (i * nc + j)) & 1
            cross_b = _cross_grid(bits_b, 0)
            joint = _box_bt_cross(bits_a, bits_b)
            if joint != (cross_a and cross_b):
                bad += 1
    return bad


def bt_identity_violations(heights, width_b, width_c):
    return int(_bt_identity_violations(heights, width_b, width_c))


def warmup():
    """Trigger compilation of every kernel on tiny inputs."""
    pa = np.array([0], dtype=np.int64)
    pb = np.array([1], dtype=np.int64)
    rk = np.array([0], dtype=np.int64)
    th = np.array([0.5 * TWO53], dtype=np.float64)
    plane_bits(1, 0, 0.5, np.zeros((1, 2), dtype=np.int64))
    site_open_bits(1, rk, th, np.array([[0, 1]], dtype=np.int64),
                   np.zeros((1, 2), dtype=np.int64))
    explore_origin(1, 2, pa, pb, rk, th, 1, 1)
    count_boundary_trials(1, 0, 0, 2, 2, pa, pb, rk, th, 1, 1, False)
    count_box_allopen_trials(1, 0, 0, 2, rk, th,
                             np.zeros((1, 2), dtype=np.int64))
    cross_grid(np.ones((2, 2), dtype=np.uint8), 0)
    bt_identity_violations(1, 1, 1)
    mix64_scalar(1)
    derive_seed(1, 0, 0)
