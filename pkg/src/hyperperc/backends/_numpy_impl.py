"""Vectorized numpy fallback for every kernel in ``_numba_impl``.

Selected with HYPERPERC_BACKEND=numpy (or automatically when numba is not
importable). Slower than the jitted path but bit-identical: both backends
share the generator defined in ``_purepy``.
"""

import numpy as np

from ._purepy import GOLDEN, MIX_A, MIX_B, TWO53, derive_seed, mix64

name = "numpy"

_GOLDEN = np.uint64(GOLDEN)
_MIX_A = np.uint64(MIX_A)
_MIX_B = np.uint64(MIX_B)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


def mix64_scalar(z: int) -> int:
    return mix64(z)


def _mix_arr(z):
    z = z.copy()
    z ^= z >> _S30
    z *= _MIX_A
    z ^= z >> _S27
    z *= _MIX_B
    z ^= z >> _S31
    return z


def _to_u64(coords):
    return np.ascontiguousarray(coords, dtype=np.int64).view(np.uint64)


def plane_bits(seed, rank, p, coords):
    """Bernoulli bits of one hyperplane field at ``coords`` ((m, k) int64)."""
    cu = _to_u64(coords)
    m = cu.shape[0]
    h0 = np.uint64(mix64(mix64((seed & 0xFFFFFFFFFFFFFFFF) ^ GOLDEN)
                         ^ (rank & 0xFFFFFFFFFFFFFFFF)))
    h = np.full(m, h0, dtype=np.uint64)
    for j in range(cu.shape[1]):
        h = _mix_arr(h ^ cu[:, j])
    return ((h >> _S11).astype(np.float64) < p * TWO53).astype(np.uint8)


def site_open_bits(seed, ranks, thrs, proj, sites):
    """Product-field bits at ``sites`` ((m, n) int64); see numba twin."""
    sites = np.ascontiguousarray(sites, dtype=np.int64)
    m = sites.shape[0]
    out = np.ones(m, dtype=np.uint8)
    h0 = mix64((seed & 0xFFFFFFFFFFFFFFFF) ^ GOLDEN)
    for p in range(len(ranks)):
        hp = np.uint64(mix64(h0 ^ (int(ranks[p]) & 0xFFFFFFFFFFFFFFFF)))
        h = np.full(m, hp, dtype=np.uint64)
        cu = _to_u64(sites[:, np.asarray(proj[p], dtype=np.int64)])
        for j in range(cu.shape[1]):
            h = _mix_arr(h ^ cu[:, j])
        bit = (h >> _S11).astype(np.float64) < float(thrs[p])
        out &= bit.astype(np.uint8)
    return out


def _explore(seed, n, pair_a, pair_b, ranks, thrs, K, M, cap):
    """Frontier-at-a-time flood fill of the origin cluster in [-M, M]^n."""
    W = 2 * M + 1
    proj = np.stack([np.asarray(pair_a, dtype=np.int64),
                     np.asarray(pair_b, dtype=np.int64)], axis=1)
    origin = np.zeros((1, n), dtype=np.int64)
    if site_open_bits(seed, ranks, thrs, proj, origin)[0] == 0:
        return False, False, 0, True
    powers = W ** np.arange(n, dtype=np.int64)
    visited = np.zeros(W ** n, dtype=bool)
    visited[int(((origin[0] + M) * powers).sum())] = True
    frontier = origin
    offsets = np.zeros((2 * n, n), dtype=np.int64)
    for d in range(n):
        offsets[2 * d, d] = 1
        offsets[2 * d + 1, d] = -1
    visited_count = 0
    reached_k = K == 0
    reached_m = M == 0
    exhausted = True
    while frontier.shape[0] > 0:
        visited_count += frontier.shape[0]
        linf = np.abs(frontier).max(axis=1)
        if (linf >= K).any():
            reached_k = True
        if (linf >= M).any():
            reached_m = True
            exhausted = False
            break
        if visited_count >= cap:
            exhausted = False
            break
        cand = (frontier[:, None, :] + offsets[None, :, :]).reshape(-1, n)
        cand = cand[(np.abs(cand) <= M).all(axis=1)]
        lin = ((cand + M) * powers).sum(axis=1)
        lin, idx = np.unique(lin, return_index=True)
        cand = cand[idx]
        fresh = ~visited[lin]
        cand, lin = cand[fresh], lin[fresh]
        if cand.shape[0] == 0:
            break
        open_bits = site_open_bits(seed, ranks, thrs, proj, cand).astype(bool)
        cand, lin = cand[open_bits], lin[open_bits]
        visited[lin] = True
        frontier = cand
    return bool(reached_k), bool(reached_m), int(visited_count), exhausted


def explore_origin(seed, n, pair_a, pair_b, ranks, thrs, K, M, cap=2 ** 62):
    return _explore(seed, n, pair_a, pair_b, ranks, thrs, K, M, cap)


def count_boundary_trials(seed, stream, t0, t1, n, pair_a, pair_b, ranks,
                          thrs, K, M, truncated):
    hits = 0
    for t in range(t0, t1):
        trial_seed = derive_seed(seed, stream, t)
        rk, rm, _, _ = _explore(trial_seed, n, pair_a, pair_b, ranks, thrs,
                                K, M, 2 ** 62)
        if truncated:
            hits += int(rk and not rm)
        else:
            hits += int(rm)
    return hits


def count_box_allopen_trials(seed, stream, t0, t1, ranks, thrs, cells):
    cells = np.ascontiguousarray(cells, dtype=np.int64)
    hits = 0
    for t in range(t0, t1):
        trial_seed = derive_seed(seed, stream, t)
        ok = True
        for p in range(len(ranks)):
            bits = plane_bits(trial_seed, int(ranks[p]),
                              float(thrs[p]) / TWO53, cells)
            if not bits.all():
                ok = False
                break
        if ok:
            hits += 1
    return hits


def cross_grid(open_bits, axis):
    """Spanning crossing of a 2-d 0/1 grid along ``axis`` by dilation."""
    ob = np.asarray(open_bits, dtype=bool)
    if axis == 1:
        ob = ob.T
    h, w = ob.shape
    if h == 0 or w == 0:
        return False
    reach = np.zeros_like(ob)
    reach[0] = ob[0]
    while True:
        grow = reach.copy()
        grow[1:] |= reach[:-1]
        grow[:-1] |= reach[1:]
        grow[:, 1:] |= reach[:, :-1]
        grow[:, :-1] |= reach[:, 1:]
        grow &= ob
        if (grow == reach).all():
            break
        reach = grow
    return bool(reach[h - 1].any())


def _box_bt_cross(bits_a, bits_b):
    open3 = bits_a[:, :, None].astype(bool) & bits_b[:, None, :].astype(bool)
    h = open3.shape[0]
    reach = np.zeros_like(open3)
    reach[0] = open3[0]
    while True:
        grow = reach.copy()
        grow[1:] |= reach[:-1]
        grow[:-1] |= reach[1:]
        grow[:, 1:] |= reach[:, :-1]
        grow[:, :-1] |= reach[:, 1:]
        grow[:, :, 1:] |= reach[:, :, :-1]
        grow[:, :, :-1] |= reach[:, :, 1:]
        grow &= open3
        if (grow == reach).all():
            break
        reach = grow
    return bool(reach[h - 1].any())


def bt_identity_violations(heights, width_b, width_c):
    hgt, nb, nc = heights, width_b, width_c
    na, ncc = hgt * nb, hgt * nc
    shifts_a = np.arange(na, dtype=np.uint32)
    shifts_b = np.arange(ncc, dtype=np.uint32)
    bad = 0
    for cfg_a in range(1 << na):
        bits_a = ((cfg_a >> shifts_a) & 1).astype(np.uint8).reshape(hgt, nb)
        cross_a = cross_grid(bits_a, 0)
        for cfg_b in range(1 << ncc):
            bits_b = ((cfg_b >> shifts_b) & 1).astype(np.uint8) \
                .reshape(hgt, nc)
            cross_b = cross_grid(bits_b, 0)
            joint = _box_bt_cross(bits_a, bits_b)
            if joint != (cross_a and cross_b):
                bad += 1
    return bad


def warmup():
    pass
