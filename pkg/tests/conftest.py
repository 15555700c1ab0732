import numpy as np
import pytest

from hyperperc import backends


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile jitted kernels once so timed tests measure computation only
    backends.warmup()


def brute_force_unit_ball(v):
    """All sites at l1-distance exactly one from ``v`` (independent oracle)."""
    import itertools
    n = len(v)
    out = set()
    for delta in itertools.product((-1, 0, 1), repeat=n):
        if sum(abs(d) for d in delta) == 1:
            out.add(tuple(a + b for a, b in zip(v, delta)))
    return out


def dfs_crossing_exists(grid, axis):
    """Path-existence oracle by exhaustive depth-first search."""
    h, w = grid.shape
    if axis == 1:
        grid = grid.T
        h, w = w, h
    seen = set()

    def walk(i, j):
        if i == h - 1:
            return True
        for i2, j2 in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= i2 < h and 0 <= j2 < w and grid[i2, j2] \
                    and (i2, j2) not in seen:
                seen.add((i2, j2))
                if walk(i2, j2):
                    return True
        return False

    for j in range(w):
        if grid[0, j] and (0, j) not in seen:
            seen.add((0, j))
            if walk(0, j):
                return True
    return False


def dense_window_cluster(view, radius):
    """Flood-fill oracle over a pre-materialized window of open bits."""
    from hyperperc.field import site_open_many
    import itertools

    n = view.field.n
    coords = np.array(list(itertools.product(range(-radius, radius + 1),
                                             repeat=n)), dtype=np.int64)
    bits = site_open_many(view, coords)
    open_set = {tuple(c) for c, b in zip(coords.tolist(), bits) if b}
    origin = (0,) * n
    if origin not in open_set:
        return set()
    seen = {origin}
    stack = [origin]
    while stack:
        v = stack.pop()
        for d in range(n):
            for step in (1, -1):
                w = v[:d] + (v[d] + step,) + v[d + 1:]
                if w in open_set and w not in seen:
                    seen.add(w)
                    stack.append(w)
    return seen
