"""Kernel backend selection.

The environment variable HYPERPERC_BACKEND picks the implementation of the
hot kernels:

    HYPERPERC_BACKEND=numba   jitted kernels (default when numba imports)
    HYPERPERC_BACKEND=numpy   pure numpy/python fallback

Both expose the same functions and produce bit-identical results; only
throughput differs (see benchmarks/bench_backends.py).
"""

import os

from . import _purepy
from ._purepy import derive_seed as derive_seed_py  # noqa: F401
from ._purepy import cell_bit, cell_u53, mix64  # noqa: F401


def _select():
    choice = os.environ.get("HYPERPERC_BACKEND", "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise RuntimeError(
            f"HYPERPERC_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        from . import _numpy_impl as impl
        return impl
    try:
        from . import _numba_impl as impl
        return impl
    except ImportError:
        if choice == "numba":
            raise
        from . import _numpy_impl as impl
        return impl


impl = _select()

name = impl.name
mix64_scalar = impl.mix64_scalar
derive_seed = impl.derive_seed
plane_bits = impl.plane_bits
site_open_bits = impl.site_open_bits
explore_origin = impl.explore_origin
count_boundary_trials = impl.count_boundary_trials
count_box_allopen_trials = impl.count_box_allopen_trials
cross_grid = impl.cross_grid
bt_identity_violations = impl.bt_identity_violations
warmup = impl.warmup
