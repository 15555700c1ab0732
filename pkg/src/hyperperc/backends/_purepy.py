"""Reference integer implementation of the counter-based bit generator.

Every backend must reproduce these values bit for bit; the scalar API in
:mod:`hyperperc.field` calls this implementation directly, so a single site
query and a million-site vectorized sweep always agree.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF

GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
SEED_SALT = 0xD6E8FEB86659FD93

# u53 values compare against p * 2**53; the product is exact in float64.
TWO53 = 9007199254740992.0


def mix64(z: int) -> int:
    """64-bit finalizer: bijective, full avalanche."""
    z &= MASK64
    z ^= z >> 30
    z = (z * MIX_A) & MASK64
    z ^= z >> 27
    z = (z * MIX_B) & MASK64
    z ^= z >> 31
    return z


def u64(x: int) -> int:
    """Two's-complement wrap of a signed integer into [0, 2**64)."""
    return x & MASK64


def cell_u53(seed: int, rank: int, coords) -> int:
    """53-bit uniform value attached to one cell of one hyperplane field.

    ``rank`` identifies the hyperplane (colexicographic rank of its index
    set), ``coords`` are the cell's lattice coordinates within that plane.
    """
    h = mix64(u64(seed) ^ GOLDEN)
    h = mix64(h ^ u64(rank))
    for c in coords:
        h = mix64(h ^ u64(c))
    return h >> 11


def cell_bit(seed: int, rank: int, coords, p: float) -> int:
    """Bernoulli(p) bit for one hyperplane cell, deterministic in all args."""
    return 1 if float(cell_u53(seed, rank, coords)) < p * TWO53 else 0


def derive_seed(seed: int, stream: int, index: int) -> int:
    """Per-trial seed: independent streams keyed by (stream, index)."""
    h = mix64(u64(seed) ^ SEED_SALT)
    h = mix64(h ^ u64(stream))
    return mix64(h ^ u64(index))
