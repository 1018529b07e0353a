"""Deterministic derivation of per-replica RNG seeds.

Every experiment replica draws from its own ``numpy.random.Generator``
seeded by ``replica_seed(master_seed, stream_index)``.  The mixing
function is the SplitMix64 finalizer, applied twice so that both
structured master seeds (0, 1, 2, ...) and structured stream indices
decorrelate.  The scheme is frozen: changing it silently would break
byte-reproducibility of archived run manifests.
"""

_MASK64 = (1 << 64) - 1


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit avalanche mix."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replica_seed(master_seed: int, stream_index: int) -> int:
    """Seed for the ``stream_index``-th independent sampling stream."""
    if stream_index < 0:
        raise ValueError("stream_index must be nonnegative")
    return mix64((master_seed ^ mix64(stream_index)) & _MASK64)
