"""Counter-based uniform variates: u(seed, stream, a) depends on nothing else.

The mixer is SplitMix64's finalizer applied to a key derived from the seed
and stream id, then to the counter.  Evaluating u for a block of counters
is a pure vectorized function, so any partition of the counter range
(serial, chunked, threaded) yields the same values.
"""

import numpy as np

GENERATOR_ID = "splitmix64-counter-v1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed, stream=0):
    with np.errstate(over="ignore"):
        s = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
        k = _mix(s * _GOLDEN + np.uint64(stream & 0xFFFFFFFF))
        return _mix(k ^ np.uint64(0xD1B54A32D192ED03))


def uniforms(seed, start, stop, stream=0):
    """u_a in [0, 1) for counters start <= a < stop."""
    key = stream_key(seed, stream)
    a = np.arange(start, stop, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix((a + np.uint64(1)) * _GOLDEN ^ key)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
