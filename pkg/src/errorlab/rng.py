"""Counter-based randomness.

Philox4x64-10, implemented as a pure function of (key, counter) so that any
jitted loop can draw the j-th variate of the i-th sample directly, with no
generator state to thread through.  Matches numpy.random.Philox output word
for word (frozen vectors in the tests).

Stream discipline: counter = (index, block, 0, stream) with key = (seed, 0).
One Philox call yields four 64-bit words; variate j of a sample lives in
word j % 4 of block j // 4.  Distinct subsystems use distinct stream ids so
that a model draw can never collide with a grid-jitter draw under the same
seed.
"""

import numpy as np
from numba import njit, uint64

# streams (counter word 3)
STREAM_MODEL = 0
STREAM_GRID = 1
STREAM_TAIL = 2
STREAM_SEARCH = 3
STREAM_TILT = 4  # reserved for tilted-phase sampling; no current consumer

_M0 = uint64(0xD2E7470EE14C6C93)
_M1 = uint64(0xCA5A826395121157)
_W0 = uint64(0x9E3779B97F4A7C15)
_W1 = uint64(0xBB67AE8584CAA73B)

_INV53 = 1.0 / 9007199254740992.0  # 2^-53


@njit(cache=True)
def _mulhilo(a, b):
    # 64x64 -> 128 via 32-bit limbs
    a = uint64(a)
    b = uint64(b)
    lo = a * b
    ah = a >> uint64(32)
    al = a & uint64(0xFFFFFFFF)
    bh = b >> uint64(32)
    bl = b & uint64(0xFFFFFFFF)
    t = al * bl
    c = t >> uint64(32)
    t = ah * bl + c
    w1 = t & uint64(0xFFFFFFFF)
    w2 = t >> uint64(32)
    t = al * bh + w1
    hi = ah * bh + w2 + (t >> uint64(32))
    return hi, lo


@njit(cache=True)
def philox4(k0, k1, c0, c1, c2, c3):
    """Ten Philox4x64 rounds; returns the four output words."""
    k0 = uint64(k0)
    k1 = uint64(k1)
    for _ in range(10):
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 += _W0
        k1 += _W1
    return c0, c1, c2, c3


@njit(cache=True)
def uniform(seed, index, j, stream):
    """Uniform in [0, 1): variate j of sample `index` on the given stream."""
    c0, c1, c2, c3 = philox4(
        uint64(seed), uint64(0), uint64(index), uint64(j // 4), uint64(0), uint64(stream)
    )
    jj = j % 4
    if jj == 0:
        w = c0
    elif jj == 1:
        w = c1
    elif jj == 2:
        w = c2
    else:
        w = c3
    return float(w >> uint64(11)) * _INV53


@njit(cache=True)
def fill_uniform(out, seed, start_index, j, stream):
    """out[i] = uniform(seed, start_index + i, j, stream) for each i."""
    for i in range(out.size):
        out[i] = uniform(seed, start_index + i, j, stream)
    return out


def uniform_array(seed, count, j=0, stream=STREAM_MODEL, start_index=0):
    """Convenience wrapper returning a float64 array of length `count`."""
    out = np.empty(int(count), dtype=np.float64)
    fill_uniform(out, np.uint64(seed), np.uint64(start_index), int(j), int(stream))
    return out
