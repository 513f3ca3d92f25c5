"""Counter-based random streams (Philox4x32-10).

Every Monte Carlo trial owns an independent substream.  A draw is a pure
function of ``(seed, trial, sampler tag, draw index)``:

* key     = (seed & 0xffffffff, seed >> 32)             -- the 64-bit seed
* counter = (draw index, trial & 0xffffffff, trial >> 32, sampler tag)

One Philox block yields four 32-bit words ``w0..w3``; they are paired into two
uniforms on the open interval (0, 1) with 52 bits each::

    u = ((((hi << 32) | lo) >> 12) + 0.5) * 2**-52

so ``u`` lies in ``[2**-53, 1 - 2**-53]`` and never hits 0 or 1.  Results
therefore do not depend on how trials are scheduled across threads.

The block function follows Salmon et al., "Parallel random numbers: as easy
as 1, 2, 3" (SC'11) and reproduces the Random123 known-answer vectors.
"""

from __future__ import annotations

import numba
import numpy as np

MASK32 = 0xFFFFFFFF
PHILOX_M0 = 0xD2511F53
PHILOX_M1 = 0xCD9E8D57
PHILOX_W0 = 0x9E3779B9
PHILOX_W1 = 0xBB67AE85
ROUNDS = 10
TWO_M52 = 2.0**-52

TAG_EVENT = 0
TAG_VISITS = 1


def philox4x32(counter, key, rounds: int = ROUNDS) -> tuple[int, int, int, int]:
    """Reference Philox4x32 block function on plain Python ints."""
    c0, c1, c2, c3 = (int(c) & MASK32 for c in counter)
    k0, k1 = (int(k) & MASK32 for k in key)
    for r in range(rounds):
        if r:
            k0 = (k0 + PHILOX_W0) & MASK32
            k1 = (k1 + PHILOX_W1) & MASK32
        p0 = PHILOX_M0 * c0
        p1 = PHILOX_M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> 32) ^ c1 ^ k0,
            p1 & MASK32,
            (p0 >> 32) ^ c3 ^ k1,
            p0 & MASK32,
        )
    return c0, c1, c2, c3


def _to_uniform(hi: int, lo: int) -> float:
    return ((((hi << 32) | lo) >> 12) + 0.5) * TWO_M52


class TrialStream:
    """Sequential uniforms of one trial's substream (pure Python).

    Used for single-trial simulation and as a reference for the compiled
    kernels.  Each block is consumed as two uniforms, first ``(w0, w1)`` then
    ``(w2, w3)``.
    """

    def __init__(self, seed: int, trial: int, tag: int = TAG_EVENT):
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= trial < 2**64:
            raise ValueError("trial index must fit in 64 bits")
        self.key = (seed & MASK32, seed >> 32)
        self.trial = trial
        self.tag = tag
        self.block_index = 0
        self._pending: list[float] = []

    def next_block(self) -> tuple[float, float]:
        w = philox4x32((self.block_index, self.trial & MASK32, self.trial >> 32, self.tag), self.key)
        self.block_index += 1
        return _to_uniform(w[0], w[1]), _to_uniform(w[2], w[3])

    def uniform(self) -> float:
        if not self._pending:
            a, b = self.next_block()
            self._pending = [b, a]
        return self._pending.pop()


# --- compiled versions -------------------------------------------------------


@numba.njit(cache=True, inline="always")
def philox_block(c0, c1, c2, c3, k0, k1):
    m0 = np.uint64(PHILOX_M0)
    m1 = np.uint64(PHILOX_M1)
    mask = np.uint64(MASK32)
    s32 = np.uint64(32)
    for r in range(ROUNDS):
        if r:
            k0 = (k0 + np.uint64(PHILOX_W0)) & mask
            k1 = (k1 + np.uint64(PHILOX_W1)) & mask
        p0 = m0 * c0
        p1 = m1 * c2
        n0 = (p1 >> s32) ^ c1 ^ k0
        n1 = p1 & mask
        n2 = (p0 >> s32) ^ c3 ^ k1
        n3 = p0 & mask
        c0, c1, c2, c3 = n0, n1, n2, n3
    return c0, c1, c2, c3


@numba.njit(cache=True, inline="always")
def words_to_uniform(hi, lo):
    x = (hi << np.uint64(32)) | lo
    return (np.float64(x >> np.uint64(12)) + 0.5) * TWO_M52


@numba.njit(cache=True, inline="always")
def uniform_pair(block_index, t_lo, t_hi, tag, k0, k1):
    w0, w1, w2, w3 = philox_block(np.uint64(block_index), t_lo, t_hi, tag, k0, k1)
    return words_to_uniform(w0, w1), words_to_uniform(w2, w3)


@numba.njit(cache=True)
def uniforms_for_trial(seed, trial, tag, count):
    """First ``count`` uniforms of a substream, in consumption order."""
    k0 = np.uint64(seed) & np.uint64(MASK32)
    k1 = np.uint64(seed) >> np.uint64(32)
    t_lo = np.uint64(trial) & np.uint64(MASK32)
    t_hi = np.uint64(trial) >> np.uint64(32)
    out = np.empty(count)
    i = 0
    b = 0
    while i < count:
        a, c = uniform_pair(b, t_lo, t_hi, np.uint64(tag), k0, k1)
        b += 1
        out[i] = a
        i += 1
        if i < count:
            out[i] = c
            i += 1
    return out
