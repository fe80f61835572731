"""Numba kernels for bulk sketch construction.

These are internal: they implement exactly the same keyed hash as
:mod:`intersketch.hashkit` (FNV-1a digest -> xor subkey -> SplitMix64
finalizer) but loop over (hash function, element) pairs at native speed.
Results are bit-identical to the scalar path; tests assert this.

Integer maxima make every reduction here exact, so outputs do not depend on
the number of numba threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)

_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U10 = np.uint64(10)
_U48 = np.uint64(48)  # ord('0')


@njit(cache=True, inline="always")
def _mix64(x):
    x ^= x >> _SH30
    x *= _MUL1
    x ^= x >> _SH27
    x *= _MUL2
    x ^= x >> _SH31
    return x


@njit(cache=True)
def decimal_fnv_digests(start, count):
    """FNV-1a digests of the decimal tokens str(start), ..., str(start+count-1).

    Matches ``hashkit.fnv1a64(str(i).encode())`` byte for byte.
    """
    out = np.empty(count, dtype=np.uint64)
    buf = np.empty(20, dtype=np.uint64)
    for i in range(count):
        v = start + np.uint64(i)
        nd = 0
        if v == _U0:
            buf[0] = _U48
            nd = 1
        else:
            while v > _U0:
                buf[nd] = v % _U10 + _U48
                v //= _U10
                nd += 1
        h = _FNV_OFFSET
        for j in range(nd - 1, -1, -1):
            h = (h ^ buf[j]) * _FNV_PRIME
        out[i] = h
    return out


@njit(cache=True, parallel=True)
def keyed_maxima(digests, subkeys):
    """Per hash function k: max over elements of mix64(subkeys[k] ^ digest)."""
    m = subkeys.shape[0]
    n = digests.shape[0]
    out = np.zeros(m, dtype=np.uint64)
    for k in prange(m):
        sk = subkeys[k]
        best = _U0
        for j in range(n):
            x = _mix64(sk ^ digests[j])
            if x > best:
                best = x
        out[k] = best
    return out


@njit(cache=True, parallel=True)
def keyed_segment_maxima(digests, subkeys, b1, b2):
    """Like :func:`keyed_maxima` but split into three index segments.

    Returns an (m, 3) array of maxima over digests[0:b1], digests[b1:b2] and
    digests[b2:].  Callers combine segments to obtain the sketches of two
    overlapping sets and their union from one pass.
    """
    m = subkeys.shape[0]
    n = digests.shape[0]
    out = np.zeros((m, 3), dtype=np.uint64)
    for k in prange(m):
        sk = subkeys[k]
        best = _U0
        for j in range(b1):
            x = _mix64(sk ^ digests[j])
            if x > best:
                best = x
        out[k, 0] = best
        best = _U0
        for j in range(b1, b2):
            x = _mix64(sk ^ digests[j])
            if x > best:
                best = x
        out[k, 1] = best
        best = _U0
        for j in range(b2, n):
            x = _mix64(sk ^ digests[j])
            if x > best:
                best = x
        out[k, 2] = best
    return out


@njit(cache=True)
def hll_segment_registers(digests, subkey0, p, b1, b2):
    """HyperLogLog registers for the three index segments of ``digests``.

    One 64-bit hash per element: the low ``p`` bits pick the bucket, the
    remaining ``64 - p`` bits give rank = (leading zeros) + 1.  Returns a
    (3, 2**p) uint8 array, one register bank per segment.
    """
    n = digests.shape[0]
    m = 1 << p
    regs = np.zeros((3, m), dtype=np.uint8)
    mask = np.uint64(m - 1)
    pp = np.uint64(p)
    wbits = np.uint64(64 - p)
    for j in range(n):
        x = _mix64(subkey0 ^ digests[j])
        bucket = np.int64(x & mask)
        w = x >> pp
        if w == _U0:
            rank = np.uint8(wbits + _U1)
        else:
            r = _U1
            while (w >> (wbits - r)) & _U1 == _U0:
                r += _U1
            rank = np.uint8(r)
        seg = 0 if j < b1 else (1 if j < b2 else 2)
        if regs[seg, bucket] < rank:
            regs[seg, bucket] = rank
    return regs


def hll_registers(digests, subkey0, p):
    """HyperLogLog registers over all of ``digests`` (single segment)."""
    n = digests.shape[0]
    regs = hll_segment_registers(digests, subkey0, p, n, n)
    return regs[0]
