"""Deterministic keyed 64-bit hashing of element tokens.

A :class:`HashFamily` turns one 64-bit seed into ``m`` independent hash
functions over byte tokens.  The construction is fixed and byte-exact so
that sketch files are portable across runs and implementations:

* ``digest = fnv1a64(token)`` -- FNV-1a over the raw token bytes.
* ``subkey(k) = mix64(base_seed + (k + 1) * GOLDEN mod 2**64)`` -- the k-th
  key of a SplitMix64-style sequence seeded at ``base_seed``.
* ``hash64(family, k, token) = mix64(subkey(k) ^ digest)``.

``mix64`` is the SplitMix64 finalizer (two multiply-xorshift rounds), whose
avalanche behaviour makes the ``m`` functions empirically uncorrelated.
FNV-1a is a chain of bijective steps, so tokens differing in any bit always
produce different digests and therefore different hash values.

``to_unit`` maps an unsigned 64-bit value to the open interval (0, 1) via the
midpoint rule ``(h + 0.5) * 2**-64``, which keeps logarithms of hashed values
finite.  Near the top of the range the exact midpoint is not representable in
binary64; values that would round to 1.0 are clamped to the largest double
below 1 (see the function docstring).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF

# SplitMix64 stream increment (odd, so k -> base_seed + (k+1)*GOLDEN is
# injective mod 2**64) and finalizer multipliers.
GOLDEN = 0x9E3779B97F4A7C15
_MIX_MUL1 = 0xBF58476D1CE4E5B9
_MIX_MUL2 = 0x94D049BB133111EB

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

# Largest binary64 strictly below 1.
_BELOW_ONE = 1.0 - 2.0**-53

_TO_UNIT_SCALE = 2.0**-64
_TO_UNIT_HALF = 2.0**-65


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit mixer with full avalanche."""
    x &= MASK64
    x ^= x >> 30
    x = (x * _MIX_MUL1) & MASK64
    x ^= x >> 27
    x = (x * _MIX_MUL2) & MASK64
    x ^= x >> 31
    return x


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit digest of a byte string."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


@dataclass(frozen=True)
class HashFamily:
    """``m`` keyed hash functions derived from one 64-bit seed.

    Function ``k`` is a pure function of ``(base_seed, k, token)``; distinct
    ``k`` always produce distinct outputs for the same token because every
    step of the construction is bijective.
    """

    base_seed: int
    m: int

    def __post_init__(self) -> None:
        if not 0 <= self.base_seed <= MASK64:
            raise ValueError(f"base_seed must be a 64-bit unsigned value, got {self.base_seed}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    def subkey(self, k: int) -> int:
        """Key of the k-th hash function (0 <= k < m)."""
        if not 0 <= k < self.m:
            raise IndexError(f"hash index {k} out of range for m={self.m}")
        return mix64((self.base_seed + (k + 1) * GOLDEN) & MASK64)

    def subkeys(self) -> np.ndarray:
        """All m subkeys as a uint64 array (bulk-hashing form of subkey)."""
        ks = np.arange(1, self.m + 1, dtype=np.uint64)
        x = (np.uint64(self.base_seed) + ks * np.uint64(GOLDEN)) & np.uint64(MASK64)
        return mix64_array(x)


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` over a uint64 array."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX_MUL1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX_MUL2)
    x ^= x >> np.uint64(31)
    return x


def hash64(family: HashFamily, k: int, element: bytes) -> int:
    """Hash ``element`` with the k-th function of the family.

    Deterministic, full 64-bit range.  Raises IndexError when ``k`` is not a
    valid function index.
    """
    return mix64(family.subkey(k) ^ fnv1a64(element))


def to_unit(h: int) -> float:
    """Map a 64-bit unsigned value into the open unit interval.

    Computes ``(h + 0.5) * 2**-64`` in double precision.  The result is exact
    for h < 2**52 and correctly rounded (relative error <= 2**-53) above.
    Values in the top sliver of the range whose midpoint would round to 1.0
    are clamped to ``1 - 2**-53`` so that the result is never exactly 0 or 1.
    """
    if not 0 <= h <= MASK64:
        raise ValueError(f"expected a 64-bit unsigned value, got {h}")
    x = float(h) * _TO_UNIT_SCALE + _TO_UNIT_HALF
    return x if x < 1.0 else _BELOW_ONE


def to_unit_array(h: np.ndarray) -> np.ndarray:
    """Vectorized :func:`to_unit`; bit-identical to the scalar version."""
    x = h.astype(np.float64) * _TO_UNIT_SCALE + _TO_UNIT_HALF
    return np.minimum(x, _BELOW_ONE)
