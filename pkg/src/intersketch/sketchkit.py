"""Max-hash and HyperLogLog sketches over element streams.

Both sketch kinds are order- and repetition-insensitive digests of the
distinct-element set of a stream, mergeable by component-wise max:

* :class:`MaxSketch` keeps, for each of the family's ``m`` hash functions,
  the maximal raw 64-bit hash value seen.  Equality of slots is decided on
  the raw integers, never on derived floats, so two sketches agree on a slot
  exactly when the same element achieved the maximum in both streams
  (64-bit hash collisions aside).
* :class:`HllSketch` keeps ``m`` HyperLogLog registers (``m`` a power of
  two), fed by a single 64-bit hash per element split into bucket bits and
  a leading-zero rank.

Sketch identity for comparisons and merge compatibility is the pair
(base_seed, m) plus the register/maxima state; ``count_observed`` counts
ingested (not distinct) items and is informational only.

File format: versioned JSON, ``maxsketch-v1`` / ``hll-v1``.  Maxima are hex
strings for lossless 64-bit round-trips; the seed is a decimal string.
Readers reject unknown format tags.  A sketch is empty if and only if
``count_observed`` is zero; emptiness is an explicit state, not a sentinel
register value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .hashkit import HashFamily, fnv1a64, to_unit_array

MAX_FORMAT = "maxsketch-v1"
HLL_FORMAT = "hll-v1"


class SketchError(Exception):
    """Base class for sketch-layer errors."""


class IncompatibleSketchError(SketchError):
    """Two sketches do not share (base_seed, m) or are of different kinds."""


class EmptySketchError(SketchError):
    """Operation requires a sketch that has ingested at least one element."""


def _digests(tokens: Iterable[bytes]) -> np.ndarray:
    return np.array([fnv1a64(t) for t in tokens], dtype=np.uint64)


def _require_compatible(a, b) -> None:
    if type(a) is not type(b):
        raise IncompatibleSketchError(
            f"cannot combine {type(a).__name__} with {type(b).__name__}"
        )
    if a.family != b.family:
        raise IncompatibleSketchError(
            f"sketch families differ: (seed={a.family.base_seed}, m={a.family.m}) "
            f"vs (seed={b.family.base_seed}, m={b.family.m})"
        )


@dataclass(eq=False)
class MaxSketch:
    """Per-set record of the maximal hash value under each of m functions."""

    family: HashFamily
    maxima: np.ndarray = field(default=None)  # type: ignore[assignment]
    count_observed: int = 0

    def __post_init__(self) -> None:
        if self.maxima is None:
            self.maxima = np.zeros(self.family.m, dtype=np.uint64)
        else:
            self.maxima = np.asarray(self.maxima, dtype=np.uint64)
        if self.maxima.shape != (self.family.m,):
            raise ValueError(
                f"maxima has shape {self.maxima.shape}, expected ({self.family.m},)"
            )

    @property
    def m(self) -> int:
        return self.family.m

    @property
    def is_empty(self) -> bool:
        return self.count_observed == 0

    def update(self, element: bytes) -> "MaxSketch":
        """Ingest one element; idempotent per distinct element."""
        self.update_many([element])
        return self

    def update_many(self, tokens: Iterable[bytes]) -> "MaxSketch":
        """Ingest a batch of elements (bulk path, same result as update)."""
        digests = _digests(tokens)
        if digests.size == 0:
            return self
        batch = _kernels.keyed_maxima(digests, self.family.subkeys())
        np.maximum(self.maxima, batch, out=self.maxima)
        self.count_observed += int(digests.size)
        return self

    def merge(self, other: "MaxSketch") -> "MaxSketch":
        """Sketch of the union stream: component-wise max (pure)."""
        _require_compatible(self, other)
        return MaxSketch(
            family=self.family,
            maxima=np.maximum(self.maxima, other.maxima),
            count_observed=self.count_observed + other.count_observed,
        )

    def unit_maxima(self) -> np.ndarray:
        """Maxima mapped into (0, 1); requires a non-empty sketch."""
        if self.is_empty:
            raise EmptySketchError("empty max-sketch has no unit maxima")
        return to_unit_array(self.maxima)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaxSketch):
            return NotImplemented
        return (
            self.family == other.family
            and self.is_empty == other.is_empty
            and bool(np.array_equal(self.maxima, other.maxima))
        )

    def to_dict(self) -> dict:
        return {
            "format": MAX_FORMAT,
            "base_seed": str(self.family.base_seed),
            "m": self.family.m,
            "maxima": [f"0x{v:016x}" for v in self.maxima.tolist()],
            "count_observed": self.count_observed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MaxSketch":
        if doc.get("format") != MAX_FORMAT:
            raise ValueError(f"unknown sketch format tag: {doc.get('format')!r}")
        family = HashFamily(base_seed=int(doc["base_seed"]), m=int(doc["m"]))
        maxima = np.array([int(s, 16) for s in doc["maxima"]], dtype=np.uint64)
        count = int(doc["count_observed"])
        if count == 0 and maxima.any():
            raise ValueError("empty sketch (count_observed=0) with nonzero maxima")
        return cls(family=family, maxima=maxima, count_observed=count)


@dataclass(eq=False)
class HllSketch:
    """HyperLogLog register bank for cardinality estimation."""

    family: HashFamily
    registers: np.ndarray = field(default=None)  # type: ignore[assignment]
    count_observed: int = 0

    def __post_init__(self) -> None:
        m = self.family.m
        if m < 2 or m & (m - 1) != 0:
            raise ValueError(f"HLL register count must be a power of two, got {m}")
        if self.registers is None:
            self.registers = np.zeros(m, dtype=np.uint8)
        else:
            self.registers = np.asarray(self.registers, dtype=np.uint8)
        if self.registers.shape != (m,):
            raise ValueError(
                f"registers has shape {self.registers.shape}, expected ({m},)"
            )
        if int(self.registers.max(initial=0)) > 64:
            raise ValueError("HLL register values must be <= 64")

    @property
    def m(self) -> int:
        return self.family.m

    @property
    def p(self) -> int:
        return self.family.m.bit_length() - 1

    @property
    def is_empty(self) -> bool:
        return self.count_observed == 0

    def update(self, element: bytes) -> "HllSketch":
        """Ingest one element; idempotent per distinct element."""
        self.update_many([element])
        return self

    def update_many(self, tokens: Iterable[bytes]) -> "HllSketch":
        digests = _digests(tokens)
        if digests.size == 0:
            return self
        batch = _kernels.hll_registers(
            digests, np.uint64(self.family.subkey(0)), self.p
        )
        np.maximum(self.registers, batch, out=self.registers)
        self.count_observed += int(digests.size)
        return self

    def merge(self, other: "HllSketch") -> "HllSketch":
        """Union-stream sketch: register-wise max (pure)."""
        _require_compatible(self, other)
        return HllSketch(
            family=self.family,
            registers=np.maximum(self.registers, other.registers),
            count_observed=self.count_observed + other.count_observed,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HllSketch):
            return NotImplemented
        return (
            self.family == other.family
            and self.is_empty == other.is_empty
            and bool(np.array_equal(self.registers, other.registers))
        )

    def to_dict(self) -> dict:
        return {
            "format": HLL_FORMAT,
            "base_seed": str(self.family.base_seed),
            "m": self.family.m,
            "registers": [int(v) for v in self.registers.tolist()],
            "count_observed": self.count_observed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HllSketch":
        if doc.get("format") != HLL_FORMAT:
            raise ValueError(f"unknown sketch format tag: {doc.get('format')!r}")
        family = HashFamily(base_seed=int(doc["base_seed"]), m=int(doc["m"]))
        registers = np.array(doc["registers"], dtype=np.uint8)
        count = int(doc["count_observed"])
        if count == 0 and registers.any():
            raise ValueError("empty sketch (count_observed=0) with nonzero registers")
        return cls(family=family, registers=registers, count_observed=count)


# Spec-facing functional aliases -------------------------------------------


def max_update(sketch: MaxSketch, element: bytes) -> MaxSketch:
    return sketch.update(element)


def max_merge(s1: MaxSketch, s2: MaxSketch) -> MaxSketch:
    return s1.merge(s2)


def hll_update(sketch: HllSketch, element: bytes) -> HllSketch:
    return sketch.update(element)


def hll_merge(s1: HllSketch, s2: HllSketch) -> HllSketch:
    return s1.merge(s2)


# Indicator statistics -------------------------------------------------------


@dataclass(frozen=True)
class IndicatorStats:
    """Sufficient statistics of a max-sketch pair for likelihood work.

    Each of the m slots falls in exactly one class by comparing the raw
    maxima: equal (k1), first below second (k2), first above second (k3).
    The s-fields are natural-log sums of the unit-interval maxima within
    each class: s1s over equal slots; s2s/s2t over the lower/upper value of
    k2 slots; s3s/s3t over the upper/lower value of k3 slots (s always from
    sketch A, t always from sketch B).
    """

    m: int
    k1: int
    k2: int
    k3: int
    s1s: float
    s2s: float
    s2t: float
    s3s: float
    s3t: float

    def __post_init__(self) -> None:
        if self.k1 + self.k2 + self.k3 != self.m:
            raise ValueError("slot class counts must sum to m")


def indicator_stats_from_maxima(
    maxima_a: np.ndarray, maxima_b: np.ndarray
) -> IndicatorStats:
    """Classify slots on raw integers and accumulate log sums."""
    eq = maxima_a == maxima_b
    lt = maxima_a < maxima_b
    gt = ~eq & ~lt
    xa = to_unit_array(maxima_a)
    xb = to_unit_array(maxima_b)
    return IndicatorStats(
        m=int(maxima_a.size),
        k1=int(eq.sum()),
        k2=int(lt.sum()),
        k3=int(gt.sum()),
        s1s=float(np.log(xa[eq]).sum()),
        s2s=float(np.log(xa[lt]).sum()),
        s2t=float(np.log(xb[lt]).sum()),
        s3s=float(np.log(xa[gt]).sum()),
        s3t=float(np.log(xb[gt]).sum()),
    )


def indicator_stats(sa: MaxSketch, sb: MaxSketch) -> IndicatorStats:
    """Sufficient statistics of a compatible, non-empty sketch pair."""
    _require_compatible(sa, sb)
    if sa.is_empty or sb.is_empty:
        raise EmptySketchError("indicator statistics need two non-empty sketches")
    return indicator_stats_from_maxima(sa.maxima, sb.maxima)


# Files ----------------------------------------------------------------------


def save_sketch(sketch: MaxSketch | HllSketch, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sketch.to_dict(), fh, indent=1)
        fh.write("\n")


def load_sketch(path) -> MaxSketch | HllSketch:
    """Load either sketch kind, dispatching on the format tag."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    tag = doc.get("format")
    if tag == MAX_FORMAT:
        return MaxSketch.from_dict(doc)
    if tag == HLL_FORMAT:
        return HllSketch.from_dict(doc)
    raise ValueError(f"unknown sketch format tag: {tag!r}")
