"""Shared test oracles.

The latent-uniform sampler draws sketch-slot maxima straight from their
generative model: per slot, independent maxima over the intersection, the
A-only part and the B-only part (each the max of that many uniforms, i.e. a
Beta(count, 1) draw via inverse CDF).  Slot equality is decided on the
latent structure (the shared intersection maximum wins both sides), never on
float comparison.  This is independent of the hashing pipeline and serves as
the Monte-Carlo oracle for likelihood and covariance formulas.
"""

from __future__ import annotations

import numpy as np
import pytest

from intersketch.intersect import ProblemParams
from intersketch.sketchkit import IndicatorStats


def sample_slot_maxima(
    params: ProblemParams, m: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (s, t, equal) for m slots from the generative sketch model."""
    n, alpha, beta = params.n, params.alpha, params.beta
    m_n = rng.random(m) ** (1.0 / n) if n > 0 else np.zeros(m)
    m_a = rng.random(m) ** (1.0 / alpha) if alpha > 0 else np.zeros(m)
    m_b = rng.random(m) ** (1.0 / beta) if beta > 0 else np.zeros(m)
    s = np.maximum(m_a, m_n)
    t = np.maximum(m_b, m_n)
    equal = (m_n > m_a) & (m_n > m_b)
    return s, t, equal


def stats_from_slots(s: np.ndarray, t: np.ndarray, equal: np.ndarray) -> IndicatorStats:
    """Assemble sufficient statistics from sampled slot maxima."""
    lt = ~equal & (s < t)
    gt = ~equal & ~lt
    return IndicatorStats(
        m=int(s.size),
        k1=int(equal.sum()),
        k2=int(lt.sum()),
        k3=int(gt.sum()),
        s1s=float(np.log(s[equal]).sum()),
        s2s=float(np.log(s[lt]).sum()),
        s2t=float(np.log(t[lt]).sum()),
        s3s=float(np.log(s[gt]).sum()),
        s3t=float(np.log(t[gt]).sum()),
    )


def sample_stats(
    params: ProblemParams, m: int, rng: np.random.Generator
) -> IndicatorStats:
    return stats_from_slots(*sample_slot_maxima(params, m, rng))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)
