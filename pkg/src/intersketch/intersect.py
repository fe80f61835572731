"""Intersection-cardinality estimators over a pair of max-sketches.

Four estimators of ``n = |A intersect B|``:

* ``scheme1``: inclusion-exclusion, ``a + b - u`` (never clamped; callers
  decide what to do with negative noise).
* ``scheme2``: Jaccard times union, ``rho * u``.
* ``scheme3``: ``rho / (1 + rho) * (a + b)``.
* ``ml_estimate``: maximum likelihood over the joint density of the two
  sketches' unit maxima, solved by damped Newton-Raphson on the analytic
  gradient and Hessian.

The likelihood factors per hash slot into three cases (equal maxima / A
below B / A above B), so the sufficient statistics are the slot counts and
per-case log sums collected in :class:`~intersketch.sketchkit.IndicatorStats`.
With parameters theta = (a, b, n) and derived u = a + b - n, alpha = a - n,
beta = b - n, the log density is

    k1*ln n + (u-1)*s1s
  + k2*(ln beta + ln a) + (beta-1)*s2t + (a-1)*s2s
  + k3*(ln alpha + ln b) + (alpha-1)*s3s + (b-1)*s3t

which is linear in theta plus log-barrier terms, so Newton converges in a
handful of iterations from any reasonable start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cardest import hll_estimate, maxsketch_cardinality
from .sketchkit import (
    HllSketch,
    IncompatibleSketchError,
    IndicatorStats,
    MaxSketch,
    indicator_stats,
)


class InfeasibleParamsError(ValueError):
    """Parameter point lies outside the domain of the requested formula."""


@dataclass(frozen=True)
class ProblemParams:
    """Parameter triple (a, b, n) = (|A|, |B|, |A intersect B|).

    Derived quantities: ``u = a + b - n`` (union), ``alpha = a - n`` (A only),
    ``beta = b - n`` (B only).  Boundaries n = 0, alpha = 0 and beta = 0 are
    representable; operations that genuinely divide by them raise.
    """

    a: float
    b: float
    n: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b) and math.isfinite(self.n)):
            raise InfeasibleParamsError("parameters must be finite")
        if self.a <= 0 or self.b <= 0:
            raise InfeasibleParamsError(f"set sizes must be positive, got a={self.a}, b={self.b}")
        if self.n < 0 or self.n > min(self.a, self.b):
            raise InfeasibleParamsError(
                f"need 0 <= n <= min(a, b), got n={self.n}, a={self.a}, b={self.b}"
            )

    @property
    def u(self) -> float:
        return self.a + self.b - self.n

    @property
    def alpha(self) -> float:
        return self.a - self.n

    @property
    def beta(self) -> float:
        return self.b - self.n

    @property
    def rho(self) -> float:
        return self.n / self.u


# Point estimators -----------------------------------------------------------


def jaccard_estimate(sa: MaxSketch, sb: MaxSketch) -> float:
    """Fraction of slots where the raw maxima agree, in [0, 1]."""
    stats = indicator_stats(sa, sb)
    return stats.k1 / stats.m


def scheme1(a_hat: float, b_hat: float, u_hat: float) -> float:
    """Inclusion-exclusion: a + b - u.  May be negative under noise."""
    if a_hat < 0 or b_hat < 0 or u_hat < 0:
        raise ValueError("cardinality estimates must be >= 0")
    return a_hat + b_hat - u_hat


def scheme2(rho_hat: float, u_hat: float) -> float:
    """Jaccard times union size."""
    if not 0.0 <= rho_hat <= 1.0:
        raise ValueError(f"rho_hat must be in [0, 1], got {rho_hat}")
    if u_hat < 0:
        raise ValueError("u_hat must be >= 0")
    return rho_hat * u_hat


def scheme3(rho_hat: float, a_hat: float, b_hat: float) -> float:
    """rho / (1 + rho) times (a + b); zero when rho_hat is zero."""
    if not 0.0 <= rho_hat <= 1.0:
        raise ValueError(f"rho_hat must be in [0, 1], got {rho_hat}")
    if a_hat < 0 or b_hat < 0:
        raise ValueError("cardinality estimates must be >= 0")
    if rho_hat == 0.0:
        return 0.0
    return rho_hat / (rho_hat + 1.0) * (a_hat + b_hat)


# Likelihood, gradient, Hessian ----------------------------------------------


def _require_feasible(a: float, b: float, n: float, stats: IndicatorStats) -> None:
    if a <= 0 or b <= 0:
        raise InfeasibleParamsError(f"set sizes must be positive, got a={a}, b={b}")
    if stats.k1 > 0 and n <= 0:
        raise InfeasibleParamsError(f"k1={stats.k1} slots require n > 0, got n={n}")
    if stats.k2 > 0 and b - n <= 0:
        raise InfeasibleParamsError(f"k2={stats.k2} slots require b - n > 0, got {b - n}")
    if stats.k3 > 0 and a - n <= 0:
        raise InfeasibleParamsError(f"k3={stats.k3} slots require a - n > 0, got {a - n}")


def _loglik(a: float, b: float, n: float, stats: IndicatorStats) -> float:
    _require_feasible(a, b, n, stats)
    u = a + b - n
    alpha = a - n
    beta = b - n
    ll = (u - 1.0) * stats.s1s
    ll += (beta - 1.0) * stats.s2t + (a - 1.0) * stats.s2s
    ll += (alpha - 1.0) * stats.s3s + (b - 1.0) * stats.s3t
    if stats.k1:
        ll += stats.k1 * math.log(n)
    if stats.k2:
        ll += stats.k2 * (math.log(beta) + math.log(a))
    if stats.k3:
        ll += stats.k3 * (math.log(alpha) + math.log(b))
    return ll


def _grad(a: float, b: float, n: float, stats: IndicatorStats) -> np.ndarray:
    _require_feasible(a, b, n, stats)
    alpha = a - n
    beta = b - n
    ga = stats.s1s + stats.s2s + stats.s3s
    gb = stats.s1s + stats.s2t + stats.s3t
    gn = -stats.s1s - stats.s2t - stats.s3s
    if stats.k1:
        gn += stats.k1 / n
    if stats.k2:
        ga += stats.k2 / a
        gb += stats.k2 / beta
        gn -= stats.k2 / beta
    if stats.k3:
        ga += stats.k3 / alpha
        gb += stats.k3 / b
        gn -= stats.k3 / alpha
    return np.array([ga, gb, gn])


def _hess(a: float, b: float, n: float, stats: IndicatorStats) -> np.ndarray:
    _require_feasible(a, b, n, stats)
    alpha = a - n
    beta = b - n
    h_aa = h_bb = h_nn = h_an = h_bn = 0.0
    if stats.k1:
        h_nn -= stats.k1 / n**2
    if stats.k2:
        h_aa -= stats.k2 / a**2
        h_bb -= stats.k2 / beta**2
        h_bn += stats.k2 / beta**2
        h_nn -= stats.k2 / beta**2
    if stats.k3:
        h_aa -= stats.k3 / alpha**2
        h_an += stats.k3 / alpha**2
        h_bb -= stats.k3 / b**2
        h_nn -= stats.k3 / alpha**2
    return np.array([[h_aa, 0.0, h_an], [0.0, h_bb, h_bn], [h_an, h_bn, h_nn]])


def log_likelihood(theta: ProblemParams, stats: IndicatorStats) -> float:
    """Log density of the observed slot statistics at theta."""
    return _loglik(theta.a, theta.b, theta.n, stats)


def gradient(theta: ProblemParams, stats: IndicatorStats) -> np.ndarray:
    """Analytic partials of the log likelihood w.r.t. (a, b, n)."""
    return _grad(theta.a, theta.b, theta.n, stats)


def hessian(theta: ProblemParams, stats: IndicatorStats) -> np.ndarray:
    """Analytic symmetric 3x3 second-derivative matrix w.r.t. (a, b, n)."""
    return _hess(theta.a, theta.b, theta.n, stats)


# Maximum-likelihood solver ---------------------------------------------------


@dataclass(frozen=True)
class MlConfig:
    """Newton-Raphson settings for the maximum-likelihood estimator."""

    max_iterations: int = 3
    rel_tolerance: float = 1e-9
    clamp_floor_fraction: float = 1e-6
    initializer: str = "maxsketch"  # "maxsketch" | "hll"

    def __post_init__(self) -> None:
        if not 1 <= self.max_iterations <= 10:
            raise ValueError(f"max_iterations must be in [1, 10], got {self.max_iterations}")
        if self.rel_tolerance <= 0 or self.clamp_floor_fraction <= 0:
            raise ValueError("tolerances must be positive")
        if self.initializer not in ("maxsketch", "hll"):
            raise ValueError(f"unknown initializer {self.initializer!r}")


@dataclass(frozen=True)
class MlReport:
    """Result of the maximum-likelihood estimator.

    ``fallback`` is None for a regular Newton solve, or one of
    ``no_equal`` (no matching slots: n_hat = 0), ``all_equal`` (every slot
    matches: the sets are indistinguishable from identical) and
    ``singular_hessian`` (Newton system unsolvable: initial point returned).
    ``initial`` records the (a0, b0, n0) start.
    """

    n_hat: float
    a_hat: float
    b_hat: float
    iterations: int
    converged: bool
    log_likelihood: float
    fallback: Optional[str]
    initial: tuple[float, float, float]

    def __post_init__(self) -> None:
        if not 0.0 <= self.n_hat <= min(self.a_hat, self.b_hat) * (1 + 1e-12):
            raise ValueError(
                f"need 0 <= n_hat <= min(a_hat, b_hat): {self.n_hat}, "
                f"{self.a_hat}, {self.b_hat}"
            )
        if self.fallback == "no_equal" and self.n_hat != 0.0:
            raise ValueError("no_equal fallback must report n_hat = 0")


_N_CAP = 1.0 - 1e-9
_LL_SLACK = 1e-9  # accepted steps may lower the log likelihood by at most this
_MAX_HALVINGS = 8


def ml_solve_from_stats(
    stats: IndicatorStats,
    a0: float,
    b0: float,
    u0: float,
    config: MlConfig | None = None,
) -> MlReport:
    """Newton-Raphson ML solve from slot statistics and initial cardinalities.

    ``a0``/``b0``/``u0`` come from any single-set cardinality estimator; the
    intersection start is ``n0 = (k1 / m) * u0``.  Steps are clamped so that
    n, alpha and beta stay above ``clamp_floor_fraction * u0`` and n stays
    below min(a, b); a step that lowers the log likelihood is halved up to
    8 times before the iteration stops.
    """
    config = config or MlConfig()
    m = stats.m
    rho = stats.k1 / m

    if stats.k1 == 0:
        ll = _loglik(a0, b0, 0.0, stats)
        return MlReport(
            n_hat=0.0, a_hat=a0, b_hat=b0, iterations=0, converged=True,
            log_likelihood=ll, fallback="no_equal", initial=(a0, b0, 0.0),
        )

    if stats.k2 == 0 and stats.k3 == 0:
        # Slot-for-slot identical sketches: the likelihood peaks on the ridge
        # a = b = n, so report the caller's single-set cardinality start.
        return MlReport(
            n_hat=a0, a_hat=a0, b_hat=a0, iterations=0, converged=True,
            log_likelihood=_loglik(a0, a0, a0, stats), fallback="all_equal",
            initial=(a0, a0, a0),
        )

    floor = config.clamp_floor_fraction * u0

    def clamp(theta: np.ndarray) -> np.ndarray:
        a, b, n = theta
        n = max(n, floor)
        a = max(a, n + floor)
        b = max(b, n + floor)
        n = min(n, min(a, b) * _N_CAP)
        return np.array([a, b, n])

    n0 = rho * u0
    theta = clamp(np.array([a0, b0, n0]))
    initial = (float(theta[0]), float(theta[1]), float(theta[2]))
    ll = _loglik(*theta, stats)

    iterations = 0
    last_change = math.inf
    singular = False
    for _ in range(config.max_iterations):
        g = _grad(*theta, stats)
        h = _hess(*theta, stats)
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            singular = True
            break
        if not np.all(np.isfinite(step)):
            singular = True
            break
        accepted = False
        lam = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            cand = clamp(theta - lam * step)
            ll_cand = _loglik(*cand, stats)
            if ll_cand >= ll - _LL_SLACK:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break
        last_change = float(np.max(np.abs(cand - theta) / np.maximum(np.abs(theta), 1e-300)))
        theta = cand
        ll = ll_cand
        iterations += 1
        if last_change < config.rel_tolerance:
            break

    if singular:
        return MlReport(
            n_hat=initial[2], a_hat=initial[0], b_hat=initial[1],
            iterations=iterations, converged=False,
            log_likelihood=_loglik(initial[0], initial[1], initial[2], stats),
            fallback="singular_hessian", initial=initial,
        )

    return MlReport(
        n_hat=float(theta[2]), a_hat=float(theta[0]), b_hat=float(theta[1]),
        iterations=iterations, converged=last_change < 1e-6,
        log_likelihood=ll, fallback=None, initial=initial,
    )


def ml_estimate(
    sa: MaxSketch,
    sb: MaxSketch,
    config: MlConfig | None = None,
    hll_a: HllSketch | None = None,
    hll_b: HllSketch | None = None,
) -> MlReport:
    """Maximum-likelihood intersection estimate for a max-sketch pair.

    The default initializer reuses the max-sketches themselves for the
    starting cardinalities; ``config.initializer = "hll"`` instead takes them
    from a companion HyperLogLog pair (must be supplied and mutually
    compatible), trading extra storage for the conventional pipeline.
    """
    config = config or MlConfig()
    stats = indicator_stats(sa, sb)

    if stats.k2 == 0 and stats.k3 == 0:
        # Sketches are slot-for-slot identical: the data cannot distinguish
        # the sets, and the likelihood peaks on the ridge a = b = n.
        c = maxsketch_cardinality(sa).value
        return MlReport(
            n_hat=c, a_hat=c, b_hat=c, iterations=0, converged=True,
            log_likelihood=_loglik(c, c, c, stats), fallback="all_equal",
            initial=(c, c, c),
        )

    if config.initializer == "hll":
        if hll_a is None or hll_b is None:
            raise ValueError("hll initializer requires companion hll_a and hll_b sketches")
        if hll_a.family != hll_b.family:
            raise IncompatibleSketchError("companion HLL sketches have different families")
        a0 = hll_estimate(hll_a).value
        b0 = hll_estimate(hll_b).value
        u0 = hll_estimate(hll_a.merge(hll_b)).value
    else:
        a0 = maxsketch_cardinality(sa).value
        b0 = maxsketch_cardinality(sb).value
        u0 = maxsketch_cardinality(sa.merge(sb)).value

    return ml_solve_from_stats(stats, a0, b0, u0, config)
