"""Closed-form bias/variance predictions for the intersection estimators.

Everything here is a deterministic function of the parameter point
(a, b, n) and the sketch size m:

* the Fisher information matrix of the sketch-pair likelihood and the
  Cramer-Rao floor on Var(n_hat) implied by its inverse,
* normalized variances (Var(n_hat / n)) of the three plug-in estimators,
* covariances between the single-set cardinality estimators that those
  variances are built from,
* moments of the maximum of n uniform variables (the building block behind
  the max-sketch estimator).

These formulas are the oracle layer for the Monte-Carlo suite: simulation
results are accepted only if they land on these predictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .intersect import ProblemParams


class SingularParamsError(ValueError):
    """The requested formula divides by a vanishing parameter."""


def _require_interior_n(params: ProblemParams) -> None:
    if params.n <= 0:
        raise SingularParamsError("formula undefined at n = 0")


def fisher_matrix(params: ProblemParams, m: int) -> np.ndarray:
    """Fisher information of the sketch-pair likelihood, a 3x3 matrix.

    Entries divide by n, alpha and beta, so all three must be positive.
    Equals minus the expected Hessian of the log likelihood.
    """
    a, b, n = params.a, params.b, params.n
    u, alpha, beta = params.u, params.alpha, params.beta
    if n <= 0 or alpha <= 0 or beta <= 0:
        raise SingularParamsError(
            f"Fisher matrix needs n, alpha, beta > 0, got n={n}, alpha={alpha}, beta={beta}"
        )
    f11 = beta / (u * a**2) + 1.0 / (u * alpha)
    f22 = alpha / (u * b**2) + 1.0 / (u * beta)
    f33 = 1.0 / (u * n) + 1.0 / (u * beta) + 1.0 / (u * alpha)
    f13 = -1.0 / (u * alpha)
    f23 = -1.0 / (u * beta)
    return m * np.array([[f11, 0.0, f13], [0.0, f22, f23], [f13, f23, f33]])


def _z_value(params: ProblemParams) -> float:
    a, b, n = params.a, params.b, params.n
    alpha, beta = params.alpha, params.beta
    qa = a**2 + alpha * beta
    qb = b**2 + alpha * beta
    return alpha * n * qa + beta * n * qb + qa * qb


def z_value(params: ProblemParams) -> float:
    """Common denominator of the Cramer-Rao bound and covariance formulas."""
    return _z_value(params)


def cramer_rao_n(params: ProblemParams, m: int) -> float:
    """Minimal Var(n_hat) of any unbiased estimator on this sketch data.

    Closed form of entry [3,3] of the inverse Fisher matrix; continuous in
    alpha, beta down to 0 (identical-set limit n*u/m), undefined at n = 0.
    """
    _require_interior_n(params)
    a, b, n = params.a, params.b, params.n
    u, alpha, beta = params.u, params.alpha, params.beta
    qa = a**2 + alpha * beta
    qb = b**2 + alpha * beta
    return (n * u / m) * (qb * qa) / _z_value(params)


def var_scheme1_norm(params: ProblemParams, m: int) -> float:
    """Normalized variance of the inclusion-exclusion estimator."""
    _require_interior_n(params)
    a, b, n = params.a, params.b, params.n
    u, alpha, beta = params.u, params.alpha, params.beta
    qa = a**2 + alpha * beta
    qb = b**2 + alpha * beta
    z = _z_value(params)
    return (
        (u**2 - a**2 - b**2) / (m * n**2)
        - 2.0 * a * b / (m * u * n)
        + 2.0 * u * (a**2 * qb + b**2 * qa) / (m * z * n)
    )


def var_scheme2_norm(params: ProblemParams, m: int) -> float:
    """Normalized variance of the Jaccard-times-union estimator: 1/(m rho)."""
    _require_interior_n(params)
    return 1.0 / (m * params.rho)


def var_scheme3_norm(params: ProblemParams, m: int) -> float:
    """Normalized variance of the rho/(1+rho)*(a+b) estimator."""
    _require_interior_n(params)
    a, b, n = params.a, params.b, params.n
    u = params.u
    return (
        1.0
        + 2.0 * a * b / (u * (a + b))
        + (params.alpha + params.beta) * u**2 / (n * (a + b) ** 2)
    ) / m


def cov_ab(params: ProblemParams, m: int) -> float:
    """Covariance of the two single-set estimates: n*a*b/(m*u)."""
    return params.n * params.a * params.b / (m * params.u)


def cov_an(params: ProblemParams, m: int) -> float:
    """Covariance of the |A| estimate with the ML intersection estimate."""
    _require_interior_n(params)
    a, b = params.a, params.b
    qb = b**2 + params.alpha * params.beta
    return params.u * params.n * a**2 * qb / (m * _z_value(params))


def cov_au(params: ProblemParams, m: int) -> float:
    """Covariance of the |A| estimate with the union estimate."""
    _require_interior_n(params)
    return params.a**2 / m + cov_ab(params, m) - cov_an(params, m)


def cov_bu(params: ProblemParams, m: int) -> float:
    """Covariance of the |B| estimate with the union estimate (a <-> b)."""
    mirrored = ProblemParams(a=params.b, b=params.a, n=params.n)
    return params.b**2 / m + cov_ab(params, m) - cov_an(mirrored, m)


def beta_max_moments(n: int) -> tuple[float, float]:
    """Mean and variance of the maximum of n independent Uniform(0,1) draws.

    The maximum is Beta(n, 1)-distributed: mean n/(n+1), variance
    n/((n+1)^2 (n+2)).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return n / (n + 1.0), n / ((n + 1.0) ** 2 * (n + 2.0))


@dataclass(frozen=True)
class TheoryReport:
    """All closed-form predictions at one (params, m) point.

    ``fisher`` is None on the alpha = 0 / beta = 0 boundary, where the
    information matrix is singular; every other field is continuous there.
    Normalized fields divide by n**2.
    """

    params: ProblemParams
    m: int
    fisher: Optional[np.ndarray]
    cr_var_n: float
    cr_var_norm: float
    var_scheme1_norm: float
    var_scheme2_norm: float
    var_scheme3_norm: float
    cov_ab: float
    cov_au: float
    cov_bu: float
    cov_an: float
    z_value: float


def theory_report(params: ProblemParams, m: int) -> TheoryReport:
    """Evaluate every prediction at one parameter point.

    Requires n > 0 (every normalized quantity divides by n); tolerates the
    identical-set boundary by omitting the Fisher matrix.
    """
    _require_interior_n(params)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    fisher: Optional[np.ndarray]
    if params.alpha > 0 and params.beta > 0:
        fisher = fisher_matrix(params, m)
    else:
        fisher = None
    cr = cramer_rao_n(params, m)
    return TheoryReport(
        params=params,
        m=m,
        fisher=fisher,
        cr_var_n=cr,
        cr_var_norm=cr / params.n**2,
        var_scheme1_norm=var_scheme1_norm(params, m),
        var_scheme2_norm=var_scheme2_norm(params, m),
        var_scheme3_norm=var_scheme3_norm(params, m),
        cov_ab=cov_ab(params, m),
        cov_au=cov_au(params, m),
        cov_bu=cov_bu(params, m),
        cov_an=cov_an(params, m),
        z_value=z_value(params),
    )
