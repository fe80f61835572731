"""Monte-Carlo experiment engine for the intersection estimators.

A sweep draws synthetic set pairs on an (f, alpha, m) grid:

    |A| = a,  |B| = round(f * a),  |A intersect B| = round(alpha * a)

builds the sketches for every trial through the real hashing pipeline,
runs the requested estimators and aggregates bias and variance per grid
point, next to the closed-form predictions from :mod:`intersketch.theory`.

Reproducibility: every trial hashes a disjoint block of decimal tokens
(ids offset by trial * |A union B|) under a sketch seed derived by a
counter-based mix of (seed, f index, alpha index, m index, trial).  All
per-trial reductions are exact integer maxima and the per-point aggregation
runs in trial order, so a config maps to one byte-exact CSV no matter how
many threads the kernels use.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .cardest import alpha_m, cardinality_from_unit_maxima
from .hashkit import GOLDEN, MASK64, HashFamily, mix64, to_unit_array
from .intersect import MlConfig, ml_solve_from_stats
from .sketchkit import indicator_stats_from_maxima
from .theory import ProblemParams, cramer_rao_n, var_scheme1_norm, var_scheme2_norm, var_scheme3_norm

ALL_SCHEMES = ("ml", "s1", "s2", "s3")

CSV_HEADER = (
    "scheme,f,alpha,m,trials,true_n,mean_est,bias_norm,var_norm,"
    "theory_var_norm,cr_var_norm,improvement_of_ml,fallback_count,seed"
)

# Salt separating the HLL hash family from the max-sketch family of a trial.
_HLL_SALT = 0xA5A5A5A5A5A5A5A5


class InfeasibleInstanceError(ValueError):
    """Requested overlap exceeds the requested |B|."""


def _default_alphas() -> tuple[float, ...]:
    return tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class SweepConfig:
    """Grid and budget of one Monte-Carlo sweep."""

    a: int = 10_000
    f_values: tuple[float, ...] = (1.0, 5.0, 10.0)
    alpha_values: tuple[float, ...] = _default_alphas()
    m_values: tuple[int, ...] = (256, 1024)
    trials: int = 2000
    seed: int = 1
    schemes: tuple[str, ...] = ALL_SCHEMES
    init: str = "maxsketch"  # ML initializer: "maxsketch" | "hll"
    cardinalities: str = "hll"  # cardinality source for s1/s2/s3: "hll" | "maxsketch"

    def __post_init__(self) -> None:
        if self.a < 10:
            raise ValueError(f"base cardinality must be >= 10, got {self.a}")
        if self.trials < 2:
            raise ValueError(f"need at least 2 trials, got {self.trials}")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned value")
        if not self.f_values or any(f <= 0 for f in self.f_values):
            raise ValueError("every f must be > 0")
        if not self.alpha_values or any(not 0.0 <= al <= 1.0 for al in self.alpha_values):
            raise ValueError("every alpha must be in [0, 1]")
        if not self.m_values or any(m < 1 for m in self.m_values):
            raise ValueError("every m must be >= 1")
        bad = set(self.schemes) - set(ALL_SCHEMES)
        if bad or not self.schemes:
            raise ValueError(f"schemes must be a non-empty subset of {ALL_SCHEMES}, got {self.schemes}")
        if self.init not in ("maxsketch", "hll"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.cardinalities not in ("maxsketch", "hll"):
            raise ValueError(f"unknown cardinalities {self.cardinalities!r}")
        if self._needs_hll():
            for m in self.m_values:
                if m < 4 or m & (m - 1) != 0:
                    raise ValueError(
                        f"HLL cardinalities need power-of-two m >= 4, got m={m}; "
                        "use cardinalities='maxsketch' for arbitrary m"
                    )

    def _needs_hll(self) -> bool:
        uses_plugins = any(s in self.schemes for s in ("s1", "s2", "s3"))
        uses_ml = "ml" in self.schemes
        return (uses_plugins and self.cardinalities == "hll") or (uses_ml and self.init == "hll")


@dataclass(frozen=True)
class SweepResult:
    """Aggregates of one (scheme, f, alpha, m) grid point.

    Normalized fields are None when the true intersection is empty.
    ``improvement_of_ml`` is (var_scheme - var_ml)/var_scheme, None on the
    ml row itself.
    """

    scheme: str
    f: float
    alpha: float
    m: int
    trials: int
    true_n: int
    mean_est: float
    bias_norm: Optional[float]
    var_norm: Optional[float]
    theory_var_norm: Optional[float]
    cr_var_norm: Optional[float]
    improvement_of_ml: Optional[float]
    fallback_count: int
    seed: int


def generate_instance(
    a: int, f: float, alpha: float, offset: int = 0
) -> tuple[np.ndarray, np.ndarray, int]:
    """Synthetic set pair with |A| = a, |B| = round(f a), overlap round(alpha a).

    Returns (A ids, B ids, n).  A is the contiguous block [offset, offset+a);
    B reuses the first n ids and continues after A, so A union B is the
    contiguous block [offset, offset + a + |B| - n).  Ids are hashed as
    decimal token strings; a per-trial offset makes hash inputs disjoint
    across trials.
    """
    if a < 1 or f <= 0 or not 0.0 <= alpha <= 1.0:
        raise ValueError(f"bad instance shape: a={a}, f={f}, alpha={alpha}")
    n = int(round(alpha * a))
    b_size = int(round(f * a))
    if b_size < n:
        raise InfeasibleInstanceError(
            f"|B| = round(f*a) = {b_size} is smaller than the overlap n = {n}"
        )
    ids_a = np.arange(offset, offset + a, dtype=np.uint64)
    ids_b = np.concatenate(
        [
            np.arange(offset, offset + n, dtype=np.uint64),
            np.arange(offset + a, offset + a + b_size - n, dtype=np.uint64),
        ]
    )
    return ids_a, ids_b, n


def _trial_seed(seed: int, f_idx: int, a_idx: int, m_idx: int, trial: int) -> int:
    s = mix64((seed + GOLDEN) & MASK64)
    for x in (f_idx, a_idx, m_idx, trial):
        s = mix64(s ^ x)
    return s


def _hll_value(registers: np.ndarray, m: int) -> float:
    z = 1.0 / float(np.exp2(-registers.astype(np.float64)).sum())
    raw = alpha_m(m) * m * m * z
    zeros = int((registers == 0).sum())
    if raw <= 2.5 * m and zeros > 0:
        return m * np.log(m / zeros)
    return raw


def bias_and_variance(
    values: np.ndarray, true_n: float
) -> tuple[float, Optional[float], Optional[float], float]:
    """Aggregate one estimate vector: mean, |mean/n - 1|, Var(est/n), Var(est).

    Variance uses the population divisor (len(values), not len - 1).  The
    normalized fields are None when the true intersection is empty.
    """
    values = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(values))
    var_abs = float(np.mean((values - mean) ** 2))
    if true_n == 0:
        return mean, None, None, var_abs
    return mean, abs(mean / true_n - 1.0), var_abs / true_n**2, var_abs


def _theory_norm(scheme: str, params: ProblemParams, m: int) -> float:
    if scheme == "s1":
        return var_scheme1_norm(params, m)
    if scheme == "s2":
        return var_scheme2_norm(params, m)
    if scheme == "s3":
        return var_scheme3_norm(params, m)
    return cramer_rao_n(params, m) / params.n**2


def run_sweep(config: SweepConfig, progress: bool = False) -> list[SweepResult]:
    """Run the full grid; deterministic for a fixed config.

    ML fallbacks never abort a sweep: the fallback estimate enters the
    aggregates and the per-point fallback counter.
    """
    ml_config = MlConfig(initializer=config.init)
    results: list[SweepResult] = []
    grid = [
        (fi, f, ai, al, mi, m)
        for fi, f in enumerate(config.f_values)
        for ai, al in enumerate(config.alpha_values)
        for mi, m in enumerate(config.m_values)
    ]
    t_start = time.monotonic()
    for point_idx, (fi, f, ai, al, mi, m) in enumerate(grid):
        n_true = int(round(al * config.a))
        b_size = int(round(f * config.a))
        if b_size < n_true:
            raise InfeasibleInstanceError(
                f"|B| = {b_size} below overlap n = {n_true} at f={f}, alpha={al}"
            )
        u_size = config.a + b_size - n_true
        p = m.bit_length() - 1
        want_plugin = [s for s in ("s1", "s2", "s3") if s in config.schemes]
        want_ml = "ml" in config.schemes
        need_hll = (want_plugin and config.cardinalities == "hll") or (
            want_ml and config.init == "hll"
        )

        estimates = {s: np.empty(config.trials) for s in config.schemes}
        fallback_count = 0
        for t in range(config.trials):
            tseed = _trial_seed(config.seed, fi, ai, mi, t)
            offset = t * u_size
            digests = _kernels.decimal_fnv_digests(np.uint64(offset), u_size)
            subkeys = HashFamily(tseed, m).subkeys()
            seg = _kernels.keyed_segment_maxima(digests, subkeys, n_true, config.a)
            max_a = np.maximum(seg[:, 0], seg[:, 1])
            max_b = np.maximum(seg[:, 0], seg[:, 2])
            stats = indicator_stats_from_maxima(max_a, max_b)
            rho = stats.k1 / m

            if need_hll:
                hll_seed = np.uint64(HashFamily(mix64(tseed ^ _HLL_SALT), m).subkey(0))
                regs = _kernels.hll_segment_registers(digests, hll_seed, p, n_true, config.a)
                regs_a = np.maximum(regs[0], regs[1])
                regs_b = np.maximum(regs[0], regs[2])
                regs_u = np.maximum(regs_a, regs[2])
                hll_a = _hll_value(regs_a, m)
                hll_b = _hll_value(regs_b, m)
                hll_u = _hll_value(regs_u, m)

            if want_plugin or (want_ml and config.init == "maxsketch"):
                ms_a = cardinality_from_unit_maxima(to_unit_array(max_a))
                ms_b = cardinality_from_unit_maxima(to_unit_array(max_b))
                ms_u = cardinality_from_unit_maxima(
                    to_unit_array(np.maximum(max_a, seg[:, 2]))
                )

            if want_plugin:
                if config.cardinalities == "hll":
                    ca, cb, cu = hll_a, hll_b, hll_u
                else:
                    ca, cb, cu = ms_a, ms_b, ms_u
                if "s1" in estimates:
                    estimates["s1"][t] = ca + cb - cu
                if "s2" in estimates:
                    estimates["s2"][t] = rho * cu
                if "s3" in estimates:
                    estimates["s3"][t] = rho / (rho + 1.0) * (ca + cb) if rho else 0.0
            if want_ml:
                if config.init == "hll":
                    report = ml_solve_from_stats(stats, hll_a, hll_b, hll_u, ml_config)
                else:
                    report = ml_solve_from_stats(stats, ms_a, ms_b, ms_u, ml_config)
                estimates["ml"][t] = report.n_hat
                if report.fallback is not None:
                    fallback_count += 1

        # Fixed-order aggregation keeps the CSV byte-stable.
        aggregates = {s: bias_and_variance(estimates[s], n_true) for s in config.schemes}
        params = ProblemParams(a=float(config.a), b=float(b_size), n=float(n_true)) if n_true else None
        for scheme in config.schemes:
            mean, bias_norm, var_norm, var_abs = aggregates[scheme]
            theory = _theory_norm(scheme, params, m) if params else None
            cr = cramer_rao_n(params, m) / n_true**2 if params else None
            improvement = None
            if scheme != "ml" and "ml" in config.schemes and var_abs > 0:
                improvement = (var_abs - aggregates["ml"][3]) / var_abs
            results.append(
                SweepResult(
                    scheme=scheme,
                    f=f,
                    alpha=al,
                    m=m,
                    trials=config.trials,
                    true_n=n_true,
                    mean_est=mean,
                    bias_norm=bias_norm,
                    var_norm=var_norm,
                    theory_var_norm=theory,
                    cr_var_norm=cr,
                    improvement_of_ml=improvement,
                    fallback_count=fallback_count if scheme == "ml" else 0,
                    seed=config.seed,
                )
            )
        if progress:
            elapsed = time.monotonic() - t_start
            print(
                f"[simlab] {point_idx + 1}/{len(grid)} f={f:g} alpha={al:g} m={m} "
                f"({config.trials} trials, {elapsed:.1f}s elapsed)",
                file=sys.stderr,
                flush=True,
            )
    results.sort(key=lambda r: (r.f, r.alpha, r.m, r.scheme))
    return results


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def write_csv(results: Sequence[SweepResult], path) -> None:
    """Write results in the fixed schema, sorted by (f, alpha, m, scheme)."""
    if not results:
        raise ValueError("refusing to write an empty result set")
    rows = sorted(results, key=lambda r: (r.f, r.alpha, r.m, r.scheme))
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.scheme,
                    _fmt(r.f),
                    _fmt(r.alpha),
                    _fmt(r.m),
                    _fmt(r.trials),
                    _fmt(r.true_n),
                    _fmt(r.mean_est),
                    _fmt(r.bias_norm),
                    _fmt(r.var_norm),
                    _fmt(r.theory_var_norm),
                    _fmt(r.cr_var_norm),
                    _fmt(r.improvement_of_ml),
                    _fmt(r.fallback_count),
                    _fmt(r.seed),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def paper_scale_config(seed: int = 1, **overrides) -> SweepConfig:
    """The full-scale protocol: a = 1e6, 10k trials, alpha step 0.01.

    The published register counts are not powers of two, so the plug-in
    schemes take their cardinalities from the max-sketches here unless a
    caller overrides that.
    """
    base = SweepConfig(
        a=1_000_000,
        f_values=(1.0, 5.0, 10.0),
        alpha_values=tuple(round(0.01 * i, 2) for i in range(0, 101)),
        m_values=(100, 500, 1000, 10000),
        trials=10_000,
        seed=seed,
        cardinalities="maxsketch",
    )
    return replace(base, **overrides)
