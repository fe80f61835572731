"""Sketch-based estimation of set-intersection cardinality.

Build small fixed-size sketches of two large element streams, then estimate
|A intersect B| four ways (inclusion-exclusion, two Jaccard plug-ins and a
maximum-likelihood solve), with the matching closed-form variance theory and
a Monte-Carlo lab that checks the two against each other.
"""

from .hashkit import HashFamily, fnv1a64, hash64, mix64, to_unit, to_unit_array
from .sketchkit import (
    EmptySketchError,
    HllSketch,
    IncompatibleSketchError,
    IndicatorStats,
    MaxSketch,
    SketchError,
    hll_merge,
    hll_update,
    indicator_stats,
    indicator_stats_from_maxima,
    load_sketch,
    max_merge,
    max_update,
    save_sketch,
)
from .cardest import CardinalityEstimate, alpha_m, hll_estimate, maxsketch_cardinality
from .intersect import (
    InfeasibleParamsError,
    MlConfig,
    MlReport,
    ProblemParams,
    gradient,
    hessian,
    jaccard_estimate,
    log_likelihood,
    ml_estimate,
    ml_solve_from_stats,
    scheme1,
    scheme2,
    scheme3,
)
from .theory import (
    SingularParamsError,
    TheoryReport,
    beta_max_moments,
    cov_ab,
    cov_an,
    cov_au,
    cov_bu,
    cramer_rao_n,
    fisher_matrix,
    theory_report,
    var_scheme1_norm,
    var_scheme2_norm,
    var_scheme3_norm,
    z_value,
)
from .simlab import (
    CSV_HEADER,
    InfeasibleInstanceError,
    SweepConfig,
    SweepResult,
    generate_instance,
    paper_scale_config,
    run_sweep,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "CardinalityEstimate",
    "EmptySketchError",
    "HashFamily",
    "HllSketch",
    "IncompatibleSketchError",
    "IndicatorStats",
    "InfeasibleInstanceError",
    "InfeasibleParamsError",
    "MaxSketch",
    "MlConfig",
    "MlReport",
    "ProblemParams",
    "SingularParamsError",
    "SketchError",
    "SweepConfig",
    "SweepResult",
    "TheoryReport",
    "alpha_m",
    "beta_max_moments",
    "cov_ab",
    "cov_an",
    "cov_au",
    "cov_bu",
    "cramer_rao_n",
    "fisher_matrix",
    "fnv1a64",
    "generate_instance",
    "gradient",
    "hash64",
    "hessian",
    "hll_estimate",
    "hll_merge",
    "hll_update",
    "indicator_stats",
    "indicator_stats_from_maxima",
    "jaccard_estimate",
    "load_sketch",
    "log_likelihood",
    "max_merge",
    "max_update",
    "maxsketch_cardinality",
    "mix64",
    "ml_estimate",
    "ml_solve_from_stats",
    "paper_scale_config",
    "run_sweep",
    "save_sketch",
    "scheme1",
    "scheme2",
    "scheme3",
    "theory_report",
    "to_unit",
    "to_unit_array",
    "var_scheme1_norm",
    "var_scheme2_norm",
    "var_scheme3_norm",
    "write_csv",
    "z_value",
]
