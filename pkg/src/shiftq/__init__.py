"""Worst-case threshold-quality estimation of location parameters.

The library asks, for an estimator e and noise law mu: over every possible
true shift theta, what is the worst-case probability that e lands within
delta of theta? It provides optimal estimator constructions for several
families, matching upper bounds (window and packing ceilings), an averaging
construction on the circle, and an exact rational counterexample on the
trivalent tree where no estimator is uniformly best.
"""

from .bounds import (
    BoundReport,
    SumsetAverageBound,
    coefficient_sumset,
    packing_bound_discrete,
    packing_bound_halfline,
    sumset_average_bound,
    window_bound_log_concave,
    window_bound_one_sample,
)
from .compact_circle import (
    CircleAveragingReport,
    CircleDensity,
    CircleEstimator,
    averaging_check,
    biased_mean_circle_estimator,
    circle_distance,
    circle_quality_at,
    constant_circle_estimator,
    invariant_from_coset,
    uniform_circle_density,
    warped_circle_estimator,
    wrap,
)
from .config import (
    ConfigError,
    EstimatorSpec,
    ExperimentConfig,
    OutputSpec,
    parse_config,
    serialize_config,
)
from .distributions import (
    Distribution,
    Exponential,
    FamilyTraits,
    FiniteAtoms,
    Gaussian,
    PiecewiseDensity,
    ShiftedDistribution,
    Uniform,
    classify,
    sample,
)
from .estimators import (
    Estimator,
    RandomizedEstimator,
    constant_estimator,
    discrete_n_sample_estimator,
    discrete_one_sample_estimator,
    invariant_extension,
    mean_estimator,
    min_shift_estimator,
    mixture,
    window_mle_estimator,
)
from .group_tree import (
    TreeDistribution,
    TreeEstimator,
    ball,
    distance,
    exact_quality_tree,
    inverse,
    left_translate_estimator,
    multiply,
    quality_inf_ball,
    reduce_word,
    right_translate_estimator,
    standard_tree_distribution,
    table_estimator,
    truncation_estimator,
)
from .quality import (
    AveragedPerformance,
    MCConfig,
    QualityReport,
    ThetaQuality,
    averaged_performance_bound,
    default_theta_grid,
    exact_quality_discrete,
    quality_at,
    quality_inf,
    wilson_halfwidth,
)
from .util import EnumerationLimitError, parse_number, within_threshold

__version__ = "0.1.0"

__all__ = [
    "AveragedPerformance",
    "BoundReport",
    "CircleAveragingReport",
    "CircleDensity",
    "CircleEstimator",
    "ConfigError",
    "Distribution",
    "EnumerationLimitError",
    "Estimator",
    "EstimatorSpec",
    "ExperimentConfig",
    "Exponential",
    "FamilyTraits",
    "FiniteAtoms",
    "Gaussian",
    "MCConfig",
    "OutputSpec",
    "PiecewiseDensity",
    "QualityReport",
    "RandomizedEstimator",
    "ShiftedDistribution",
    "SumsetAverageBound",
    "ThetaQuality",
    "TreeDistribution",
    "TreeEstimator",
    "Uniform",
    "averaged_performance_bound",
    "averaging_check",
    "ball",
    "biased_mean_circle_estimator",
    "circle_distance",
    "circle_quality_at",
    "classify",
    "coefficient_sumset",
    "constant_circle_estimator",
    "constant_estimator",
    "default_theta_grid",
    "discrete_n_sample_estimator",
    "discrete_one_sample_estimator",
    "distance",
    "exact_quality_discrete",
    "exact_quality_tree",
    "invariant_extension",
    "invariant_from_coset",
    "inverse",
    "left_translate_estimator",
    "mean_estimator",
    "min_shift_estimator",
    "mixture",
    "multiply",
    "packing_bound_discrete",
    "packing_bound_halfline",
    "parse_config",
    "parse_number",
    "quality_at",
    "quality_inf",
    "quality_inf_ball",
    "reduce_word",
    "right_translate_estimator",
    "sample",
    "serialize_config",
    "standard_tree_distribution",
    "sumset_average_bound",
    "table_estimator",
    "truncation_estimator",
    "uniform_circle_density",
    "warped_circle_estimator",
    "wilson_halfwidth",
    "window_bound_log_concave",
    "window_bound_one_sample",
    "window_mle_estimator",
    "within_threshold",
    "wrap",
]
