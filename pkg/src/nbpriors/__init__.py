"""Random discrete probability measures built on the negative binomial
process: Lévy-tail machinery, point-process samplers, measure
constructors, and a Kolmogorov-distance Monte Carlo harness.
"""

from .errors import (
    CapabilityError,
    DegenerateTruncationError,
    DomainError,
    NbpError,
    NumericError,
    ResourceLimitError,
)
from .experiments import (
    EquivalenceReport,
    ExperimentResult,
    ExperimentSpec,
    GrowthDiagnostic,
    WeightProfile,
    build_measure,
    clustering_growth,
    kolmogorov_distance,
    load_experiment_spec,
    load_ks_grid,
    parse_ks_table_result,
    rank_weight_equivalence_test,
    run_ks_experiment,
    run_ks_table,
    weight_profile,
)
from .levy_tails import (
    LevyTail,
    log_tail_inverse,
    log_tail_value,
    tail_inverse,
    tail_support_bound,
    tail_value,
)
from .point_processes import (
    ArrivalStream,
    NbpConfig,
    PointSeries,
    TruncationPolicy,
    gamma_arrivals,
    sample_nbp_points,
    sample_prm_points,
    write_points_csv,
)
from .random_measures import (
    BaseMeasure,
    DiscreteMeasure,
    ExtendedDpParams,
    PdpParams,
    distinct_count,
    draw_from_measure,
    sample_dp,
    sample_extended_dp_finite,
    sample_pdp_series,
    sample_pdp_stick_breaking,
    sample_pkp,
    sample_stable_normalized,
    uniform_base,
)
from .special_functions import (
    DEFAULT_PRECISION,
    Precision,
    exp_integral_e1,
    gamma_quantile_upper,
    gamma_quantile_upper_many,
    gamma_survival,
    log_gamma,
    upper_incomplete_gamma,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalStream",
    "BaseMeasure",
    "CapabilityError",
    "DEFAULT_PRECISION",
    "DegenerateTruncationError",
    "DiscreteMeasure",
    "DomainError",
    "EquivalenceReport",
    "ExperimentResult",
    "ExperimentSpec",
    "ExtendedDpParams",
    "GrowthDiagnostic",
    "LevyTail",
    "NbpConfig",
    "NbpError",
    "NumericError",
    "PdpParams",
    "PointSeries",
    "Precision",
    "ResourceLimitError",
    "TruncationPolicy",
    "WeightProfile",
    "build_measure",
    "clustering_growth",
    "distinct_count",
    "draw_from_measure",
    "exp_integral_e1",
    "gamma_arrivals",
    "gamma_quantile_upper",
    "gamma_quantile_upper_many",
    "gamma_survival",
    "kolmogorov_distance",
    "load_experiment_spec",
    "load_ks_grid",
    "log_gamma",
    "log_tail_inverse",
    "log_tail_value",
    "parse_ks_table_result",
    "rank_weight_equivalence_test",
    "run_ks_experiment",
    "run_ks_table",
    "sample_dp",
    "sample_extended_dp_finite",
    "sample_nbp_points",
    "sample_pdp_series",
    "sample_pdp_stick_breaking",
    "sample_pkp",
    "sample_prm_points",
    "sample_stable_normalized",
    "tail_inverse",
    "tail_support_bound",
    "tail_value",
    "uniform_base",
    "upper_incomplete_gamma",
    "weight_profile",
    "write_points_csv",
]
