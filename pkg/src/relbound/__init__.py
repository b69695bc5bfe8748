"""relbound: lower confidence limits for coherent-system reliability.

Computes LCLs for system reliability from component-level lifetime data,
centered on a double bootstrap percentile whose resamples are generated by a
distribution transform instead of dataset resampling, alongside delta,
bootstrap-percentile, basic-bootstrap and conventional double-bootstrap
baselines, with a Monte Carlo harness for coverage studies.
"""

from .bootstrap import LclResult, bb_lcl, bp_lcl, dbp_lcl_oracle, dbpt_lcl
from .censoring import CensoredDataset, censored_loglik, censoring_count, impute, type2_censor
from .distributions import (
    EXPONENTIAL,
    LOGNORMAL,
    WEIBULL,
    ComponentModel,
    Exponential,
    Generic,
    LifetimeFamily,
    LogNormal,
    Weibull,
    component_reliability,
    family_from_name,
    population_moments,
    sample_lifetimes,
    standardized_cdf,
    standardized_quantile,
    time_at_reliability,
)
from .errors import (
    BoundaryError,
    ConfigError,
    DegenerateSampleError,
    EstimationError,
    RelboundError,
    StructureError,
    StructureParseError,
)
from .estimators import (
    MleEstimate,
    MomentEstimate,
    delta_lcl,
    fisher_information,
    mle_fit,
    moment_estimate,
    moment_reliability,
    observed_information,
)
from .resampling import AuxStat, gen_aux, gen_aux_batch, transform_reliability
from .simulation import (
    CoverageReport,
    MethodCell,
    StudyConfig,
    compute_lcl,
    default_t_grid,
    detect_bend_back,
    falling_outside_count,
    lcl_curve,
    lcl_quantile,
    run_coverage_study,
    runtime_scaling_probe,
    solve_identical_components,
)
from .structures import (
    ComponentRef,
    KOutOfN,
    Parallel,
    Series,
    StructureNode,
    component_counts,
    eval_reliability,
    eval_reliability_bruteforce,
    num_components,
    parse_structure,
    structure_partials,
)

__version__ = "0.1.0"
