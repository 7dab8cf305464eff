"""Repro-sample inference for high-dimensional logistic regression.

Builds model candidate sets from artificial noise draws, prunes them into
model confidence sets with a Monte-Carlo selector statistic, and inverts
likelihood-ratio tests over the candidates into confidence regions for any
linear combination of coefficients (single coefficients, the full vector,
and case probabilities of new observations).
"""

from .core import (
    CandidateSet,
    ColumnScale,
    Dataset,
    InferenceConfig,
    LinearTarget,
    SupportSet,
    ThetaPoint,
    ValidationError,
    default_max_support,
    destandardize_columns,
    standardize_columns,
    validate_dataset,
)
from .sampler import RngStream, draw_ar_gaussian, draw_logistic, synth_response
from .solvers import (
    DegenerateLabelsError,
    DegeneratePilotError,
    IncompatibleTargetError,
    JointFit,
    LassoPath,
    MleFit,
    fit_adaptive_joint,
    fit_ridge_joint,
    logistic_lasso_path,
    mle_logistic,
    mle_logistic_constrained,
    support_at_cardinality,
)
from .candidate import EbicConfig, build_candidate_set, ebic_score
from .model_confidence import (
    NuclearReport,
    model_confidence_set,
    model_selector_tilde_tau,
    nuclear_stat,
)
from .coef_inference import (
    CaseProbRegion,
    IntervalUnion,
    RegionHandle,
    chi2_quantile,
    ci_single_coef,
    lrt_stat,
    region_abeta,
    region_case_probs,
)
from .stats_util import SummaryTable, merge_intervals, numerical_rank
from .harness import (
    SCENARIOS,
    IngestResult,
    RunReport,
    Scenario,
    ingest_csv,
    report_tables,
    run_replication,
    run_scenario,
    summarize_records,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateSet", "ColumnScale", "Dataset", "InferenceConfig", "LinearTarget",
    "SupportSet", "ThetaPoint", "ValidationError", "default_max_support",
    "destandardize_columns", "standardize_columns", "validate_dataset",
    "RngStream", "draw_ar_gaussian", "draw_logistic", "synth_response",
    "DegenerateLabelsError", "DegeneratePilotError", "IncompatibleTargetError",
    "JointFit", "LassoPath", "MleFit", "fit_adaptive_joint", "fit_ridge_joint",
    "logistic_lasso_path", "mle_logistic", "mle_logistic_constrained",
    "support_at_cardinality",
    "EbicConfig", "build_candidate_set", "ebic_score",
    "NuclearReport", "model_confidence_set", "model_selector_tilde_tau",
    "nuclear_stat",
    "CaseProbRegion", "IntervalUnion", "RegionHandle", "chi2_quantile",
    "ci_single_coef", "lrt_stat", "region_abeta", "region_case_probs",
    "SummaryTable", "merge_intervals", "numerical_rank",
    "SCENARIOS", "IngestResult", "RunReport", "Scenario", "ingest_csv",
    "report_tables", "run_replication", "run_scenario", "summarize_records",
]
