"""
Adaptive sampling of training parameters.
"""

from bo.acquisition import (
    AcquisitionConfig,
    AcquisitionConfigError,
    AcquisitionError,
    acquisition_ei,
    acquisition_pi,
    propose_from_pool,
    propose_next,
    score_candidates,
)
from bo.design import lhs_design, lhs_sample
from bo.loop import (
    BoConfigError,
    BoResult,
    BoRunConfig,
    BoTrace,
    ComparisonResult,
    HfmCallbackError,
    LhsResult,
    MaxIterationsWarning,
    SamplingSetup,
    TraceRecord,
    compare_sampling,
    evaluate_hfm,
    lhs_budget_to_tolerance,
    run_bo,
    run_lhs_baseline,
    run_trials,
    summarize_trials,
)

__all__ = [
    'AcquisitionConfig',
    'AcquisitionConfigError',
    'AcquisitionError',
    'BoConfigError',
    'BoResult',
    'BoRunConfig',
    'BoTrace',
    'ComparisonResult',
    'HfmCallbackError',
    'LhsResult',
    'MaxIterationsWarning',
    'SamplingSetup',
    'TraceRecord',
    'acquisition_ei',
    'acquisition_pi',
    'compare_sampling',
    'evaluate_hfm',
    'lhs_budget_to_tolerance',
    'lhs_design',
    'lhs_sample',
    'propose_from_pool',
    'propose_next',
    'run_bo',
    'run_lhs_baseline',
    'run_trials',
    'score_candidates',
    'summarize_trials',
]
