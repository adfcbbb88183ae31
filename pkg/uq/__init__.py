"""
Uncertainty quantification on top of a surrogate.

Monte Carlo mean/std fields, damage indices against a baseline trajectory,
and first-order/total Sobol indices.
"""

from uq.sampling import (
    SamplingError,
    as_generator,
    sample_feasible,
    sample_gaussian,
    sample_gaussian_array,
)
from uq.surrogates import BundleSurrogate, IshigamiSurrogate, LinearToySurrogate, Surrogate
from uq.montecarlo import (
    SampleEvaluationError,
    UqConfigError,
    UqResult,
    evaluate_all,
    monte_carlo_uq,
    uq_band,
)
from uq.damage import DamageIndexError, DamageIndexSet, damage_index
from uq.sobol import (
    SaltelliDesign,
    SaltelliEvaluations,
    SobolEstimate,
    SobolResult,
    SobolUndefinedError,
    SobolWarning,
    evaluate_design,
    saltelli_sample,
    sobol_analysis,
    sobol_first,
    sobol_indices,
    sobol_total,
)

__all__ = [
    'BundleSurrogate',
    'DamageIndexError',
    'DamageIndexSet',
    'IshigamiSurrogate',
    'LinearToySurrogate',
    'SaltelliDesign',
    'SaltelliEvaluations',
    'SampleEvaluationError',
    'SamplingError',
    'SobolEstimate',
    'SobolResult',
    'SobolUndefinedError',
    'SobolWarning',
    'Surrogate',
    'UqConfigError',
    'UqResult',
    'as_generator',
    'damage_index',
    'evaluate_all',
    'evaluate_design',
    'monte_carlo_uq',
    'sample_feasible',
    'sample_gaussian',
    'sample_gaussian_array',
    'saltelli_sample',
    'sobol_analysis',
    'sobol_first',
    'sobol_indices',
    'sobol_total',
    'uq_band',
]
