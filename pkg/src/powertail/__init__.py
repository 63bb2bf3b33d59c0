"""Exponential distribution with a power-law tail for journal impact factors.

Density and survival function by characteristic-function inversion, least
squares fitting to empirical survival curves, inverse-transform sampling,
and year-to-year stability statistics.
"""

__version__ = "0.1.0"

from .distcore import (
    REFERENCE_PARAMS,
    ModelParams,
    QuadratureSettings,
    normalization,
    pdf,
    pdf_beta2,
    pdf_small_r,
    survival,
    survival_normalized,
    survival_small_r,
    tail_slope,
)
from .errors import (
    AccuracyError,
    ConfigurationError,
    DataError,
    DomainError,
    PowertailError,
    RangeError,
)
from .fitkit import (
    FitConfig,
    FitResult,
    count_above,
    empirical_survival,
    fit,
    ks_distance,
    quartile_assign,
    stratify,
)
from .sampler import GridSpec, SurvivalTable, sample, tabulate
