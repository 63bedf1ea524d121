"""Finite-mixture models of net wealth with negative, zero and positive values.

Negative holdings follow a Weibull law on their magnitude, zero is a point
mass, and positive holdings follow a Singh-Maddala, Dagum or
kappa-generalized law.
"""

from .branches import FAMILIES, Dagum, KappaGen, SinghMaddala, WeibullNeg
from .diagnostics import (
    SeriesTable,
    SummaryStats,
    empirical_gini,
    empirical_lorenz,
    index_numbers,
    mean_excess_series,
    summary_stats,
    top_share,
    zipf_series,
)
from .errors import *  # noqa: F401,F403
from .estimation import (
    FitConfig,
    FitResult,
    estimate_proportions,
    fit_mixture,
    fit_positive_branch,
    fit_weibull_negative,
    pointwise_loglik,
    weighted_loglik,
)
from .gof import (
    BootstrapResult,
    GofReport,
    VuongResult,
    anderson_darling,
    bootstrap_pvalue,
    gof_report,
    information_criteria,
    rmse_cdf,
    vuong_test,
)
from .ingest import ColumnMap, RawRecord, load_deflators, load_records, preprocess
from .mixture import GiniAboveOneWarning, MixtureParams
from .sample import WeightedSample

__version__ = "0.1.0"
