"""Metalog quantile-parameterized distributions with closed-form tail risk.

The package covers the full path from data to risk numbers:

- :mod:`metalog_risk.metalog` -- quantile function, density, CDF inversion,
  feasibility checking, and JSON persistence of coefficient vectors;
- :mod:`metalog_risk.risk` -- closed-form CVaR (superquantile) with a
  per-coefficient breakdown, the distribution mean by two independent
  routes, and first-order partial moments;
- :mod:`metalog_risk.fitting` -- QR-based least squares from quantile data;
- :mod:`metalog_risk.quadrature` -- a self-contained adaptive
  Gauss-Kronrod integrator used as the numerical cross-check for every
  closed form;
- :mod:`metalog_risk.special` -- the digamma and hypergeometric values the
  closed forms need, in exact finite form;
- :mod:`metalog_risk.cli` -- the ``metalog-risk`` command.
"""

from ._kernels import USING_NUMBA
from .fitting import (
    COND_WARN_THRESHOLD,
    CsvFormatError,
    FitResult,
    QuantilePoint,
    RankDeficiencyError,
    fit,
    read_quantile_csv,
)
from .metalog import (
    MAX_TERMS,
    FeasibilityReport,
    InfeasibleError,
    MetalogCoefficients,
    ProbLevel,
    basis_matrix,
    basis_term,
    cdf,
    is_feasible,
    pdf_at_level,
    quantile,
    quantile_density,
)
from .quadrature import (
    IntegrationResult,
    ToleranceNotReachedError,
    cvar_numeric,
    integrate,
)
from .risk import (
    ALPHA_MAX,
    CVaRBreakdown,
    PartialMoments,
    cvar,
    cvar6_corollary,
    lower_partial_moment,
    lower_quantile_fn,
    mean,
    mean_via_basis_integrals,
    partial_moments,
    risk_report,
    risk_report_json,
    upper_partial_moment,
    upper_quantile_fn,
)
from .special import (
    EULER_GAMMA,
    bracket_at_half,
    digamma_half_int,
    euler_gamma,
    hyp2f1_special,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "USING_NUMBA",
    "MAX_TERMS",
    "ALPHA_MAX",
    "COND_WARN_THRESHOLD",
    "EULER_GAMMA",
    # types
    "MetalogCoefficients",
    "ProbLevel",
    "FeasibilityReport",
    "CVaRBreakdown",
    "PartialMoments",
    "QuantilePoint",
    "FitResult",
    "IntegrationResult",
    # errors
    "InfeasibleError",
    "RankDeficiencyError",
    "CsvFormatError",
    "ToleranceNotReachedError",
    # metalog core
    "basis_term",
    "basis_matrix",
    "quantile",
    "quantile_density",
    "pdf_at_level",
    "cdf",
    "is_feasible",
    # risk measures
    "cvar",
    "cvar6_corollary",
    "mean",
    "mean_via_basis_integrals",
    "partial_moments",
    "upper_partial_moment",
    "lower_partial_moment",
    "upper_quantile_fn",
    "lower_quantile_fn",
    "risk_report",
    "risk_report_json",
    # quadrature oracle
    "integrate",
    "cvar_numeric",
    # fitting
    "fit",
    "read_quantile_csv",
    # special functions
    "euler_gamma",
    "digamma_half_int",
    "hyp2f1_special",
    "bracket_at_half",
]
