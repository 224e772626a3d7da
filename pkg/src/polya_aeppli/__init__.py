"""
Type I multivariate Pólya-Aeppli (MPA) and weighted multivariate
Pólya-Aeppli (WMPA) count distributions.

The package evaluates both probability mass functions through associated
Laguerre polynomials, draws samples from them, fits them by moments and by
maximum likelihood, compares fits by AIC and BIC, and runs Monte-Carlo
studies of the estimators.

Examples
--------
>>> import polya_aeppli as pa
>>> table = pa.embedded_dataset("australian_health")
>>> fit = pa.mle(table, "mpa")
>>> round(fit.aic, 1)
19890.2
"""

from . import data_io, distributions, estimation, laguerre, model_selection, oracle, sampling, simstudy
from .data_io import DataFormat, embedded_dataset, emit_records, emit_table, load_data, parse_records, parse_table
from .distributions import (
    Model,
    MomentSummary,
    MpaParams,
    WmpaParams,
    gdi_generic,
    gdi_mpa,
    log_pmf,
    moments,
    mpa_log_pmf,
    mpa_moments,
    params_for,
    wmpa_log_pmf,
    wmpa_moments,
)
from .errors import (
    ConvergenceWarning,
    DataError,
    EstimationError,
    InconsistentDimension,
    LineSearchFailure,
    MalformedCell,
    MalformedLine,
    NegativeCommonRate,
    NegativeMarginRate,
    NegativeSqrtArgument,
    NonConvergence,
    PolyaAeppliError,
    TruncationTooLoose,
    UnderdispersedSample,
    ZeroMeanCoordinate,
)
from .estimation import FitResult, Method, mle, mom, mom_mpa, mom_wmpa, sample_moments
from .model_selection import (
    Comparison,
    compare,
    empirical_gdi,
    expected_frequencies,
    information_criteria,
    log_likelihood,
)
from .samples import ContingencyTable, CountSample
from .sampling import sample
from .simstudy import SimConfig, SimReport, run_simulation

__version__ = "0.1.0"

__all__ = [
    "Comparison",
    "ContingencyTable",
    "ConvergenceWarning",
    "CountSample",
    "DataError",
    "DataFormat",
    "EstimationError",
    "FitResult",
    "InconsistentDimension",
    "LineSearchFailure",
    "MalformedCell",
    "MalformedLine",
    "Method",
    "Model",
    "MomentSummary",
    "MpaParams",
    "NegativeCommonRate",
    "NegativeMarginRate",
    "NegativeSqrtArgument",
    "NonConvergence",
    "PolyaAeppliError",
    "SimConfig",
    "SimReport",
    "TruncationTooLoose",
    "UnderdispersedSample",
    "WmpaParams",
    "ZeroMeanCoordinate",
    "compare",
    "data_io",
    "distributions",
    "embedded_dataset",
    "emit_records",
    "emit_table",
    "empirical_gdi",
    "estimation",
    "expected_frequencies",
    "gdi_generic",
    "gdi_mpa",
    "information_criteria",
    "laguerre",
    "load_data",
    "log_likelihood",
    "log_pmf",
    "mle",
    "model_selection",
    "mom",
    "mom_mpa",
    "mom_wmpa",
    "moments",
    "mpa_log_pmf",
    "mpa_moments",
    "oracle",
    "params_for",
    "parse_records",
    "parse_table",
    "run_simulation",
    "sample",
    "sample_moments",
    "sampling",
    "simstudy",
    "wmpa_log_pmf",
    "wmpa_moments",
]
