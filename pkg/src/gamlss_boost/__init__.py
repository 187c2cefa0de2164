"""Balanced non-cyclical component-wise gradient boosting for GAMLSS."""

from .data import Dataset, FitConfig, FitTrace, FittedModel, load_csv, split_holdout, write_csv
from .engine import boost_fit, coefficients_from_trace, eta_path, predict
from .errors import (
    ConvergenceError,
    DataError,
    DegenerateBaseLearnerError,
    DomainError,
    FitError,
    GamlssBoostError,
    NonFiniteError,
    SchemeError,
)
from .families import FAMILIES, get_family
from .metrics import brier_score, integrated_brier, selection_metrics
from .simulation import run_study, simulate_gaussian, simulate_negbin, simulate_weibull
from .steps import PRESETS, Analytic, BLRatio, Fixed, LineSearch, SchemeSpec, preset
from .tuning import kfold_cv, repeated_cv

__version__ = "0.1.0"

__all__ = [
    "Analytic", "BLRatio", "ConvergenceError", "DataError", "Dataset",
    "DegenerateBaseLearnerError", "DomainError", "FAMILIES", "FitConfig", "FitError",
    "FitTrace", "FittedModel", "Fixed", "GamlssBoostError", "LineSearch",
    "NonFiniteError", "PRESETS", "SchemeError", "SchemeSpec", "boost_fit",
    "brier_score", "coefficients_from_trace", "eta_path", "get_family",
    "integrated_brier", "kfold_cv", "load_csv", "predict", "preset", "repeated_cv",
    "run_study", "selection_metrics", "simulate_gaussian", "simulate_negbin",
    "simulate_weibull", "split_holdout", "write_csv",
]
