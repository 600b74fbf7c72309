"""Reduced-form impact model and its maximum-likelihood estimation."""

from .records import (
    ImpactCoefficients,
    RecordBatch,
    TransactionRecord,
    liquidity_from_forecasts,
    log_likelihood,
    log_likelihood_gradient,
    predict_shortfall,
    simulate_records,
)
from .mle import MLEOptions, MLEResult, closed_form_gamma_id, fit_mle

__all__ = [
    "ImpactCoefficients", "RecordBatch", "TransactionRecord", "liquidity_from_forecasts",
    "log_likelihood", "log_likelihood_gradient", "predict_shortfall", "simulate_records",
    "MLEOptions", "MLEResult", "closed_form_gamma_id", "fit_mle",
]
