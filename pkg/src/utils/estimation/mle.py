# utils/estimation/mle.py
"""
Maximum-likelihood fit of the impact coefficients

The log-likelihood is maximized over log γ so every coefficient stays
positive. BFGS runs on the negative log-likelihood scaled by its value at
the starting point, with central-difference gradients.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from ..config_manager import EstimationConfig
from ..errors import InvalidModelError
from ..logger_setup import setup_logger
from .records import ImpactCoefficients, group_records, log_likelihood

logger = setup_logger(name="mle", level=logging.INFO)


@dataclass(frozen=True)
class MLEOptions:
    max_iter: int = 500
    gtol: float = 1e-8
    fd_step: float = 1e-5
    shared_fund_coefficient: bool = False

    @classmethod
    def from_config(cls, config: EstimationConfig, shared_fund_coefficient: bool = False) -> "MLEOptions":
        return cls(config.max_iter, config.gtol, config.fd_step, shared_fund_coefficient)


@dataclass(frozen=True)
class MLEResult:
    coefficients: ImpactCoefficients
    log_likelihood: float
    converged: bool
    iterations: int
    gradient_norm: float
    function_evaluations: int
    message: str
    n_records: int
    shared_fund_coefficient: bool


def _expand(x: np.ndarray, n_funds: int, shared: bool) -> ImpactCoefficients:
    if shared and n_funds:
        x = np.concatenate([x[:1], np.repeat(x[1], n_funds)])
    return ImpactCoefficients.from_log(x)


def _contract(coef: ImpactCoefficients, shared: bool) -> np.ndarray:
    x = coef.to_log()
    if shared and coef.n_funds:
        return np.array([x[0], np.mean(x[1:])])
    return x


def fit_mle(records, init: ImpactCoefficients, options: Optional[MLEOptions] = None) -> MLEResult:
    """
    Maximize the log-likelihood over positive coefficients.

    Args:
        records: TransactionRecords (all with init.n_funds funds)
        init: Starting coefficients
        options: Iteration cap, gradient tolerance, finite-difference step,
            and whether all funds share one γ_f

    Returns:
        MLEResult; non-convergence is logged and flagged, not raised
    """
    options = options or MLEOptions()
    batches = group_records(records)
    n_records = sum(len(batch) for batch in batches)
    if any(batch.n_funds != init.n_funds for batch in batches):
        raise InvalidModelError("records and initial coefficients disagree on the number of funds")
    shared = options.shared_fund_coefficient

    def loglik(x: np.ndarray) -> float:
        return log_likelihood(batches, _expand(x, init.n_funds, shared))

    x0 = _contract(init, shared)
    scale = abs(loglik(x0)) or 1.0

    def objective(x: np.ndarray) -> float:
        return -loglik(x) / scale

    def gradient(x: np.ndarray) -> np.ndarray:
        grad = np.empty_like(x)
        for j in range(x.size):
            shift = np.zeros_like(x)
            shift[j] = options.fd_step
            grad[j] = (objective(x + shift) - objective(x - shift)) / (2.0 * options.fd_step)
        return grad

    logger.info(f"Fitting {x0.size} log-coefficient(s) on {n_records} records")
    result = minimize(objective, x0, jac=gradient, method="BFGS",
                      options={"maxiter": options.max_iter, "gtol": options.gtol})

    coefficients = _expand(result.x, init.n_funds, shared)
    gradient_norm = float(np.linalg.norm(gradient(result.x)))
    if not result.success:
        logger.warning(f"MLE did not report convergence after {result.nit} iterations: {result.message} "
                       f"(gradient norm {gradient_norm:.3e})")
    else:
        logger.info(f"MLE converged in {result.nit} iterations (gradient norm {gradient_norm:.3e})")
    return MLEResult(
        coefficients=coefficients,
        log_likelihood=loglik(result.x),
        converged=bool(result.success),
        iterations=int(result.nit),
        gradient_norm=gradient_norm,
        function_evaluations=int(result.nfev),
        message=str(result.message),
        n_records=n_records,
        shared_fund_coefficient=shared,
    )


def closed_form_gamma_id(records) -> float:
    """
    γ_id maximizing the likelihood when there are no funds and Σ̂ = I.

    The prediction is c·a with c = 1/γ_id and a = ½ṽσ̂/DVol̂, so the
    least-squares slope c* = Σaᵀr̄ / Σaᵀa gives γ_id = 1/c*.
    """
    batches = group_records(records)
    if any(batch.n_funds for batch in batches):
        raise InvalidModelError("the closed form applies to records without funds")
    if not all(np.array_equal(rec.sigma_noise, np.eye(rec.n_assets)) for batch in batches for rec in batch.records):
        raise InvalidModelError("the closed form needs an identity noise covariance for every record")
    numerator = denominator = 0.0
    for batch in batches:
        a = 0.5 * batch.v / batch.d_id
        numerator += float(np.sum(a * batch.r))
        denominator += float(np.sum(a * a))
    if numerator <= 0:
        raise InvalidModelError("returns are not positively related to trades; no positive gamma_id fits")
    return denominator / numerator
