# utils/execution/qp_oracle.py
"""
Iterative solver for the execution QP

Minimizes Σ_t ½v_tᵀG_tv_t subject to Σ_t v_t = x0, optionally with sign
constraints: every trade in asset i has the sign of x0_i, and assets with
x0_i = 0 are not traded. It validates the closed-form schedules and is the
extension point for further convex side constraints.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..config_manager import NumericsConfig, QPConfig
from ..errors import ConvergenceError, DimensionMismatchError, InvalidModelError
from ..impact.impact_matrix import ImpactMatrix, build_impact_matrix
from ..impact.liquidity import IntradayLiquidity
from ..logger_setup import setup_logger
from .schedule import Schedule
from .scheduler import kkt_residual

logger = setup_logger(name="qp_oracle", level=logging.INFO)

LOG_EVERY = 10000


@dataclass(frozen=True)
class QPResult:
    schedule: Schedule
    cost: float
    iterations: int
    kkt_residual: float
    converged: bool
    sign_constrained: bool


class _BlockHessian:
    """Block-diagonal Hessian diag(G_1, ..., G_T) acting on (T, N) arrays."""

    def __init__(self, impacts: List[ImpactMatrix]):
        self.impacts = impacts

    def apply(self, v: np.ndarray) -> np.ndarray:
        return np.stack([impact.matvec(v_t) for impact, v_t in zip(self.impacts, v)])

    def lipschitz(self) -> float:
        return max(float(np.linalg.eigvalsh(impact.G).max()) for impact in self.impacts)

    def assert_positive_definite(self) -> None:
        for t, impact in enumerate(self.impacts, start=1):
            smallest = float(np.linalg.eigvalsh(impact.G).min())
            if smallest <= 0:
                raise InvalidModelError(f"Hessian block of period {t} is not positive definite ({smallest:.3e})")


def project_signed_simplex(y: np.ndarray, total: float) -> np.ndarray:
    """
    Euclidean projection of y onto {u : Σu = total, sign(u_t) ∈ {0, sign(total)}}.

    Args:
        y: Point to project (one asset's trades over the periods)
        total: Required sum; zero forces the all-zero vector

    Returns:
        Projected vector
    """
    if total == 0:
        return np.zeros_like(y)
    sign = np.sign(total)
    z = sign * y
    s = abs(total)
    ordered = np.sort(z)[::-1]
    cumulative = np.cumsum(ordered) - s
    ranks = np.arange(1, z.size + 1)
    rho = np.flatnonzero(ordered - cumulative / ranks > 0)[-1]
    shift = cumulative[rho] / (rho + 1)
    return sign * np.maximum(z - shift, 0.0)


def _project(v: np.ndarray, x0: np.ndarray) -> np.ndarray:
    return np.column_stack([project_signed_simplex(v[:, i], x0[i]) for i in range(x0.size)])


def _exact_step(gradient: np.ndarray, direction: np.ndarray, hessian: _BlockHessian) -> float:
    curvature = float(np.sum(direction * hessian.apply(direction)))
    if curvature <= 0:
        return 0.0
    return -float(np.sum(gradient * direction)) / curvature


def _solve_unconstrained(x0, hessian, options):
    T = len(hessian.impacts)
    v = np.tile(x0 / T, (T, 1))
    residual = np.inf
    for iteration in range(1, options.max_iter + 1):
        gradient = hessian.apply(v)
        residual = kkt_residual(gradient)
        if residual <= options.tolerance:
            return v, iteration - 1, residual
        # steepest descent inside {Σ_t d_t = 0}
        direction = -(gradient - gradient.mean(axis=0))
        v = v + _exact_step(gradient, direction, hessian) * direction
        if iteration % LOG_EVERY == 0:
            logger.debug(f"iteration {iteration}: KKT residual {residual:.3e}")
    return v, options.max_iter, residual


def _solve_sign_constrained(x0, hessian, options):
    T = len(hessian.impacts)
    step = 1.0 / hessian.lipschitz()
    v = _project(np.tile(x0 / T, (T, 1)), x0)
    residual = np.inf
    for iteration in range(1, options.max_iter + 1):
        gradient = hessian.apply(v)
        target = _project(v - step * gradient, x0)
        direction = target - v
        scale = max(np.max(np.abs(gradient)), np.finfo(float).tiny)
        residual = float(np.max(np.abs(direction)) / step / scale)
        if residual <= options.tolerance:
            return v, iteration - 1, residual
        tau = min(max(_exact_step(gradient, direction, hessian), 0.0), 1.0)
        v = v + tau * direction
        if iteration % LOG_EVERY == 0:
            logger.debug(f"iteration {iteration}: projected-gradient residual {residual:.3e}")
    return v, options.max_iter, residual


def qp_oracle(liq: IntradayLiquidity, x0, sign_constrained: bool = False,
              options: Optional[QPConfig] = None, numerics: Optional[NumericsConfig] = None) -> QPResult:
    """
    Solve the execution QP numerically.

    Args:
        liq: Per-period liquidity; every psi_id must be strictly positive
        x0: Target position change in shares
        sign_constrained: Forbid trades against the sign of x0_i
        options: Iteration cap and convergence tolerance
        numerics: Passed to the per-period impact matrices

    Returns:
        QPResult with the schedule and solver diagnostics

    Raises:
        ConvergenceError: the iteration cap was reached
    """
    options = options or QPConfig()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (liq.n_assets,):
        raise DimensionMismatchError(f"x0 has shape {x0.shape}, expected ({liq.n_assets},)")

    if not np.any(x0):
        return QPResult(Schedule.zeros(liq.periods, liq.n_assets, "qp"), 0.0, 0, 0.0, True, sign_constrained)

    hessian = _BlockHessian([build_impact_matrix(model, numerics) for model in liq])
    hessian.assert_positive_definite()

    solver = _solve_sign_constrained if sign_constrained else _solve_unconstrained
    v, iterations, residual = solver(x0, hessian, options)
    if residual > options.tolerance:
        raise ConvergenceError("execution QP did not converge", residual, iterations)

    schedule = Schedule(v, x0, label="qp-signed" if sign_constrained else "qp")
    cost = 0.5 * float(np.sum(v * hessian.apply(v)))
    logger.debug(f"QP converged in {iterations} iterations (residual {residual:.3e})")
    return QPResult(schedule, cost, iterations, residual, True, sign_constrained)
