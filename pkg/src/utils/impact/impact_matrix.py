# utils/impact/impact_matrix.py
"""
Impact Matrix Utilities
Builds G = (Ψ_id + WΨ_fWᵀ)⁻¹ through the Woodbury identity and evaluates
price impact, one-period and multi-period implementation shortfall
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy import linalg

from ..config_manager import NumericsConfig
from ..errors import DimensionMismatchError, IllConditionedError, InvalidModelError
from ..logger_setup import setup_logger
from .liquidity import CostResult, Infeasible, IntradayLiquidity, LiquidityModel, PriceState

logger = setup_logger(name="impact_matrix", level=logging.INFO)


class ImpactMatrix:
    """
    The impact matrix G held as diagonal plus low-rank factors.

    G = D⁻¹ − D⁻¹W_a M⁻¹ W_aᵀD⁻¹ with D = Ψ_id, W_a the funds with
    non-zero liquidity and M = Ψ_f,a⁻¹ + W_aᵀD⁻¹W_a (Cholesky-factored).
    The dense matrix is materialized when N is at most the dense limit.
    """

    def __init__(self, model: LiquidityModel, numerics: Optional[NumericsConfig] = None):
        numerics = numerics or NumericsConfig()
        model.require_positive_single_stock("build_impact_matrix")
        self.model = model
        self.inv_psi_id = 1.0 / model.psi_id
        self.active = model.psi_f > 0
        if not self.active.all():
            dropped = np.flatnonzero(~self.active) + 1
            logger.debug(f"Dropping {dropped.size} fund(s) without liquidity from the Woodbury core: "
                         f"{dropped.tolist()}")
        self.W_active = model.W[:, self.active]
        self.scaled_W = self.inv_psi_id[:, None] * self.W_active  # D⁻¹W_a
        self.inner_factor = None
        self.condition_number = 1.0

        if self.W_active.shape[1]:
            inner = np.diag(1.0 / model.psi_f[self.active]) + self.W_active.T @ self.scaled_W
            self.condition_number = float(np.linalg.cond(inner))
            if not np.isfinite(self.condition_number) or self.condition_number > numerics.condition_limit:
                raise IllConditionedError(
                    f"fund core matrix has condition number {self.condition_number:.3e} "
                    f"(limit {numerics.condition_limit:.0e}); fund weights are nearly dependent",
                    condition_number=self.condition_number,
                )
            self.inner_factor = linalg.cho_factor(inner, lower=True)

        self._dense: Optional[np.ndarray] = None
        if model.n_assets <= numerics.dense_limit:
            self._dense = self._materialize()

    @property
    def n_assets(self) -> int:
        return self.model.n_assets

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    def _inner_solve(self, rhs: np.ndarray) -> np.ndarray:
        return linalg.cho_solve(self.inner_factor, rhs)

    def _materialize(self) -> np.ndarray:
        G = np.diag(self.inv_psi_id)
        if self.inner_factor is not None:
            G -= self.scaled_W @ self._inner_solve(self.scaled_W.T)
        return 0.5 * (G + G.T)

    @property
    def G(self) -> np.ndarray:
        """Dense G (built on demand above the dense limit)."""
        if self._dense is None:
            logger.debug(f"Materializing a {self.n_assets}x{self.n_assets} impact matrix on demand")
            return self._materialize()
        return self._dense

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """G v for a vector or an (N, m) block of vectors."""
        v = np.asarray(v, dtype=float)
        if self._dense is not None:
            return self._dense @ v
        scaled = self.inv_psi_id * v if v.ndim == 1 else self.inv_psi_id[:, None] * v
        if self.inner_factor is None:
            return scaled
        return scaled - self.scaled_W @ self._inner_solve(self.W_active.T @ scaled)

    def quadratic_form(self, v: np.ndarray) -> float:
        """vᵀGv."""
        return float(v @ self.matvec(v))

    def fund_coordinates(self, x: np.ndarray) -> np.ndarray:
        """
        Ŵᵀx = M⁻¹WᵀΨ_id⁻¹x as a length-K vector (zero for funds without liquidity).

        W @ fund_coordinates(x) is the component of x that index-fund
        liquidity absorbs.
        """
        coords = np.zeros(self.model.n_funds)
        if self.inner_factor is not None:
            coords[self.active] = self._inner_solve(self.scaled_W.T @ x)
        return coords

    def check_invariants(self, tolerance: float = 1e-12) -> None:
        """Raise InvalidModelError unless G is symmetric and positive definite."""
        G = self.G
        scale = max(np.abs(G).max(), np.finfo(float).tiny)
        asymmetry = np.abs(G - G.T).max() / scale
        if asymmetry > tolerance:
            raise InvalidModelError(f"impact matrix is not symmetric (relative asymmetry {asymmetry:.3e})")
        smallest = float(np.linalg.eigvalsh(G).min())
        if smallest <= 0:
            raise InvalidModelError(f"impact matrix is not positive definite (smallest eigenvalue {smallest:.3e})")


@dataclass(frozen=True)
class PriceImpact:
    """Market-clearing price change and who supplies the traded shares."""
    delta_p: np.ndarray
    single_stock_shares: np.ndarray
    index_fund_shares: np.ndarray

    @property
    def cleared(self) -> np.ndarray:
        return self.single_stock_shares + self.index_fund_shares


class ExtremeCase(str, Enum):
    NO_FUNDS = "no-funds"
    FUNDS_ONLY = "funds-only"


def build_impact_matrix(model: LiquidityModel, numerics: Optional[NumericsConfig] = None) -> ImpactMatrix:
    """
    Invert the total liquidity with the Woodbury identity.

    Args:
        model: Liquidity primitives; every psi_id must be strictly positive
        numerics: Condition limit and dense-materialization limit

    Returns:
        ImpactMatrix for the model
    """
    return ImpactMatrix(model, numerics)


def price_impact(model: LiquidityModel, v, impact: Optional[ImpactMatrix] = None) -> PriceImpact:
    """Δp = Gv plus the single-stock / index-fund split of the cleared shares."""
    v = model.check_trade(v)
    impact = impact or build_impact_matrix(model)
    delta_p = impact.matvec(v)
    return PriceImpact(delta_p, model.single_stock_part(delta_p), model.fund_part(delta_p))


def one_period_cost(model: LiquidityModel, v, impact: Optional[ImpactMatrix] = None) -> float:
    """Expected implementation shortfall ½vᵀGv in dollars."""
    v = model.check_trade(v)
    impact = impact or build_impact_matrix(model)
    return 0.5 * impact.quadratic_form(v)


def _pseudo_inverse_cost(liquidity: np.ndarray, v: np.ndarray, span_tolerance: float) -> CostResult:
    norm = np.linalg.norm(v)
    if norm == 0:
        return 0.0
    solution, *_ = linalg.lstsq(liquidity, v)
    residual = float(np.linalg.norm(liquidity @ solution - v) / norm)
    if residual > span_tolerance:
        return Infeasible("trade leaves the span of available liquidity", residual)
    return 0.5 * float(v @ solution)


def period_cost(model: LiquidityModel, v, numerics: Optional[NumericsConfig] = None) -> CostResult:
    """
    One-period cost that tolerates zero liquidity entries.

    With every psi_id positive this is one_period_cost. Otherwise the
    liquidity matrix is singular: the cost is ½vᵀL⁺v when v lies in its
    range and Infeasible when it does not.
    """
    numerics = numerics or NumericsConfig()
    v = model.check_trade(v)
    if np.all(model.psi_id > 0):
        return one_period_cost(model, v, build_impact_matrix(model, numerics))
    return _pseudo_inverse_cost(model.liquidity_matrix(), v, numerics.span_tolerance)


def total_cost(liq: IntradayLiquidity, schedule, numerics: Optional[NumericsConfig] = None) -> CostResult:
    """
    Σ_t ½v_tᵀG_tv_t for a Schedule (or a T×N array of trades).

    Returns:
        Total cost in dollars, or the first period's Infeasible outcome
    """
    v = np.asarray(getattr(schedule, "v", schedule), dtype=float)
    if v.ndim != 2 or v.shape != (liq.periods, liq.n_assets):
        raise DimensionMismatchError(f"schedule has shape {v.shape}, expected ({liq.periods}, {liq.n_assets})")
    costs = []
    for t, (model, v_t) in enumerate(zip(liq, v), start=1):
        cost = period_cost(model, v_t, numerics)
        if isinstance(cost, Infeasible):
            logger.debug(f"Period {t} is infeasible: {cost.reason}")
            return cost
        costs.append(cost)
    return float(np.sum(costs))


def extreme_case_cost(model: LiquidityModel, v, which: Union[str, ExtremeCase],
                      numerics: Optional[NumericsConfig] = None) -> CostResult:
    """
    Limiting cost when one class of liquidity provider is absent.

    Args:
        model: Liquidity primitives
        v: Trade vector in shares
        which: 'no-funds' (Ψ_f → 0) or 'funds-only' (Ψ_id → 0)

    Returns:
        Cost in dollars, or Infeasible when a funds-only trade leaves span(W)
    """
    numerics = numerics or NumericsConfig()
    v = model.check_trade(v)
    which = ExtremeCase(which)

    if which is ExtremeCase.NO_FUNDS:
        model.require_positive_single_stock("no-funds cost")
        return 0.5 * float(np.sum(v * v / model.psi_id))

    if model.n_funds == 0 or not np.all(model.psi_f > 0):
        if np.linalg.norm(v) == 0:
            return 0.0
        return Infeasible("funds-only execution needs every fund to carry liquidity", None)
    norm = np.linalg.norm(v)
    if norm == 0:
        return 0.0
    u, *_ = linalg.lstsq(model.W, v)
    residual = float(np.linalg.norm(model.W @ u - v) / norm)
    if residual > numerics.span_tolerance:
        return Infeasible("trade is not a combination of fund portfolios", residual)
    return 0.5 * float(np.sum(u * u / model.psi_f))


def to_notional_units(model: LiquidityModel, prices: PriceState) -> LiquidityModel:
    """
    Change units from shares/dollars to notional/returns.

    ψ̃_id,i = p_i²ψ_id,i, ψ̃_f,k = (w_kᵀp)²ψ_f,k and w̃_k = Pw_k/(pᵀw_k);
    the shortfall of ṽ = Pv under the new model equals that of v.
    """
    p = prices.p
    if p.size != model.n_assets:
        raise DimensionMismatchError(f"{p.size} prices for {model.n_assets} assets")
    fund_values = model.W.T @ p
    degenerate = np.flatnonzero(np.abs(fund_values) <= np.finfo(float).eps * (np.abs(model.W).T @ p))
    if degenerate.size:
        raise InvalidModelError(f"fund(s) {list(degenerate + 1)} have zero market value pᵀw_k")
    W_tilde = (p[:, None] * model.W) / fund_values
    return LiquidityModel(p * p * model.psi_id, fund_values ** 2 * model.psi_f, W_tilde)


def to_notional_trade(v, prices: PriceState) -> np.ndarray:
    """ṽ = Pv (dollars traded)."""
    return prices.p * np.asarray(v, dtype=float)


def to_returns(delta_p, prices: PriceState) -> np.ndarray:
    """r = P⁻¹Δp (price changes as returns)."""
    return np.asarray(delta_p, dtype=float) / prices.p
