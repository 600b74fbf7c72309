"""Liquidity primitives, the impact matrix and shortfall costs."""

from .liquidity import CostResult, Infeasible, IntradayLiquidity, LiquidityModel, PriceState
from .impact_matrix import (
    ExtremeCase,
    ImpactMatrix,
    PriceImpact,
    build_impact_matrix,
    extreme_case_cost,
    one_period_cost,
    period_cost,
    price_impact,
    to_notional_trade,
    to_notional_units,
    to_returns,
    total_cost,
)

__all__ = [
    "CostResult", "Infeasible", "IntradayLiquidity", "LiquidityModel", "PriceState",
    "ExtremeCase", "ImpactMatrix", "PriceImpact", "build_impact_matrix", "extreme_case_cost",
    "one_period_cost", "period_cost", "price_impact", "to_notional_trade", "to_notional_units",
    "to_returns", "total_cost",
]
