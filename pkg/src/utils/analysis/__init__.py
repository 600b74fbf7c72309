"""Closed-form cost ratios of separable versus coupled execution."""

from .cost_ratio import (
    CostRatioInputs,
    CostRatioReport,
    ExtremeRatios,
    SingleStockRatio,
    base_term,
    cost_ratio,
    cost_ratio_extremes,
    delta_threshold_eta,
    delta_threshold_theta,
    direct_cost_ratio,
    intraday_variation,
    liquidity_ratio,
    market_ratio,
    market_ratio_curve,
    single_stock_ratio,
    theta_bound_summary,
    turning_point,
)

__all__ = [
    "CostRatioInputs", "CostRatioReport", "ExtremeRatios", "SingleStockRatio", "base_term",
    "cost_ratio", "cost_ratio_extremes", "delta_threshold_eta", "delta_threshold_theta",
    "direct_cost_ratio", "intraday_variation", "liquidity_ratio", "market_ratio",
    "market_ratio_curve", "single_stock_ratio", "theta_bound_summary", "turning_point",
]
