"""Compound-Poisson order-flow simulation and its closed-form moments."""

from .params import OrderFlowParams
from .simulator import OrderFlowMoments, simulate_day, simulate_panel, theoretical_moments

__all__ = ["OrderFlowParams", "OrderFlowMoments", "simulate_day", "simulate_panel", "theoretical_moments"]
