"""Optimal, tilting and separable execution schedules."""

from .schedule import MixtureProfile, Schedule
from .scheduler import (
    kkt_multipliers,
    kkt_residual,
    liquidity_vol_alloc,
    optimal_schedule,
    profile_vol_alloc,
    separable_vwap_schedule,
    tilt_direction,
    tilting_schedule,
)
from .qp_oracle import QPResult, qp_oracle

__all__ = [
    "MixtureProfile", "Schedule", "kkt_multipliers", "kkt_residual", "liquidity_vol_alloc",
    "optimal_schedule", "profile_vol_alloc", "separable_vwap_schedule", "tilt_direction",
    "tilting_schedule", "QPResult", "qp_oracle",
]
