"""Intraday volume statistics and mixture-profile calibration."""

from .profiles import (
    CalibrationResult,
    MarketProfiles,
    ProfileStatistics,
    VolumePanel,
    calibrate,
    compute_profiles,
    forward_profiles,
    fund_flow_share,
)

__all__ = [
    "CalibrationResult", "MarketProfiles", "ProfileStatistics", "VolumePanel", "calibrate",
    "compute_profiles", "forward_profiles", "fund_flow_share",
]
