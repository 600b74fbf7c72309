# utils/calibration/profiles.py
"""
Intraday volume statistics and mixture calibration

compute_profiles turns a (day, period, asset) volume panel into the
cross-sectional volume profile and the average pairwise volume correlation
per period. forward_profiles maps a mixture profile (θ, α, β) to the same
two statistics; calibrate inverts that map.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..config_manager import CalibrationConfig
from ..errors import CalibrationError, DimensionMismatchError, InvalidModelError
from ..execution.schedule import MixtureProfile
from ..logger_setup import setup_logger

logger = setup_logger(name="calibration", level=logging.INFO)

VOL_ALLOC_SUM_TOLERANCE = 1e-9
ZERO_VARIANCE_RATIO = 1e-12


@dataclass(frozen=True)
class VolumePanel:
    """Notional volume DVol[d, t, i] (dollars) with day/period/asset labels."""
    dvol: np.ndarray
    days: Tuple[int, ...] = ()
    periods: Tuple[int, ...] = ()
    assets: Tuple[str, ...] = ()

    def __post_init__(self):
        dvol = np.asarray(self.dvol, dtype=float)
        if dvol.ndim != 3:
            raise DimensionMismatchError(f"volume panel must be (days, periods, assets), got shape {dvol.shape}")
        if not np.all(np.isfinite(dvol)) or np.any(dvol < 0):
            raise InvalidModelError("volumes must be finite and non-negative")
        D, T, N = dvol.shape
        days = tuple(self.days) or tuple(range(1, D + 1))
        periods = tuple(self.periods) or tuple(range(1, T + 1))
        assets = tuple(self.assets) or tuple(f"asset_{i + 1}" for i in range(N))
        if (len(days), len(periods), len(assets)) != dvol.shape:
            raise DimensionMismatchError(
                f"labels describe {(len(days), len(periods), len(assets))} but volumes have shape {dvol.shape}")
        dvol.setflags(write=False)
        object.__setattr__(self, "dvol", dvol)
        object.__setattr__(self, "days", days)
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "assets", assets)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.dvol.shape


@dataclass(frozen=True)
class MarketProfiles:
    """
    Observed intraday profiles.

    avg_vol_alloc: (T,) cross-sectional average share of daily volume, sums to 1
    avg_correl:    T entries, None where no pair had a defined correlation
    """
    avg_vol_alloc: np.ndarray
    avg_correl: Tuple[Optional[float], ...]

    def __post_init__(self):
        vol = np.asarray(self.avg_vol_alloc, dtype=float).ravel()
        correl = tuple(None if c is None else float(c) for c in self.avg_correl)
        if vol.size < 1 or vol.size != len(correl):
            raise DimensionMismatchError(f"{vol.size} volume shares but {len(correl)} correlations")
        if not np.all(np.isfinite(vol)) or np.any(vol < 0):
            raise InvalidModelError("volume shares must be finite and non-negative")
        if abs(vol.sum() - 1.0) > VOL_ALLOC_SUM_TOLERANCE:
            raise InvalidModelError(f"volume shares sum to {vol.sum():.17g}, expected 1")
        for t, c in enumerate(correl, start=1):
            if c is not None and not -1.0 <= c <= 1.0:
                raise InvalidModelError(f"correlation {c} of period {t} is outside [-1, 1]")
        vol.setflags(write=False)
        object.__setattr__(self, "avg_vol_alloc", vol)
        object.__setattr__(self, "avg_correl", correl)

    @property
    def periods(self) -> int:
        return self.avg_vol_alloc.size

    def correl_array(self) -> np.ndarray:
        """Correlations with NaN in place of missing entries."""
        return np.array([np.nan if c is None else c for c in self.avg_correl])


@dataclass(frozen=True)
class ProfileStatistics:
    profiles: MarketProfiles
    vol_alloc: np.ndarray  # (T, N)
    correl: np.ndarray  # (T, N, N), NaN where undefined
    valid_pairs: np.ndarray  # (T, N, N) bool, diagonal False
    excluded_pairs: int
    days: int


@dataclass(frozen=True)
class CalibrationResult:
    profile: MixtureProfile
    residual: float
    consistent: bool
    clipped_periods: int
    forward_error: float
    alpha_sum: float
    beta_sum: float
    method: str = field(default="root")


def _day_sum_of_products(centered: np.ndarray) -> np.ndarray:
    """Σ_d x_di·x_dj with math.fsum, so the result does not depend on the order of days."""
    N = centered.shape[1]
    cov = np.empty((N, N))
    for i in range(N):
        for j in range(i, N):
            cov[i, j] = cov[j, i] = math.fsum(centered[:, i] * centered[:, j])
    return cov


def compute_profiles(panel: VolumePanel) -> ProfileStatistics:
    """
    Volume profile and average pairwise volume correlation per period.

    VolAlloc_it is the day-averaged volume of period t over the day-averaged
    daily volume of asset i; Correl_ijt is the Pearson correlation across
    days. Pairs with a zero-variance asset are excluded from the average.

    Args:
        panel: Volume panel with at least two days

    Returns:
        ProfileStatistics with the averaged profiles and the per-asset detail
    """
    D, T, N = panel.shape
    if D < 2:
        raise CalibrationError(f"correlations need at least two days, got {D}")
    mean = np.apply_along_axis(math.fsum, 0, panel.dvol) / D  # (T, N)
    daily_mean = mean.sum(axis=0)
    silent = np.flatnonzero(daily_mean <= 0)
    if silent.size:
        raise CalibrationError(f"asset '{panel.assets[silent[0]]}' never trades")
    vol_alloc = mean / daily_mean

    correl = np.full((T, N, N), np.nan)
    valid = np.zeros((T, N, N), dtype=bool)
    off_diagonal = ~np.eye(N, dtype=bool)
    for t in range(T):
        centered = panel.dvol[:, t, :] - mean[t]
        cov = _day_sum_of_products(centered)
        std = np.sqrt(np.diag(cov))
        varies = std > ZERO_VARIANCE_RATIO * np.sqrt(D) * np.abs(mean[t])
        valid[t] = varies[:, None] & varies[None, :] & off_diagonal
        with np.errstate(divide="ignore", invalid="ignore"):
            values = cov / np.outer(std, std)
        correl[t][valid[t]] = np.clip(values[valid[t]], -1.0, 1.0)

    avg_correl = []
    for t in range(T):
        pairs = correl[t][valid[t]]
        avg_correl.append(float(pairs.mean()) if pairs.size else None)

    excluded = int(T * N * (N - 1) - valid.sum())
    if excluded:
        logger.warning(f"Excluded {excluded} asset pair/period cells with zero volume variance")
    profiles = MarketProfiles(vol_alloc.mean(axis=1), tuple(avg_correl))
    return ProfileStatistics(profiles, vol_alloc, correl, valid, excluded, D)


def forward_profiles(profile: MixtureProfile) -> MarketProfiles:
    """
    Volume and correlation profiles implied by a mixture profile.

    vol_alloc_t = α_t(1−θ) + β_tθ and correl_t = β_tθ²/(α_t(1−θ)² + β_tθ²);
    a period where neither flow contributes variance has no correlation.
    """
    theta = profile.theta
    single = profile.alpha * (1.0 - theta) ** 2
    common = profile.beta * theta ** 2
    denominator = single + common
    correl = tuple(None if d == 0 else float(c / d) for c, d in zip(common, denominator))
    return MarketProfiles(profile.vol_alloc(), correl)


def fund_flow_share(profile: MixtureProfile) -> np.ndarray:
    """Share of period-t volume coming from index-fund flow, β_tθ/(α_t(1−θ) + β_tθ)."""
    fund = profile.beta * profile.theta
    total = profile.vol_alloc()
    return np.divide(fund, total, out=np.zeros_like(fund), where=total > 0)


def _inverted_intensities(theta: float, vol: np.ndarray, correl: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    k = correl * (1.0 - theta) ** 2 / ((1.0 - correl) * theta ** 2)
    alpha = vol / ((1.0 - theta) + k * theta)
    return alpha, k * alpha


def calibrate(observed: MarketProfiles, config: Optional[CalibrationConfig] = None) -> CalibrationResult:
    """
    Recover (θ, α, β) from observed volume and correlation profiles.

    For a candidate θ each period inverts to α_t(θ), β_t(θ) in closed form;
    θ minimizes (Σα_t − 1)² + (Σβ_t − 1)². Because (1−θ)Σα_t + θΣβ_t equals
    the total volume share for every θ and Σα_t increases with θ, the
    minimum sits at the root of Σα_t(θ) = 1 whenever the bracket holds one;
    otherwise a bounded scalar search is used.

    Args:
        observed: Volume shares and average correlations (T ≥ 2)
        config: Bracket, θ tolerance and residual threshold

    Returns:
        CalibrationResult; inconsistent data is reported, not raised
    """
    config = config or CalibrationConfig()
    if observed.periods < 2:
        raise CalibrationError("calibration needs at least two periods")
    missing = [t + 1 for t, c in enumerate(observed.avg_correl) if c is None]
    if missing:
        raise CalibrationError(f"correlation is missing in period(s) {missing}")

    vol = observed.avg_vol_alloc
    correl = observed.correl_array()
    negative = correl < 0
    if negative.any():
        logger.warning(f"Clipping {int(negative.sum())} negative correlation(s) to 0; the model cannot produce them")
        correl = np.where(negative, 0.0, correl)
    if np.any(correl >= 1.0):
        period = int(np.flatnonzero(correl >= 1.0)[0]) + 1
        raise CalibrationError(f"correlation of period {period} is 1; the single-stock intensity would vanish")

    def alpha_gap(theta: float) -> float:
        return float(np.sum(_inverted_intensities(theta, vol, correl)[0])) - 1.0

    def objective(theta: float) -> float:
        alpha, beta = _inverted_intensities(theta, vol, correl)
        return (alpha.sum() - 1.0) ** 2 + (beta.sum() - 1.0) ** 2

    low, high = config.bracket_low, config.bracket_high
    if alpha_gap(low) * alpha_gap(high) < 0:
        theta = float(brentq(alpha_gap, low, high, xtol=config.theta_tolerance, rtol=4 * np.finfo(float).eps))
        method = "root"
    else:
        search = minimize_scalar(objective, bounds=(low, high), method="bounded",
                                 options={"xatol": config.theta_tolerance})
        theta = float(search.x)
        method = "bounded"

    alpha, beta = _inverted_intensities(theta, vol, correl)
    alpha_sum, beta_sum = float(alpha.sum()), float(beta.sum())
    residual = float(np.hypot(alpha_sum - 1.0, beta_sum - 1.0))
    if alpha_sum <= 0 or beta_sum <= 0:
        raise CalibrationError("the observed profiles imply an all-zero intensity profile")
    profile = MixtureProfile.normalized(theta, alpha, beta)

    implied = forward_profiles(profile)
    forward_error = float(max(np.max(np.abs(implied.avg_vol_alloc - vol)),
                              np.nanmax(np.abs(implied.correl_array() - correl))))
    consistent = residual <= config.residual_threshold
    if not consistent:
        logger.warning(f"Calibration residual {residual:.3e} exceeds {config.residual_threshold:.0e}: "
                       f"the profiles are not consistent with the mixture model")
    logger.info(f"Calibrated theta = {theta:.6f} ({method}, residual {residual:.3e})")
    return CalibrationResult(profile, residual, consistent, int(negative.sum()), forward_error,
                             alpha_sum, beta_sum, method)

