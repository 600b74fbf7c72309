# utils/execution/scheduler.py
"""
Closed-form execution schedules

The coupled optimum trades v_t = L_t·L̄⁻¹x0, where L_t = Ψ_id,t + WΨ_f,tWᵀ
is the liquidity of period t and L̄ the daily total. Only L̄ is inverted
(Woodbury), so periods without single-stock or fund liquidity are fine.
"""

import logging
from typing import Optional

import numpy as np

from ..config_manager import NumericsConfig
from ..errors import DimensionMismatchError, InvalidModelError
from ..impact.impact_matrix import build_impact_matrix
from ..impact.liquidity import IntradayLiquidity, LiquidityModel
from ..logger_setup import setup_logger
from .schedule import MixtureProfile, Schedule

logger = setup_logger(name="scheduler", level=logging.INFO)

VOL_ALLOC_TOLERANCE = 1e-9


def _check_target(x0, n_assets: int) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n_assets,):
        raise DimensionMismatchError(f"x0 has shape {x0.shape}, expected ({n_assets},)")
    if not np.all(np.isfinite(x0)):
        raise InvalidModelError("x0 contains non-finite values")
    return x0


def optimal_schedule(liq: IntradayLiquidity, x0, numerics: Optional[NumericsConfig] = None) -> Schedule:
    """
    Unique minimizer of Σ_t ½v_tᵀG_tv_t subject to Σ_t v_t = x0.

    Args:
        liq: Per-period liquidity sharing one set of fund weights
        x0: Target position change in shares
        numerics: Condition and dense limits for the daily-total inversion

    Returns:
        The coupled optimal Schedule
    """
    x0 = _check_target(x0, liq.n_assets)
    if liq.n_funds == 0:
        # same arithmetic as the separable split, so both round identically
        return Schedule(liquidity_vol_alloc(liq) * x0, x0, label="optimal")
    total = build_impact_matrix(liq.total(), numerics)
    multiplier = total.matvec(x0)  # λ = L̄⁻¹x0, shared by every period
    v = np.stack([model.single_stock_part(multiplier) + model.fund_part(multiplier) for model in liq])
    logger.debug(f"Optimal schedule over {liq.periods} periods, fund core condition {total.condition_number:.3e}")
    return Schedule(v, x0, label="optimal")


def tilt_direction(daily: LiquidityModel, x0, numerics: Optional[NumericsConfig] = None) -> np.ndarray:
    """WŴᵀx0 with Ŵ = Ψ̄_id⁻¹W(Ψ̄_f⁻¹ + WᵀΨ̄_id⁻¹W)⁻¹."""
    x0 = _check_target(x0, daily.n_assets)
    return daily.W @ build_impact_matrix(daily, numerics).fund_coordinates(x0)


def tilting_schedule(daily: LiquidityModel, profile: MixtureProfile, x0,
                     numerics: Optional[NumericsConfig] = None) -> Schedule:
    """
    Optimal schedule under parametric liquidity Ψ_id,t = α_tΨ̄_id, Ψ_f,t = β_tΨ̄_f.

    v_t = α_t·x0 + (β_t − α_t)·WŴᵀx0: the VWAP-like split of x0 tilted
    towards the fund portfolios when fund activity runs ahead of
    single-stock activity.
    """
    x0 = _check_target(x0, daily.n_assets)
    tilt = tilt_direction(daily, x0, numerics)
    alpha = profile.alpha[:, None]
    beta = profile.beta[:, None]
    return Schedule(alpha * x0 + (beta - alpha) * tilt, x0, label="tilting")


def separable_vwap_schedule(vol_alloc, x0) -> Schedule:
    """
    Split every order independently by its volume allocation.

    Args:
        vol_alloc: (T, N) per-period volume fractions, columns summing to 1
        x0: Target position change in shares

    Returns:
        Schedule with v_it = vol_alloc[t, i]·x0_i
    """
    vol_alloc = np.asarray(vol_alloc, dtype=float)
    if vol_alloc.ndim != 2:
        raise DimensionMismatchError(f"vol_alloc must be (T, N), got shape {vol_alloc.shape}")
    x0 = _check_target(x0, vol_alloc.shape[1])
    if np.any(vol_alloc < 0) or not np.all(np.isfinite(vol_alloc)):
        raise InvalidModelError("volume allocations must be finite and non-negative")
    sums = vol_alloc.sum(axis=0)
    bad = np.flatnonzero(np.abs(sums - 1.0) > VOL_ALLOC_TOLERANCE)
    if bad.size:
        raise InvalidModelError(f"volume allocation of asset {bad[0] + 1} sums to {sums[bad[0]]:.17g}, expected 1")
    return Schedule(vol_alloc * x0, x0, label="separable")


def profile_vol_alloc(profile: MixtureProfile, n_assets: int) -> np.ndarray:
    """α_t(1−θ) + β_tθ repeated for every asset, shape (T, N)."""
    return np.tile(profile.vol_alloc()[:, None], (1, n_assets))


def liquidity_vol_alloc(liq: IntradayLiquidity) -> np.ndarray:
    """ψ_id,it / Σ_s ψ_id,is, the VWAP split that is optimal without funds."""
    psi = np.stack([model.psi_id for model in liq])
    totals = psi.sum(axis=0)
    if np.any(totals <= 0):
        raise InvalidModelError("every asset needs single-stock liquidity in some period")
    return psi / totals


def kkt_multipliers(liq: IntradayLiquidity, schedule: Schedule,
                    numerics: Optional[NumericsConfig] = None) -> np.ndarray:
    """G_t v_t per period, shape (T, N); rows agree at the optimum."""
    if schedule.v.shape != (liq.periods, liq.n_assets):
        raise DimensionMismatchError(
            f"schedule has shape {schedule.v.shape}, expected ({liq.periods}, {liq.n_assets})")
    return np.stack([build_impact_matrix(model, numerics).matvec(v_t) for model, v_t in zip(liq, schedule.v)])


def kkt_residual(multipliers: np.ndarray) -> float:
    """max_t ‖λ_t − λ̄‖∞ / ‖λ̄‖∞ (0 for an all-zero multiplier)."""
    mean = multipliers.mean(axis=0)
    scale = np.max(np.abs(mean), initial=0.0)
    spread = np.max(np.abs(multipliers - mean), initial=0.0)
    if scale == 0:
        return 0.0 if spread == 0 else float("inf")
    return float(spread / scale)
