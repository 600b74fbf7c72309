# utils/analysis/cost_ratio.py
"""
Cost of separable execution relative to the coupled optimum

Single-fund (K=1) parametric setting: daily liquidity (Ψ̄_id, ψ̄_f, w),
mixture profile (θ, α, β) and target x0. All quantities below are in
closed form; direct_cost_ratio recomputes the ratio from the schedules.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from ..config_manager import NumericsConfig
from ..errors import CrossImpactError, DimensionMismatchError, InvalidModelError
from ..execution.schedule import MixtureProfile
from ..execution.scheduler import optimal_schedule, profile_vol_alloc, separable_vwap_schedule
from ..impact.impact_matrix import total_cost
from ..impact.liquidity import Infeasible, IntradayLiquidity, LiquidityModel
from ..logger_setup import setup_logger

logger = setup_logger(name="cost_ratio", level=logging.INFO)

ETA_SEARCH_LIMIT = 1e12


@dataclass(frozen=True)
class CostRatioInputs:
    daily: LiquidityModel
    profile: MixtureProfile
    x0: np.ndarray

    def __post_init__(self):
        _check_single_fund(self.daily)
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (self.daily.n_assets,):
            raise DimensionMismatchError(f"x0 has shape {x0.shape}, expected ({self.daily.n_assets},)")
        if not np.any(x0):
            raise InvalidModelError("the cost ratio is undefined for x0 = 0")
        object.__setattr__(self, "x0", x0)


@dataclass(frozen=True)
class CostRatioReport:
    upsilon: float
    eta1: float
    gamma: np.ndarray
    delta: float
    base_term: float
    tilt_term: float
    orthogonal: bool
    theta: float


@dataclass(frozen=True)
class ExtremeRatios:
    upsilon_market: float
    upsilon_orth: float
    which_is_max: str  # 'market', 'orth' or 'equal'
    delta: float


@dataclass(frozen=True)
class SingleStockRatio:
    asset: int
    upsilon: float
    eta1_i: float
    argmax_asset: int


def _check_single_fund(daily: LiquidityModel) -> None:
    if daily.n_funds != 1:
        raise InvalidModelError(f"closed-form cost ratios need exactly one fund, got K={daily.n_funds}")
    daily.require_positive_single_stock("the cost ratio")
    if daily.psi_f[0] <= 0:
        raise InvalidModelError("the fund must carry strictly positive liquidity")


def liquidity_ratio(daily: LiquidityModel) -> float:
    """η₁ = ψ̄_f·wᵀΨ̄_id⁻¹w."""
    _check_single_fund(daily)
    w = daily.W[:, 0]
    return float(daily.psi_f[0] * np.sum(w * w / daily.psi_id))


def base_term(profile: MixtureProfile) -> float:
    """1 + θ²(Σβ_t²/α_t − 1), the ratio for targets orthogonal to the fund."""
    profile.require_positive_alpha("the cost ratio")
    return 1.0 + profile.theta ** 2 * (float(np.sum(profile.beta ** 2 / profile.alpha)) - 1.0)


def intraday_variation(profile: MixtureProfile, eta1: float, theta: Optional[float] = None) -> float:
    """
    Δ = Σ_t α_t(1 − θ(1 − γ_t))²(1 − γ_t)/(1 + η₁γ_t).

    Args:
        profile: Mixture profile (α_t > 0)
        eta1: Liquidity ratio η₁ ≥ 0
        theta: Override of profile.theta (used by threshold searches)
    """
    theta = profile.theta if theta is None else theta
    gamma = profile.gamma()
    alpha = profile.alpha
    return float(np.sum(alpha * (1.0 - theta * (1.0 - gamma)) ** 2 * (1.0 - gamma) / (1.0 + eta1 * gamma)))


def cost_ratio(inputs: CostRatioInputs, numerics: Optional[NumericsConfig] = None) -> CostRatioReport:
    """
    Closed-form Υ(x0) = total cost of separable / total cost of optimal execution.

    Args:
        inputs: Daily single-fund model, mixture profile and target
        numerics: Orthogonality tolerance for wᵀΨ̄_id⁻¹x0 = 0

    Returns:
        CostRatioReport with Υ and its building blocks
    """
    numerics = numerics or NumericsConfig()
    daily, profile, x0 = inputs.daily, inputs.profile, inputs.x0
    eta1 = liquidity_ratio(daily)
    base = base_term(profile)
    delta = intraday_variation(profile, eta1)

    w = daily.W[:, 0]
    psi_f = daily.psi_f[0]
    a = float(np.sum(w * x0 / daily.psi_id))
    q = float(np.sum(x0 * x0 / daily.psi_id))
    s = float(np.sum(w * w / daily.psi_id))

    orthogonal = abs(a) <= numerics.orthogonality_tolerance * np.sqrt(q * s)
    if orthogonal:
        tilt = 0.0
    else:
        tilt = delta / ((q / (a * a)) * (1.0 + eta1) / psi_f - 1.0)

    upsilon = base + tilt
    if upsilon < 1.0 - 1e-12:
        logger.warning(f"cost ratio {upsilon:.17g} fell below 1; check the inputs for round-off")
    return CostRatioReport(upsilon, eta1, profile.gamma(), delta, base, tilt, bool(orthogonal), profile.theta)


def direct_cost_ratio(inputs: CostRatioInputs, numerics: Optional[NumericsConfig] = None) -> float:
    """Υ from the separable and optimal schedules of the parametric intraday model."""
    daily, profile = inputs.daily, inputs.profile
    profile.require_positive_alpha("the direct cost ratio")
    liq = IntradayLiquidity.from_profile(daily, profile.alpha, profile.beta)
    separable = separable_vwap_schedule(profile_vol_alloc(profile, daily.n_assets), inputs.x0)
    optimal = optimal_schedule(liq, inputs.x0, numerics)
    separable_cost = total_cost(liq, separable, numerics)
    optimal_cost = total_cost(liq, optimal, numerics)
    if isinstance(separable_cost, Infeasible) or isinstance(optimal_cost, Infeasible):
        raise CrossImpactError("a schedule of the parametric model has infinite cost")
    return separable_cost / optimal_cost


def cost_ratio_extremes(daily: LiquidityModel, profile: MixtureProfile) -> ExtremeRatios:
    """
    Largest and smallest Υ over all targets.

    They sit at x0 = w (Υ_market = base + η₁Δ) and at any x0 with
    wᵀΨ̄_id⁻¹x0 = 0 (Υ_orth = base); the sign of Δ says which is larger.
    """
    eta1 = liquidity_ratio(daily)
    base = base_term(profile)
    delta = intraday_variation(profile, eta1)
    market = base + eta1 * delta
    which = "market" if delta > 0 else "orth" if delta < 0 else "equal"
    return ExtremeRatios(market, base, which, delta)


def market_ratio(profile: MixtureProfile, eta1: float) -> float:
    """Υ_market as a function of the free liquidity ratio η₁."""
    return base_term(profile) + eta1 * intraday_variation(profile, eta1)


def market_ratio_curve(daily: LiquidityModel, profile: MixtureProfile,
                       eta1_grid: Sequence[float]) -> List[tuple]:
    """
    Υ_market over a grid of η₁, the fund liquidity ψ̄_f being rescaled to
    η₁/(wᵀΨ̄_id⁻¹w) with w and Ψ̄_id fixed.

    The curve decreases up to η₁ = θ/(1−θ), where it equals 1, and rises
    afterwards towards 1 + (1−θ)²(Σα_t²/β_t − 1).

    Returns:
        List of (eta1, upsilon_market) pairs in grid order
    """
    _check_single_fund(daily)
    if profile.theta >= 1.0:
        raise InvalidModelError("theta = 1 puts the turning point θ/(1−θ) at infinity")
    grid = np.asarray(list(eta1_grid), dtype=float)
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise InvalidModelError("eta1 grid entries must be finite and non-negative")

    # Υ_market depends on ψ̄_f only through η₁, so the rescaled model is never built
    return [(float(eta1), market_ratio(profile, float(eta1))) for eta1 in grid]


def turning_point(profile: MixtureProfile) -> float:
    """θ/(1−θ), where Υ_market reaches 1."""
    if profile.theta >= 1.0:
        raise InvalidModelError("theta = 1 puts the turning point θ/(1−θ) at infinity")
    return profile.theta / (1.0 - profile.theta)


def single_stock_ratio(daily: LiquidityModel, profile: MixtureProfile, asset: int) -> SingleStockRatio:
    """
    Υ(e_i) = base + Δ·η₁ᵢ/(1 + η₁ − η₁ᵢ) with η₁ᵢ = w_i²ψ̄_f/ψ̄_id,i.

    Args:
        daily: Daily single-fund model
        profile: Mixture profile
        asset: Zero-based asset index

    Returns:
        SingleStockRatio, argmax_asset being the stock with the largest ratio
    """
    _check_single_fund(daily)
    if not 0 <= asset < daily.n_assets:
        raise DimensionMismatchError(f"asset index {asset} outside 0..{daily.n_assets - 1}")
    w = daily.W[:, 0]
    eta1 = liquidity_ratio(daily)
    eta1_each = w * w * daily.psi_f[0] / daily.psi_id
    base = base_term(profile)
    delta = intraday_variation(profile, eta1)
    upsilon = base + delta * eta1_each[asset] / (1.0 + eta1 - eta1_each[asset])
    loading = w * w / daily.psi_id
    argmax = int(np.argmax(loading)) if delta >= 0 else int(np.argmin(loading))
    return SingleStockRatio(asset, float(upsilon), float(eta1_each[asset]), argmax)


def theta_bound_summary(profile: MixtureProfile) -> Union[float, Infeasible]:
    """
    Worst-case ratio as η₁ → ∞: 1 + (1−θ)²(Σα_t²/β_t − 1).

    Returns:
        The bound, or Infeasible when some period has α_t > 0 but β_t = 0
    """
    alpha, beta = profile.alpha, profile.beta
    starved = (beta == 0) & (alpha > 0)
    if np.any(starved):
        period = int(np.flatnonzero(starved)[0]) + 1
        return Infeasible(f"beta is zero in period {period}, the limit is infinite")
    active = beta > 0
    concentration = float(np.sum(alpha[active] ** 2 / beta[active]))
    return 1.0 + (1.0 - profile.theta) ** 2 * (concentration - 1.0)


def delta_threshold_theta(eta1: float, profile: MixtureProfile) -> float:
    """
    θ* in [0, 1] where Δ changes sign at fixed η₁ (Δ ≥ 0 below it).

    Δ(0) ≥ 0 and Δ(1) ≤ 0 always hold, so a bracketing root search applies.
    """
    def variation(theta: float) -> float:
        return intraday_variation(profile, eta1, theta)

    low, high = variation(0.0), variation(1.0)
    if low <= 0:
        return 0.0
    if high >= 0:
        return 1.0
    return float(brentq(variation, 0.0, 1.0, xtol=1e-14))


def delta_threshold_eta(profile: MixtureProfile) -> float:
    """
    η₁* ≥ θ/(1−θ) beyond which Δ turns positive at fixed θ.

    Returns:
        The threshold, or inf when Δ stays non-positive up to 1e12
    """
    start = turning_point(profile)

    def variation(eta1: float) -> float:
        return intraday_variation(profile, eta1)

    if variation(start) >= 0:
        return start
    high = max(1.0, 2.0 * start)
    while variation(high) <= 0:
        if high >= ETA_SEARCH_LIMIT:
            return float("inf")
        high *= 2.0
    return float(brentq(variation, start, high, xtol=1e-12, rtol=1e-14))
