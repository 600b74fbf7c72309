# utils/execution/schedule.py
"""
Schedule and intraday mixture profile types
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatchError, InfeasibleScheduleError, InvalidModelError

PROFILE_SUM_TOLERANCE = 1e-12


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


def inventory_tolerance(x0: np.ndarray) -> float:
    return 1e-9 * max(1.0, float(np.max(np.abs(x0), initial=0.0)))


@dataclass(frozen=True)
class Schedule:
    """
    Shares traded per period.

    v:  (T, N) matrix, row t is the trade vector of period t (signed)
    x0: (N,) target; the rows must add up to it
    """
    v: np.ndarray
    x0: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        x0 = np.asarray(self.x0, dtype=float).ravel()
        if v.ndim != 2 or v.shape[0] < 1:
            raise DimensionMismatchError(f"schedule must be a (T, N) matrix, got shape {v.shape}")
        if v.shape[1] != x0.size:
            raise DimensionMismatchError(f"schedule has {v.shape[1]} assets but x0 has {x0.size}")
        if not np.all(np.isfinite(v)):
            raise InfeasibleScheduleError("schedule contains non-finite trades")
        gap = np.abs(v.sum(axis=0) - x0)
        if np.any(gap > inventory_tolerance(x0)):
            worst = int(np.argmax(gap))
            raise InfeasibleScheduleError(
                f"trades of asset {worst + 1} add up to {v[:, worst].sum():.17g}, target {x0[worst]:.17g}")
        object.__setattr__(self, "v", _frozen(v))
        object.__setattr__(self, "x0", _frozen(x0))

    @property
    def periods(self) -> int:
        return self.v.shape[0]

    @property
    def n_assets(self) -> int:
        return self.v.shape[1]

    def checksum(self) -> np.ndarray:
        """Column sums, equal to x0 up to the inventory tolerance."""
        return self.v.sum(axis=0)

    def respects_signs(self, tolerance: float = 0.0) -> bool:
        """True when every trade has the sign of its target (zero targets trade nothing)."""
        signs = np.sign(self.x0)
        return bool(np.all(self.v * signs >= -tolerance) and np.all(np.abs(self.v[:, signs == 0]) <= tolerance))

    @classmethod
    def zeros(cls, periods: int, n_assets: int, label: str = "") -> "Schedule":
        return cls(np.zeros((periods, n_assets)), np.zeros(n_assets), label)


@dataclass(frozen=True)
class MixtureProfile:
    """
    Intraday mixture of single-stock and index-fund activity.

    theta: index-fund share of daily volume, in [0, 1]
    alpha: single-stock intensity per period, non-negative, sums to 1
    beta:  index-fund intensity per period, non-negative, sums to 1
    """
    theta: float
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float).ravel()
        beta = np.asarray(self.beta, dtype=float).ravel()
        theta = float(self.theta)
        if alpha.size < 1 or alpha.shape != beta.shape:
            raise DimensionMismatchError(f"alpha has {alpha.size} periods, beta has {beta.size}")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta)) and np.isfinite(theta)):
            raise InvalidModelError("profile contains non-finite values")
        if not 0.0 <= theta <= 1.0:
            raise InvalidModelError(f"theta must lie in [0, 1], got {theta}")
        if np.any(alpha < 0) or np.any(beta < 0):
            raise InvalidModelError("intensity profiles must be non-negative")
        for name, values in (("alpha", alpha), ("beta", beta)):
            if abs(values.sum() - 1.0) > PROFILE_SUM_TOLERANCE:
                raise InvalidModelError(f"{name} sums to {values.sum():.17g}, expected 1")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "alpha", _frozen(alpha))
        object.__setattr__(self, "beta", _frozen(beta))

    @property
    def periods(self) -> int:
        return self.alpha.size

    def require_positive_alpha(self, operation: str) -> None:
        if not np.all(self.alpha > 0):
            raise InvalidModelError(f"{operation} requires every alpha_t to be strictly positive")

    def gamma(self) -> np.ndarray:
        """γ_t = β_t/α_t."""
        self.require_positive_alpha("gamma")
        return self.beta / self.alpha

    def vol_alloc(self) -> np.ndarray:
        """Share of daily volume per period, α_t(1−θ) + β_tθ."""
        return self.alpha * (1.0 - self.theta) + self.beta * self.theta

    def with_theta(self, theta: float) -> "MixtureProfile":
        return MixtureProfile(theta, self.alpha, self.beta)

    @classmethod
    def normalized(cls, theta: float, alpha: Sequence[float], beta: Sequence[float]) -> "MixtureProfile":
        """Build a profile after rescaling alpha and beta to unit sums."""
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if alpha.sum() <= 0 or beta.sum() <= 0:
            raise InvalidModelError("cannot normalize an all-zero intensity profile")
        return cls(theta, alpha / alpha.sum(), beta / beta.sum())
