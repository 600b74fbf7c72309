# utils/estimation/records.py
"""
Transaction records and the reduced-form shortfall model

A record carries a notional trade ṽ, realized shortfall returns r̄, the
day's dollar-weighted fund matrix W̃, volume/volatility forecasts and the
noise covariance Σ̂. With coefficients (γ_id, γ_f) the model reads

    r̄ = ½ G̃⁻¹ṽ + ε,   G̃ = γ_id·D_id + W̃·D_f·W̃ᵀ,   ε ~ N(0, Σ̂)

with D_id = diag(DVol̂/σ̂) and D_f = diag(γ_f·DVol̂_f/σ̂_f).
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ..errors import DimensionMismatchError, IllConditionedError, InvalidModelError
from ..impact.impact_matrix import build_impact_matrix
from ..impact.liquidity import LiquidityModel


def _frozen(values, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    if ndim == 2 and array.size == 0:
        array = array.reshape(array.shape[0] if array.ndim else 0, 0)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ImpactCoefficients:
    gamma_id: float
    gamma_f: np.ndarray

    def __post_init__(self):
        gamma_f = _frozen(np.atleast_1d(self.gamma_f).ravel(), 1)
        if not np.isfinite(self.gamma_id) or self.gamma_id <= 0:
            raise InvalidModelError(f"gamma_id must be strictly positive, got {self.gamma_id}")
        if not np.all(np.isfinite(gamma_f)) or np.any(gamma_f <= 0):
            raise InvalidModelError("gamma_f entries must be strictly positive")
        object.__setattr__(self, "gamma_id", float(self.gamma_id))
        object.__setattr__(self, "gamma_f", gamma_f)

    @property
    def n_funds(self) -> int:
        return self.gamma_f.size

    def to_log(self) -> np.ndarray:
        return np.log(np.concatenate([[self.gamma_id], self.gamma_f]))

    @classmethod
    def from_log(cls, x: np.ndarray) -> "ImpactCoefficients":
        values = np.exp(np.asarray(x, dtype=float))
        return cls(values[0], values[1:])

    def relative_error(self, truth: "ImpactCoefficients") -> float:
        """Largest relative deviation from another coefficient set."""
        mine = np.concatenate([[self.gamma_id], self.gamma_f])
        other = np.concatenate([[truth.gamma_id], truth.gamma_f])
        return float(np.max(np.abs(mine - other) / other))


@dataclass(frozen=True)
class TransactionRecord:
    v_tilde: np.ndarray
    r_bar: np.ndarray
    W_tilde: np.ndarray
    dvol_hat: np.ndarray
    sigma_hat: np.ndarray
    dvol_f_hat: np.ndarray
    sigma_f_hat: np.ndarray
    sigma_noise: np.ndarray

    def __post_init__(self):
        v = _frozen(np.ravel(self.v_tilde), 1)
        n = v.size
        W = np.asarray(self.W_tilde, dtype=float)
        W = _frozen(W.reshape(n, -1) if W.size else np.zeros((n, 0)), 2)
        k = W.shape[1]
        shapes = {
            "r_bar": (np.ravel(self.r_bar), (n,)),
            "dvol_hat": (np.ravel(self.dvol_hat), (n,)),
            "sigma_hat": (np.ravel(self.sigma_hat), (n,)),
            "dvol_f_hat": (np.ravel(self.dvol_f_hat), (k,)),
            "sigma_f_hat": (np.ravel(self.sigma_f_hat), (k,)),
            "sigma_noise": (np.asarray(self.sigma_noise, dtype=float), (n, n)),
        }
        for name, (value, shape) in shapes.items():
            if value.shape != shape:
                raise DimensionMismatchError(f"{name} has shape {value.shape}, expected {shape}")
        arrays = {name: _frozen(value, len(shape)) for name, (value, shape) in shapes.items()}
        for name in ("dvol_hat", "sigma_hat", "dvol_f_hat", "sigma_f_hat"):
            if not np.all(np.isfinite(arrays[name])) or np.any(arrays[name] <= 0):
                raise InvalidModelError(f"{name} forecasts must be strictly positive")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(arrays["r_bar"])) and np.all(np.isfinite(W))):
            raise InvalidModelError("record contains non-finite values")
        noise = arrays["sigma_noise"]
        scale = max(np.abs(noise).max(), np.finfo(float).tiny)
        if np.abs(noise - noise.T).max() > 1e-12 * scale:
            raise InvalidModelError("noise covariance is not symmetric")
        try:
            linalg.cholesky(noise, lower=True)
        except linalg.LinAlgError:
            raise InvalidModelError("noise covariance is not positive definite") from None

        object.__setattr__(self, "v_tilde", v)
        object.__setattr__(self, "W_tilde", W)
        for name, value in arrays.items():
            object.__setattr__(self, name, value)

    @property
    def n_assets(self) -> int:
        return self.v_tilde.size

    @property
    def n_funds(self) -> int:
        return self.W_tilde.shape[1]


def liquidity_from_forecasts(coef: ImpactCoefficients, dvol_hat, sigma_hat, W_tilde,
                             dvol_f_hat, sigma_f_hat) -> LiquidityModel:
    """
    Reduced-form liquidity in notional units.

    ψ_id,i = γ_id·DVol̂_i/σ̂_i and ψ_f,k = γ_f,k·DVol̂_f,k/σ̂_f,k; the model
    can be handed to the scheduler to plan with estimated coefficients.
    """
    W_tilde = np.asarray(W_tilde, dtype=float)
    if W_tilde.shape[1] != coef.n_funds:
        raise DimensionMismatchError(f"{coef.n_funds} fund coefficients for {W_tilde.shape[1]} funds")
    psi_id = coef.gamma_id * np.asarray(dvol_hat) / np.asarray(sigma_hat)
    psi_f = coef.gamma_f * np.asarray(dvol_f_hat) / np.asarray(sigma_f_hat)
    return LiquidityModel(psi_id, psi_f, W_tilde)


def record_liquidity(rec: TransactionRecord, coef: ImpactCoefficients) -> LiquidityModel:
    return liquidity_from_forecasts(coef, rec.dvol_hat, rec.sigma_hat, rec.W_tilde, rec.dvol_f_hat, rec.sigma_f_hat)


def predict_shortfall(rec: TransactionRecord, coef: ImpactCoefficients) -> np.ndarray:
    """
    Expected shortfall returns ½G̃⁻¹ṽ of one record.

    Args:
        rec: Transaction record
        coef: Impact coefficients (one γ_f per fund of the record)

    Returns:
        Length-N return vector
    """
    impact = build_impact_matrix(record_liquidity(rec, coef))
    return 0.5 * impact.matvec(rec.v_tilde)


class RecordBatch:
    """Records of one shape stacked for vectorized prediction and likelihood."""

    def __init__(self, records: Sequence[TransactionRecord]):
        if not records:
            raise InvalidModelError("a record batch needs at least one record")
        shape = (records[0].n_assets, records[0].n_funds)
        if any((r.n_assets, r.n_funds) != shape for r in records):
            raise DimensionMismatchError("records in a batch must share (N, K)")
        self.records = list(records)
        self.n_assets, self.n_funds = shape
        self.v = np.stack([r.v_tilde for r in records])
        self.r = np.stack([r.r_bar for r in records])
        self.W = np.stack([r.W_tilde for r in records])
        self.d_id = np.stack([r.dvol_hat / r.sigma_hat for r in records])
        self.d_f = np.stack([r.dvol_f_hat / r.sigma_f_hat for r in records])
        self.precision = np.linalg.inv(np.stack([r.sigma_noise for r in records]))

    def __len__(self) -> int:
        return len(self.records)

    def predict(self, coef: ImpactCoefficients) -> np.ndarray:
        return batched_prediction(self.v, self.W, self.d_id, self.d_f, coef)

    def quadratic_terms(self, coef: ImpactCoefficients) -> np.ndarray:
        """(r̄ − pred)ᵀΣ̂⁻¹(r̄ − pred) per record."""
        residual = self.r - self.predict(coef)
        return np.einsum("rn,rnm,rm->r", residual, self.precision, residual)


def batched_prediction(v: np.ndarray, W: np.ndarray, d_id: np.ndarray, d_f: np.ndarray,
                       coef: ImpactCoefficients) -> np.ndarray:
    """½G̃⁻¹ṽ for stacked records through the Woodbury identity (K×K solves)."""
    if W.shape[2] != coef.n_funds:
        raise DimensionMismatchError(f"{coef.n_funds} fund coefficients for {W.shape[2]} funds")
    psi_id = coef.gamma_id * d_id
    y = v / psi_id
    if W.shape[2] == 0:
        return 0.5 * y
    psi_f = coef.gamma_f * d_f
    scaled_W = W / psi_id[:, :, None]
    inner = np.einsum("rnk,rnl->rkl", W, scaled_W)
    inner[:, np.arange(W.shape[2]), np.arange(W.shape[2])] += 1.0 / psi_f
    try:
        correction = np.linalg.solve(inner, np.einsum("rnk,rn->rk", W, y)[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        raise IllConditionedError("a record's fund core matrix is singular") from None
    return 0.5 * (y - np.einsum("rnk,rk->rn", scaled_W, correction))


def group_records(records: Union[RecordBatch, Sequence[TransactionRecord]]) -> List[RecordBatch]:
    """Split records into batches of identical (N, K)."""
    if isinstance(records, RecordBatch):
        return [records]
    records = list(records)
    if records and all(isinstance(r, RecordBatch) for r in records):
        return records
    if not records:
        raise InvalidModelError("log-likelihood needs at least one record")
    groups: Dict[Tuple[int, int], List[TransactionRecord]] = {}
    for rec in records:
        groups.setdefault((rec.n_assets, rec.n_funds), []).append(rec)
    return [RecordBatch(group) for group in groups.values()]


def log_likelihood(records, coef: ImpactCoefficients) -> float:
    """
    L = −Σ_records (r̄ − ½G̃⁻¹ṽ)ᵀΣ̂⁻¹(r̄ − ½G̃⁻¹ṽ).

    Args:
        records: TransactionRecords or prepared RecordBatches
        coef: Impact coefficients

    Returns:
        Log-likelihood without the Gaussian constant (0 at a perfect fit)
    """
    return -math.fsum(term for batch in group_records(records) for term in batch.quadratic_terms(coef))


def log_likelihood_gradient(records, coef: ImpactCoefficients, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of the log-likelihood in (log γ_id, log γ_f)."""
    batches = group_records(records)
    x = coef.to_log()
    gradient = np.empty_like(x)
    for j in range(x.size):
        shift = np.zeros_like(x)
        shift[j] = step
        upper = log_likelihood(batches, ImpactCoefficients.from_log(x + shift))
        lower = log_likelihood(batches, ImpactCoefficients.from_log(x - shift))
        gradient[j] = (upper - lower) / (2.0 * step)
    return gradient


def simulate_records(true_coef: ImpactCoefficients, n_records: int, noise_scale: float, seed: int,
                     n_assets: int = 5) -> List[TransactionRecord]:
    """
    Synthetic records drawn around known coefficients.

    Forecasts ~ U(0.5, 2), fund weights ~ U(0, 1), trades ~ N(0, 1) and
    Σ̂ = AAᵀ/N + diag(U(0.5, 1.5)); returns are the model prediction plus
    N(0, noise_scale²·Σ̂) noise.

    Args:
        true_coef: Coefficients that generate the returns (K = its fund count)
        n_records: Number of records
        noise_scale: Noise standard-deviation multiplier (0 for exact returns)
        seed: Seed of numpy's default generator
        n_assets: Assets per record

    Returns:
        List of TransactionRecord
    """
    if n_records < 1:
        raise InvalidModelError(f"need at least one record, got {n_records}")
    if n_assets < max(1, true_coef.n_funds):
        raise InvalidModelError(f"{n_assets} assets cannot carry {true_coef.n_funds} independent funds")
    rng = np.random.default_rng(seed)
    R, N, K = n_records, n_assets, true_coef.n_funds
    dvol = rng.uniform(0.5, 2.0, (R, N))
    sigma = rng.uniform(0.5, 2.0, (R, N))
    dvol_f = rng.uniform(0.5, 2.0, (R, K))
    sigma_f = rng.uniform(0.5, 2.0, (R, K))
    W = rng.uniform(0.0, 1.0, (R, N, K))
    v = rng.standard_normal((R, N))
    A = rng.standard_normal((R, N, N))
    noise_cov = np.einsum("rij,rkj->rik", A, A) / N
    noise_cov[:, np.arange(N), np.arange(N)] += rng.uniform(0.5, 1.5, (R, N))
    noise_cov = 0.5 * (noise_cov + np.transpose(noise_cov, (0, 2, 1)))
    z = rng.standard_normal((R, N))

    prediction = batched_prediction(v, W, dvol / sigma, dvol_f / sigma_f, true_coef)
    noise = np.einsum("rij,rj->ri", np.linalg.cholesky(noise_cov), z)
    returns = prediction + noise_scale * noise if noise_scale else prediction
    return [
        TransactionRecord(v[i], returns[i], W[i], dvol[i], sigma[i], dvol_f[i], sigma_f[i], noise_cov[i])
        for i in range(R)
    ]
