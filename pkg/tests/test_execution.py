import numpy as np
import pytest

from conftest import random_intraday, random_model, random_profile
from utils.config_manager import QPConfig
from utils.errors import ConvergenceError, DimensionMismatchError, FormatError, InfeasibleScheduleError, InvalidModelError
from utils.execution import (
    MixtureProfile,
    Schedule,
    kkt_multipliers,
    kkt_residual,
    liquidity_vol_alloc,
    optimal_schedule,
    profile_vol_alloc,
    qp_oracle,
    separable_vwap_schedule,
    tilt_direction,
    tilting_schedule,
)
from utils.execution.qp_oracle import project_signed_simplex
from utils.execution.schedule_io import read_profile_csv, read_schedule_csv, write_profile_csv, write_schedule_csv
from utils.impact import IntradayLiquidity, LiquidityModel, total_cost


def test_closed_form_matches_qp_oracle(rng):
    for _ in range(50):
        n_assets = int(rng.integers(1, 7))
        liq = random_intraday(rng, int(rng.integers(2, 9)), n_assets, int(rng.integers(0, min(2, n_assets) + 1)))
        x0 = rng.standard_normal(n_assets)
        optimal = optimal_schedule(liq, x0)
        oracle = qp_oracle(liq, x0)
        scale = max(1.0, np.max(np.abs(x0)))
        assert np.max(np.abs(oracle.schedule.v - optimal.v)) <= 1e-6 * scale
        assert kkt_residual(kkt_multipliers(liq, optimal)) <= 1e-8
        assert oracle.converged and oracle.cost == pytest.approx(total_cost(liq, optimal), rel=1e-9)


def test_optimal_schedule_hits_the_target(rng):
    liq = random_intraday(rng, 5, 4, 2)
    x0 = rng.standard_normal(4)
    schedule = optimal_schedule(liq, x0)
    np.testing.assert_allclose(schedule.checksum(), x0, atol=1e-12)
    assert schedule.label == "optimal"
    with pytest.raises(DimensionMismatchError):
        optimal_schedule(liq, x0[:3])


def test_optimal_schedule_beats_other_schedules(rng):
    liq = random_intraday(rng, 4, 3, 1)
    x0 = rng.standard_normal(3)
    optimal = optimal_schedule(liq, x0)
    best = total_cost(liq, optimal)
    for _ in range(100):
        shift = rng.standard_normal((4, 3))
        shift -= shift.mean(axis=0)
        other = Schedule(optimal.v + rng.uniform(0.01, 1.0) * shift, x0)
        assert total_cost(liq, other) > best


def test_without_funds_optimal_is_vwap(rng):
    liq = random_intraday(rng, 6, 4, 0)
    x0 = rng.standard_normal(4)
    optimal = optimal_schedule(liq, x0)
    vwap = separable_vwap_schedule(liquidity_vol_alloc(liq), x0)
    np.testing.assert_array_equal(optimal.v, vwap.v)
    assert kkt_residual(kkt_multipliers(liq, optimal)) <= 1e-12


def test_tilting_form_equals_parametric_optimum(rng):
    for _ in range(10):
        daily = random_model(rng, 4, 2)
        profile = random_profile(rng, 5)
        x0 = rng.standard_normal(4)
        liq = IntradayLiquidity.from_profile(daily, profile.alpha, profile.beta)
        np.testing.assert_allclose(tilting_schedule(daily, profile, x0).v, optimal_schedule(liq, x0).v,
                                   rtol=0, atol=1e-10 * max(1.0, np.max(np.abs(x0))))


def test_equal_intensities_remove_the_tilt(rng):
    daily = random_model(rng, 3, 1)
    alpha = rng.dirichlet(np.ones(4))
    profile = MixtureProfile(0.3, alpha, alpha)
    x0 = rng.standard_normal(3)
    tilting = tilting_schedule(daily, profile, x0)
    np.testing.assert_array_equal(tilting.v, profile.alpha[:, None] * x0)
    separable = separable_vwap_schedule(profile_vol_alloc(profile, 3), x0)
    np.testing.assert_allclose(tilting.v, separable.v, rtol=0, atol=1e-12)


def test_tilt_direction_is_the_fund_component(hand_daily):
    # Ψ̄_id = I, ψ̄_f = 1, w = (1, 1): WŴᵀw = w·wᵀw/(1 + wᵀw)
    np.testing.assert_allclose(tilt_direction(hand_daily, [1.0, 1.0]), [2.0 / 3.0, 2.0 / 3.0])
    np.testing.assert_allclose(tilt_direction(hand_daily, [1.0, -1.0]), [0.0, 0.0], atol=1e-15)


def test_optimal_schedule_allows_periods_without_liquidity(hand_daily, hand_profile):
    liq = IntradayLiquidity.from_profile(hand_daily, hand_profile.alpha, hand_profile.beta)
    x0 = np.array([1.0, 1.0])
    schedule = optimal_schedule(liq, x0)
    np.testing.assert_allclose(schedule.v, tilting_schedule(hand_daily, hand_profile, x0).v, atol=1e-14)
    np.testing.assert_allclose(schedule.v, [[1.0 / 6.0, 1.0 / 6.0], [5.0 / 6.0, 5.0 / 6.0]])


def test_separable_schedule_validation():
    with pytest.raises(InvalidModelError):
        separable_vwap_schedule([[0.5, 0.5], [0.4, 0.5]], [1.0, 1.0])
    with pytest.raises(InvalidModelError):
        separable_vwap_schedule([[1.5, 0.5], [-0.5, 0.5]], [1.0, 1.0])
    schedule = separable_vwap_schedule([[0.25, 0.5], [0.75, 0.5]], [4.0, -2.0])
    np.testing.assert_array_equal(schedule.v, [[1.0, -1.0], [3.0, -1.0]])


def test_schedule_invariants():
    with pytest.raises(InfeasibleScheduleError):
        Schedule([[1.0, 0.0], [0.0, 0.0]], [1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        Schedule([[1.0, 1.0]], [1.0, 1.0, 1.0])
    schedule = Schedule([[1.0, -1.0], [1.0, 0.0]], [2.0, -1.0])
    assert schedule.periods == 2 and schedule.n_assets == 2
    assert schedule.respects_signs()
    assert not Schedule([[2.0, 0.0], [-1.0, 0.0]], [1.0, 0.0]).respects_signs()
    assert not Schedule.zeros(3, 2).v.any()


def test_mixture_profile_validation():
    with pytest.raises(InvalidModelError):
        MixtureProfile(0.5, [0.5, 0.6], [0.5, 0.5])
    with pytest.raises(InvalidModelError):
        MixtureProfile(1.5, [0.5, 0.5], [0.5, 0.5])
    with pytest.raises(InvalidModelError):
        MixtureProfile(0.5, [1.2, -0.2], [0.5, 0.5])
    with pytest.raises(DimensionMismatchError):
        MixtureProfile(0.5, [1.0], [0.5, 0.5])
    with pytest.raises(InvalidModelError):
        MixtureProfile(0.5, [0.0, 1.0], [0.5, 0.5]).gamma()
    profile = MixtureProfile.normalized(0.25, [1.0, 3.0], [2.0, 2.0])
    np.testing.assert_allclose(profile.alpha, [0.25, 0.75])
    np.testing.assert_allclose(profile.vol_alloc(), [0.3125, 0.6875])
    assert profile.with_theta(0.5).theta == 0.5


def test_project_signed_simplex():
    y = np.array([0.3, -0.2, 0.9, 0.1])
    projected = project_signed_simplex(y, 1.0)
    assert projected.sum() == pytest.approx(1.0)
    assert np.all(projected >= 0)
    np.testing.assert_allclose(project_signed_simplex(projected, 1.0), projected, atol=1e-15)
    negative = project_signed_simplex(-y, -1.0)
    np.testing.assert_allclose(negative, -projected, atol=1e-15)
    assert not project_signed_simplex(y, 0.0).any()


def test_sign_constrained_oracle_on_interior_optimum(rng):
    liq = random_intraday(rng, 4, 3, 0)
    x0 = np.array([1.0, -2.0, 0.5])
    signed = qp_oracle(liq, x0, sign_constrained=True)
    np.testing.assert_allclose(signed.schedule.v, optimal_schedule(liq, x0).v, atol=1e-6)
    assert signed.sign_constrained and signed.schedule.respects_signs(1e-12)


def test_sign_constraints_forbid_round_trips():
    daily = LiquidityModel([1.0, 1.0], [1.0], [[1.0], [1.0]])
    liq = IntradayLiquidity.from_profile(daily, [0.5, 0.5], [0.2, 0.8])
    x0 = np.array([1.0, 0.0])
    optimal = optimal_schedule(liq, x0)
    np.testing.assert_allclose(optimal.v[:, 1], [-0.1, 0.1], atol=1e-12)

    signed = qp_oracle(liq, x0, sign_constrained=True)
    assert signed.schedule.respects_signs(1e-12)
    assert not signed.schedule.v[:, 1].any()
    assert signed.cost > total_cost(liq, optimal)


def test_oracle_zero_target_and_iteration_cap(rng):
    liq = random_intraday(rng, 3, 2, 1)
    result = qp_oracle(liq, np.zeros(2))
    assert result.iterations == 0 and not result.schedule.v.any()
    with pytest.raises(ConvergenceError) as excinfo:
        qp_oracle(liq, np.array([1.0, -1.0]), options=QPConfig(max_iter=1, tolerance=1e-16))
    assert excinfo.value.iterations == 1


def test_oracle_needs_single_stock_liquidity(hand_daily, hand_profile):
    liq = IntradayLiquidity.from_profile(hand_daily, [0.0, 1.0], hand_profile.beta)
    with pytest.raises(InvalidModelError):
        qp_oracle(liq, [1.0, 1.0])


def test_schedule_csv_round_trip(tmp_path, rng):
    liq = random_intraday(rng, 3, 2, 1)
    schedule = optimal_schedule(liq, rng.standard_normal(2))
    path = write_schedule_csv(tmp_path / "optimal.csv", schedule, ["AAA", "BBB"])
    loaded, assets = read_schedule_csv(path)
    assert assets == ["AAA", "BBB"]
    np.testing.assert_array_equal(loaded.v, schedule.v)
    np.testing.assert_array_equal(loaded.x0, schedule.checksum())


def test_schedule_csv_checksum_mismatch(tmp_path):
    path = tmp_path / "schedule.csv"
    path.write_text("period,AAA\n1,1\n2,1\ntotal,3\n")
    with pytest.raises(FormatError) as excinfo:
        read_schedule_csv(path)
    assert excinfo.value.row == 4 and excinfo.value.column == "AAA"


def test_profile_csv_round_trip(tmp_path, u_shaped_profile):
    loaded = read_profile_csv(write_profile_csv(tmp_path / "profile.csv", u_shaped_profile))
    np.testing.assert_array_equal(loaded.alpha, u_shaped_profile.alpha)
    np.testing.assert_array_equal(loaded.beta, u_shaped_profile.beta)
    assert loaded.theta == u_shaped_profile.theta


def test_optimal_schedule_is_scale_equivariant(rng):
    liq = random_intraday(rng, 5, 4, 2)
    x0 = rng.standard_normal(4)
    base = optimal_schedule(liq, x0).v
    for c in (0.25, 8.0, -2.0):
        np.testing.assert_array_equal(optimal_schedule(liq, c * x0).v, c * base)
    np.testing.assert_allclose(optimal_schedule(liq, 3.7 * x0).v, 3.7 * base, rtol=1e-12, atol=1e-13)


def test_hand_fixture_with_separate_liquidity_periods(hand_daily):
    # L̄ = I + wwᵀ, L̄⁻¹x0 = (2/3, −1/3); period 1 trades I·λ, period 2 wwᵀ·λ
    liq = IntradayLiquidity.from_profile(hand_daily, [1.0, 0.0], [0.0, 1.0])
    schedule = optimal_schedule(liq, [1.0, 0.0])
    np.testing.assert_allclose(schedule.v, [[2.0 / 3.0, -1.0 / 3.0], [1.0 / 3.0, 1.0 / 3.0]], atol=1e-15)
