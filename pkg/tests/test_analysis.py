import numpy as np
import pytest

from conftest import random_profile
from utils.analysis import (
    CostRatioInputs,
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
from utils.analysis.report_io import eta_grid, read_report, read_sweep_csv, report_values, write_report, write_sweep_csv
from utils.errors import InvalidModelError
from utils.execution import MixtureProfile
from utils.impact import Infeasible, LiquidityModel
from utils.kv_format import parse_float


def test_hand_fixture_cost_ratio(hand_daily, hand_profile):
    report = cost_ratio(CostRatioInputs(hand_daily, hand_profile, [1.0, 1.0]))
    assert report.eta1 == pytest.approx(2.0)
    assert report.base_term == pytest.approx(1.25)
    assert report.delta == pytest.approx(-0.1)
    assert report.tilt_term == pytest.approx(-0.2)
    assert report.upsilon == pytest.approx(1.05, abs=1e-12)
    assert not report.orthogonal
    np.testing.assert_array_equal(report.gamma, [0.0, 2.0])


def test_hand_fixture_direct_ratio(hand_daily, hand_profile):
    assert direct_cost_ratio(CostRatioInputs(hand_daily, hand_profile, [1.0, 1.0])) == pytest.approx(1.05, abs=1e-10)


def test_closed_form_matches_schedule_costs(rng):
    for _ in range(200):
        n_assets = int(rng.integers(2, 7))
        daily = LiquidityModel(rng.uniform(0.5, 2.0, n_assets), rng.uniform(0.2, 3.0, 1),
                               rng.uniform(0.1, 1.0, (n_assets, 1)))
        inputs = CostRatioInputs(daily, random_profile(rng, int(rng.integers(2, 7))), rng.standard_normal(n_assets))
        closed = cost_ratio(inputs).upsilon
        assert closed == pytest.approx(direct_cost_ratio(inputs), rel=1e-8)
        assert closed >= 1.0 - 1e-12


def test_orthogonal_target_gets_the_base_term(hand_daily, hand_profile):
    inputs = CostRatioInputs(hand_daily, hand_profile, [1.0, -1.0])
    report = cost_ratio(inputs)
    assert report.orthogonal and report.tilt_term == 0.0
    assert report.upsilon == pytest.approx(1.25)
    assert direct_cost_ratio(inputs) == pytest.approx(1.25, rel=1e-10)


def test_extremes_follow_the_sign_of_delta(hand_daily, hand_profile):
    extremes = cost_ratio_extremes(hand_daily, hand_profile)
    assert extremes.upsilon_market == pytest.approx(1.05)
    assert extremes.upsilon_orth == pytest.approx(1.25)
    assert extremes.which_is_max == "orth" and extremes.delta < 0


def test_equal_intensities_make_separable_optimal(rng):
    daily = LiquidityModel(rng.uniform(0.5, 2.0, 3), [1.5], rng.uniform(0.1, 1.0, (3, 1)))
    alpha = rng.dirichlet(np.ones(5))
    profile = MixtureProfile(0.4, alpha, alpha)
    report = cost_ratio(CostRatioInputs(daily, profile, rng.standard_normal(3)))
    assert report.upsilon == pytest.approx(1.0, abs=1e-12)
    assert abs(report.tilt_term) <= 1e-12


def test_market_ratio_curve_turns_at_theta_ratio(hand_daily, smooth_profile):
    knee = turning_point(smooth_profile)
    assert knee == pytest.approx(1.0)
    grid = eta_grid(0.0, 4.0, 41, include=[knee])
    curve = market_ratio_curve(hand_daily, smooth_profile, grid)
    values = np.array([value for _, value in curve])
    index = int(np.flatnonzero(grid == knee)[0])
    assert values[index] == pytest.approx(1.0, abs=1e-10)
    assert int(np.argmin(values)) == index
    assert np.all(np.diff(values[:index + 1]) < 0)
    assert np.all(np.diff(values[index:]) > 0)


def test_market_ratio_limit_for_abundant_fund_liquidity(smooth_profile):
    bound = theta_bound_summary(smooth_profile)
    assert bound == pytest.approx(1.0 + 0.25 * (0.25 / 0.25 + 0.25 / 0.75 - 1.0), abs=1e-12)
    assert market_ratio(smooth_profile, 1e7) == pytest.approx(bound, abs=1e-4)


def test_theta_bound_without_fund_flow_is_infinite(hand_profile):
    outcome = theta_bound_summary(hand_profile)
    assert isinstance(outcome, Infeasible)
    assert "period 1" in outcome.reason


def test_theta_bound_on_u_shaped_day(u_shaped_profile):
    alpha, beta, theta = u_shaped_profile.alpha, u_shaped_profile.beta, u_shaped_profile.theta
    independent = 1.0 + (1.0 - theta) ** 2 * (sum(a * a / b for a, b in zip(alpha, beta)) - 1.0)
    bound = theta_bound_summary(u_shaped_profile)
    assert bound == pytest.approx(independent, abs=1e-10)
    assert bound > 1.03


def test_single_stock_ratio(hand_daily, hand_profile):
    single = single_stock_ratio(hand_daily, hand_profile, 0)
    assert single.eta1_i == pytest.approx(1.0)
    assert single.upsilon == pytest.approx(1.2)
    assert single.argmax_asset == 0
    assert direct_cost_ratio(CostRatioInputs(hand_daily, hand_profile, [1.0, 0.0])) == pytest.approx(1.2, rel=1e-10)


def test_single_stock_ratio_picks_the_most_exposed_asset(smooth_profile):
    daily = LiquidityModel([1.0, 4.0, 2.0], [5.0], [[0.5], [1.0], [1.0]])
    delta = intraday_variation(smooth_profile, liquidity_ratio(daily))
    single = single_stock_ratio(daily, smooth_profile, 1)
    loading = np.array([0.25, 0.25, 0.5])
    expected = int(np.argmax(loading)) if delta >= 0 else int(np.argmin(loading))
    assert single.argmax_asset == expected


def test_delta_thresholds(hand_daily, hand_profile):
    eta1 = liquidity_ratio(hand_daily)
    theta_star = delta_threshold_theta(eta1, hand_profile)
    assert 0.0 < theta_star < 1.0
    assert abs(intraday_variation(hand_profile, eta1, theta_star)) <= 1e-12

    eta_star = delta_threshold_eta(hand_profile)
    assert eta_star > turning_point(hand_profile)
    assert abs(intraday_variation(hand_profile, eta_star)) <= 1e-12


def test_base_term_needs_positive_alpha(hand_daily):
    with pytest.raises(InvalidModelError):
        base_term(MixtureProfile(0.5, [0.0, 1.0], [0.5, 0.5]))


def test_inputs_validation(hand_profile):
    two_funds = LiquidityModel([1.0, 1.0], [1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(InvalidModelError):
        CostRatioInputs(two_funds, hand_profile, [1.0, 1.0])
    with pytest.raises(InvalidModelError):
        CostRatioInputs(LiquidityModel([1.0, 1.0], [1.0], [[1.0], [1.0]]), hand_profile, [0.0, 0.0])


def test_curve_rejects_bad_grids(hand_daily, smooth_profile):
    with pytest.raises(InvalidModelError):
        market_ratio_curve(hand_daily, smooth_profile, [-1.0, 1.0])
    with pytest.raises(InvalidModelError):
        market_ratio_curve(hand_daily, MixtureProfile(1.0, [0.5, 0.5], [0.5, 0.5]), [1.0])


def test_report_and_sweep_files(tmp_path, hand_daily, hand_profile, smooth_profile):
    report = cost_ratio(CostRatioInputs(hand_daily, hand_profile, [1.0, 1.0]))
    extremes = cost_ratio_extremes(hand_daily, hand_profile)
    values = report_values(report, extremes, None, {"turning_point": 1.0})
    loaded = read_report(write_report(tmp_path / "report.txt", values))
    assert parse_float(loaded, "upsilon", tmp_path) == report.upsilon
    assert loaded["delta_sign"] == "negative"
    assert loaded["theta_bound"] == "none"

    curve = market_ratio_curve(hand_daily, smooth_profile, eta_grid(0.0, 2.0, 5, include=[0.3]))
    rows = read_sweep_csv(write_sweep_csv(tmp_path / "sweep.csv", curve, extremes.upsilon_orth))
    assert [row[:2] for row in rows] == curve
    assert all(row[2] == extremes.upsilon_orth for row in rows)


def test_eta_grid_merges_extra_points():
    grid = eta_grid(0.0, 1.0, 3, include=[0.5, 0.25])
    np.testing.assert_array_equal(grid, [0.0, 0.25, 0.5, 1.0])
    assert eta_grid(0.0, 1.0, 0).size == 0


def random_single_fund(rng, n_assets):
    return LiquidityModel(rng.uniform(0.5, 2.0, n_assets), rng.uniform(0.2, 3.0, 1),
                          rng.uniform(0.1, 1.0, (n_assets, 1)))


def test_cost_ratio_ignores_the_target_scale(rng):
    daily = random_single_fund(rng, 4)
    profile = random_profile(rng, 5)
    x0 = rng.standard_normal(4)
    upsilon = cost_ratio(CostRatioInputs(daily, profile, x0)).upsilon
    for c in (1e-3, -2.5, 40.0):
        assert cost_ratio(CostRatioInputs(daily, profile, c * x0)).upsilon == pytest.approx(upsilon, rel=1e-13)


def test_random_targets_stay_between_the_extremes(rng):
    daily = random_single_fund(rng, 5)
    profile = random_profile(rng, 6)
    extremes = cost_ratio_extremes(daily, profile)
    low = min(extremes.upsilon_market, extremes.upsilon_orth)
    high = max(extremes.upsilon_market, extremes.upsilon_orth)
    for _ in range(1000):
        upsilon = cost_ratio(CostRatioInputs(daily, profile, rng.standard_normal(5))).upsilon
        assert low - 1e-9 <= upsilon <= high + 1e-9

    w = daily.W[:, 0]
    z = rng.standard_normal(5)
    orth = z - w * np.sum(w * z / daily.psi_id) / np.sum(w * w / daily.psi_id)
    assert cost_ratio(CostRatioInputs(daily, profile, orth)).upsilon == pytest.approx(extremes.upsilon_orth)
    assert cost_ratio(CostRatioInputs(daily, profile, w)).upsilon == pytest.approx(extremes.upsilon_market)


def test_intraday_variation_sign_at_theta_bounds(rng):
    for _ in range(200):
        profile = random_profile(rng, int(rng.integers(2, 10)))
        eta1 = float(rng.uniform(0.0, 20.0))
        assert intraday_variation(profile, eta1, theta=0.0) >= -1e-12
        assert intraday_variation(profile, eta1, theta=1.0) <= 1e-12


def test_market_beats_orthogonal_exactly_when_delta_is_positive(rng):
    for _ in range(200):
        extremes = cost_ratio_extremes(random_single_fund(rng, 3), random_profile(rng, int(rng.integers(2, 8))))
        assert (extremes.upsilon_market >= extremes.upsilon_orth) == (extremes.delta >= 0)
        expected = "market" if extremes.delta > 0 else "orth" if extremes.delta < 0 else "equal"
        assert extremes.which_is_max == expected
