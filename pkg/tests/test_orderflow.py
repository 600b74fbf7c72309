from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import norm

from utils.calibration import calibrate, compute_profiles, forward_profiles
from utils.errors import DimensionMismatchError, FormatError, InvalidModelError
from utils.execution import MixtureProfile
from utils.orderflow import OrderFlowParams, simulate_day, simulate_panel, theoretical_moments
from utils.orderflow.params_io import read_params, write_params

SEED = 424242
FAMILY_LEVEL = 1e-3


@pytest.fixture(scope="module")
def profile():
    return MixtureProfile(0.5, [0.4, 0.3, 0.3], [0.2, 0.3, 0.5])


@pytest.fixture(scope="module")
def params(profile):
    return OrderFlowParams.homogeneous(profile, lam=100.0, cv=0.5, qbar_f=1.0, w_tilde=[1.0, 0.5, 2.0, 1.0])


@pytest.fixture(scope="module")
def long_panel(params):
    return simulate_panel(params, days=20000, seed=SEED, progress=False)


def bonferroni_z(tests: int) -> float:
    return float(norm.isf(FAMILY_LEVEL / (2 * tests)))


def test_sample_moments_match_theory(params, long_panel):
    theory = theoretical_moments(params)
    x = long_panel.dvol
    D, T, N = x.shape
    centered = x - x.mean(axis=0)
    pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
    z = bonferroni_z(2 * T * N + T * len(pairs))

    mean_se = x.std(axis=0, ddof=1) / np.sqrt(D)
    assert np.all(np.abs(x.mean(axis=0) - theory.mean) <= z * mean_se)

    squares = centered ** 2
    var_se = squares.std(axis=0, ddof=1) / np.sqrt(D)
    assert np.all(np.abs(x.var(axis=0, ddof=1) - theory.var) <= z * var_se)

    for i, j in pairs:
        products = centered[:, :, i] * centered[:, :, j]
        cov_se = products.std(axis=0, ddof=1) / np.sqrt(D)
        assert np.all(np.abs(products.sum(axis=0) / (D - 1) - theory.cov[:, i, j]) <= z * cov_se)


def test_theoretical_moments_of_a_homogeneous_model(params, profile):
    theory = theoretical_moments(params)
    np.testing.assert_allclose(theory.theta_i, profile.theta)
    np.testing.assert_allclose(theory.vol_alloc, np.repeat(profile.vol_alloc()[:, None], 4, axis=1))
    np.testing.assert_allclose(theory.avg_correl(), forward_profiles(profile).correl_array())
    np.testing.assert_allclose(np.diagonal(theory.cov, axis1=1, axis2=2), theory.var)


def test_simulated_panel_calibrates_back_to_theta(profile, long_panel):
    result = calibrate(compute_profiles(long_panel).profiles)
    assert result.profile.theta == pytest.approx(profile.theta, abs=0.02)
    np.testing.assert_allclose(result.profile.alpha, profile.alpha, atol=0.05)
    np.testing.assert_allclose(result.profile.beta, profile.beta, atol=0.05)


def test_panel_days_use_their_own_streams(params):
    panel = simulate_panel(params, days=30, seed=SEED, progress=False)
    for d in (0, 7, 29):
        np.testing.assert_array_equal(panel.dvol[d], simulate_day(params, SEED, d))
    assert panel.days[0] == 1 and panel.days[-1] == 30


def test_panel_does_not_depend_on_workers(params):
    serial = simulate_panel(params, days=2500, seed=SEED, workers=1, progress=False)
    threaded = simulate_panel(params, days=2500, seed=SEED, workers=3, progress=False)
    np.testing.assert_array_equal(serial.dvol, threaded.dvol)
    other = simulate_panel(params, days=2500, seed=SEED + 1, progress=False)
    assert not np.array_equal(serial.dvol, other.dvol)


def test_zero_cv_gives_whole_orders():
    params = OrderFlowParams(50.0, 0.0, [2.0, 2.0], 2.0, [1.0, 1.0], [0.5, 0.5], [0.5, 0.5])
    dvol = simulate_panel(params, days=50, seed=1, progress=False).dvol
    np.testing.assert_array_equal(dvol / 2.0, np.rint(dvol / 2.0))
    assert dvol.sum() > 0


def test_simulate_panel_needs_days(params):
    with pytest.raises(InvalidModelError):
        simulate_panel(params, days=0, seed=1, progress=False)


def test_homogeneous_theta(profile, params):
    assert params.homogeneous_theta() == pytest.approx(profile.theta)
    assert params.profile().theta == pytest.approx(profile.theta)
    mixed = OrderFlowParams(10.0, 0.5, [1.0, 3.0], 1.0, [1.0, 1.0], profile.alpha, profile.beta)
    np.testing.assert_allclose(mixed.theta_i(), [0.5, 0.25])
    assert mixed.homogeneous_theta() is None
    with pytest.raises(InvalidModelError):
        mixed.profile()
    with pytest.raises(InvalidModelError):
        OrderFlowParams.homogeneous(profile.with_theta(0.0), 10.0, 0.5, 1.0, [1.0])
    with pytest.raises(InvalidModelError):
        OrderFlowParams.homogeneous(profile, 10.0, 0.5, 1.0, [1.0, 0.0])


def test_params_validation(profile):
    with pytest.raises(InvalidModelError):
        OrderFlowParams(0.0, 0.5, [1.0], 1.0, [1.0], profile.alpha, profile.beta)
    with pytest.raises(InvalidModelError):
        OrderFlowParams(10.0, -0.5, [1.0], 1.0, [1.0], profile.alpha, profile.beta)
    with pytest.raises(DimensionMismatchError):
        OrderFlowParams(10.0, 0.5, [1.0, 1.0], 1.0, [1.0], profile.alpha, profile.beta)
    with pytest.raises(InvalidModelError):
        OrderFlowParams(10.0, 0.5, [1.0], 1.0, [1.0], [0.5, 0.6, 0.3], profile.beta)


def test_params_file_round_trip(tmp_path, params):
    loaded = read_params(write_params(tmp_path / "params.txt", params))
    assert loaded.lam == params.lam and loaded.cv == params.cv and loaded.qbar_f == params.qbar_f
    for name in ("qbar_id", "w_tilde", "alpha", "beta"):
        np.testing.assert_array_equal(getattr(loaded, name), getattr(params, name))


def test_params_file_errors(tmp_path, params):
    path = write_params(tmp_path / "params.txt", params)
    path.write_text(path.read_text() + "lambada = 3\n")
    with pytest.raises(FormatError):
        read_params(path)

    path.write_text("lambda = 10\ncv = 0.5\nqbar_id = 1, 1\nqbar_f = 1\nw_tilde = 1\nalpha = 0.5, 0.5\nbeta = 0.5, 0.5\n")
    with pytest.raises(FormatError):
        read_params(path)


def test_periods_without_fund_flow_have_no_covariance():
    quiet = MixtureProfile(0.5, [0.4, 0.3, 0.3], [0.0, 0.5, 0.5])
    params = OrderFlowParams.homogeneous(quiet, lam=100.0, cv=0.5, qbar_f=1.0, w_tilde=[1.0, 0.5, 2.0])
    theory = theoretical_moments(params)
    off_diagonal = ~np.eye(3, dtype=bool)
    assert not theory.cov[0][off_diagonal].any()
    assert not theory.correl[0][off_diagonal].any()
    assert np.all(theory.cov[1][off_diagonal] > 0)

    x = simulate_panel(params, days=5000, seed=SEED, progress=False).dvol[:, 0, :]
    centered = x - x.mean(axis=0)
    z = bonferroni_z(3)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        products = centered[:, i] * centered[:, j]
        assert abs(products.mean()) <= z * products.std(ddof=1) / np.sqrt(len(products))


def test_correlation_does_not_depend_on_order_size_dispersion(params):
    base = theoretical_moments(params)
    for cv in (0.0, 0.2, 2.0):
        other = theoretical_moments(replace(params, cv=cv))
        np.testing.assert_allclose(other.correl, base.correl, rtol=1e-14, atol=0.0)
        np.testing.assert_allclose(other.cov, base.cov * (1.0 + cv * cv) / (1.0 + params.cv ** 2), rtol=1e-13)


def test_hand_parameters_average_correlation(hand_profile):
    params = OrderFlowParams.homogeneous(hand_profile, lam=10.0, cv=0.5, qbar_f=1.0, w_tilde=[1.0, 1.0, 1.0])
    np.testing.assert_allclose(theoretical_moments(params).avg_correl(), [0.0, 2.0 / 3.0], atol=1e-15)
