#!/usr/bin/env python3
"""
Portfolio Execution Toolkit
Coupled execution schedules, separable-vs-coupled cost ratios, intraday
profile calibration, order-flow simulation and impact-coefficient
estimation, all driven from files
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Optional

import click
import numpy as np

from utils.analysis import (
    CostRatioInputs,
    cost_ratio,
    cost_ratio_extremes,
    delta_threshold_eta,
    delta_threshold_theta,
    direct_cost_ratio,
    market_ratio,
    market_ratio_curve,
    single_stock_ratio,
    theta_bound_summary,
    turning_point,
)
from utils.analysis.report_io import eta_grid, read_sweep_csv, report_values, write_report, write_sweep_csv
from utils.calibration import calibrate, compute_profiles, forward_profiles
from utils.calibration.profiles_io import read_panel_csv, read_profiles_csv, write_panel_csv, write_profiles_csv
from utils.config_manager import ConfigManager
from utils.errors import CrossImpactError
from utils.estimation import (
    ImpactCoefficients,
    MLEOptions,
    fit_mle,
    predict_shortfall,
    simulate_records,
)
from utils.estimation.records import RecordBatch, record_liquidity
from utils.estimation.records_io import (
    read_coefficients,
    read_records,
    write_coefficients,
    write_diagnostics,
    write_records,
)
from utils.execution import (
    kkt_multipliers,
    kkt_residual,
    liquidity_vol_alloc,
    optimal_schedule,
    profile_vol_alloc,
    qp_oracle,
    separable_vwap_schedule,
    tilting_schedule,
)
from utils.execution.schedule_io import read_profile_csv, read_schedule_csv, write_profile_csv, write_schedule_csv
from utils.impact import Infeasible, IntradayLiquidity, build_impact_matrix, total_cost
from utils.impact.liquidity_io import read_intraday_csv, read_liquidity_csv, read_x0_csv
from utils.kv_format import write_kv
from utils.logger_setup import enable_file_logging, set_console_level, setup_logger
from utils.orderflow import OrderFlowParams, simulate_day, simulate_panel
from utils.orderflow.params_io import read_params, write_params
from utils.table_io import write_table

logger = setup_logger(name="portfolio_execution", level=logging.INFO)

QP_AGREEMENT = 1e-6
KKT_AGREEMENT = 1e-8
RATIO_AGREEMENT = 1e-8
PREDICTION_AGREEMENT = 1e-9
CHECKED_DAYS = 5
CHECKED_RECORDS = 5


class CheckFailed(click.ClickException):
    def __init__(self, message: str):
        super().__init__(f"check failed: {message}")


@contextmanager
def reported_errors():
    """Turn toolkit errors into click errors (non-zero exit, message on stderr)."""
    try:
        yield
    except CrossImpactError as exc:
        raise click.ClickException(str(exc)) from exc
    except FileNotFoundError as exc:
        raise click.ClickException(str(exc)) from exc


def open_run(config_file: Optional[str], output_dir: Optional[str], debug: bool,
             log_to_file: Optional[bool], save_config: bool = False, **overrides) -> ConfigManager:
    """
    Load configuration and prepare logging and the output directory.

    Precedence: command-line flags > environment > config file > defaults.
    With save_config the merged configuration is written back to the
    --config file (config.json when none was given).
    """
    config_mgr = ConfigManager(config_file=config_file)
    config_mgr.override_with_args(output_dir=output_dir, debug=debug or None,
                                  log_to_file=log_to_file, **overrides)
    if save_config:
        config_mgr.save_to_file()
    config = config_mgr.config
    if config.debug:
        set_console_level(logging.DEBUG)
    if config.log_to_file:
        log_path = enable_file_logging(config.log_dir)
        logger.info(f"Logging to {log_path}")
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    return config_mgr


def verify(condition: bool, message: str) -> None:
    if not condition:
        raise CheckFailed(message)
    logger.info(f"check passed: {message}")


def report_outputs(outputs: Dict[str, Path]) -> None:
    click.echo("\nOutput files:")
    for key, path in outputs.items():
        click.echo(f"  - {key}: {path}")


def cost_value(cost):
    """Cost for a summary file: the float, or 'infeasible (<reason>)'."""
    if isinstance(cost, Infeasible):
        return f"infeasible ({cost.reason})"
    return float(cost)


def run_options(func):
    """Options shared by every analysis command."""
    options = [
        click.option('--config', '-c', 'config_file', help='Configuration file path'),
        click.option('--output', '-o', 'output_dir', help='Output directory (overrides config)'),
        click.option('--check', is_flag=True, help='Cross-validate the results against dense oracles'),
        click.option('--debug', is_flag=True, help='Enable debug logging'),
        click.option('--log-to-file/--no-log-to-file', default=None, help='Also log to a rotating file'),
        click.option('--save-config', is_flag=True, help='Save the effective configuration'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def parse_gammas(ctx, param, value: str):
    """Comma-separated list of floats; an empty string means no funds."""
    if value is None or not value.strip():
        return ()
    try:
        return tuple(float(part) for part in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


@click.command()
@click.option('--input', '-i', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Intraday liquidity CSV, or daily liquidity CSV when --profile is given')
@click.option('--x0', 'x0_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Target CSV (asset,x0)')
@click.option('--profile', 'profile_path', type=click.Path(exists=True, dir_okay=False),
              help='Mixture profile CSV; scales the daily model period by period')
@click.option('--sign-constrained', is_flag=True, help='Also solve the no-round-trip QP numerically')
@run_options
def schedule(input_path, x0_path, profile_path, sign_constrained, config_file, output_dir, check, debug,
             log_to_file, save_config):
    """Optimal, tilting and separable schedules with their total costs."""
    with reported_errors():
        config_mgr = open_run(config_file, output_dir, debug, log_to_file, save_config)
        config = config_mgr.config
        numerics = config.numerics
        out = Path(config.output_dir)

        daily = profile = None
        if profile_path:
            daily, assets = read_liquidity_csv(input_path)
            profile = read_profile_csv(profile_path)
            liq = IntradayLiquidity.from_profile(daily, profile.alpha, profile.beta)
            vol_alloc = profile_vol_alloc(profile, daily.n_assets)
        else:
            liq, assets = read_intraday_csv(input_path)
            vol_alloc = liquidity_vol_alloc(liq)
        x0, _ = read_x0_csv(x0_path, assets)
        logger.info(f"Scheduling {liq.n_assets} assets over {liq.periods} periods with {liq.n_funds} fund(s)")

        optimal = optimal_schedule(liq, x0, numerics)
        separable = separable_vwap_schedule(vol_alloc, x0)
        outputs = {
            "optimal": write_schedule_csv(out / "optimal.csv", optimal, assets),
            "separable": write_schedule_csv(out / "separable.csv", separable, assets),
        }
        tilting = None
        if profile is not None:
            tilting = tilting_schedule(daily, profile, x0, numerics)
            outputs["tilting"] = write_schedule_csv(out / "tilting.csv", tilting, assets)

        signed = None
        if sign_constrained:
            signed = qp_oracle(liq, x0, sign_constrained=True, options=config.qp, numerics=numerics)
            outputs["sign_constrained"] = write_schedule_csv(out / "sign_constrained.csv", signed.schedule, assets)

        optimal_cost = total_cost(liq, optimal, numerics)
        separable_cost = total_cost(liq, separable, numerics)
        if isinstance(separable_cost, Infeasible):
            ratio = float("inf")
        elif isinstance(optimal_cost, Infeasible) or optimal_cost == 0:
            ratio = None
        else:
            ratio = separable_cost / optimal_cost

        summary = {
            "periods": liq.periods,
            "assets": liq.n_assets,
            "funds": liq.n_funds,
            "optimal_cost": cost_value(optimal_cost),
            "separable_cost": cost_value(separable_cost),
            "cost_ratio": ratio,
        }
        if tilting is not None:
            summary["tilting_cost"] = cost_value(total_cost(liq, tilting, numerics))
        if signed is not None:
            summary["sign_constrained_cost"] = signed.cost
            summary["sign_constrained_iterations"] = signed.iterations
        outputs["summary"] = write_kv(out / "schedule_summary.txt", summary, header="execution cost summary")

        click.echo(f"Optimal cost:   {summary['optimal_cost']}")
        click.echo(f"Separable cost: {summary['separable_cost']}")
        click.echo(f"Cost ratio:     {ratio}")

        if check:
            reread, _ = read_schedule_csv(outputs["optimal"])
            verify(np.array_equal(reread.v, optimal.v), "optimal schedule CSV re-parses to the same trades")
            scale = max(1.0, float(np.max(np.abs(x0), initial=0.0)))
            if tilting is not None:
                gap = float(np.max(np.abs(tilting.v - optimal.v)))
                verify(gap <= 1e-9 * scale, f"tilting form equals the optimal schedule (gap {gap:.3e})")
            if all(np.all(model.psi_id > 0) for model in liq):
                for model in liq:
                    build_impact_matrix(model, numerics).check_invariants()
                residual = kkt_residual(kkt_multipliers(liq, optimal, numerics))
                verify(residual <= KKT_AGREEMENT, f"G_t v_t is constant across periods (residual {residual:.3e})")
                oracle = qp_oracle(liq, x0, options=config.qp, numerics=numerics)
                gap = float(np.max(np.abs(oracle.schedule.v - optimal.v)))
                verify(gap <= QP_AGREEMENT * scale, f"closed form matches the QP oracle (gap {gap:.3e})")
            else:
                logger.warning("Some period lacks single-stock liquidity; QP and KKT checks skipped")

        report_outputs(outputs)


@click.command()
@click.option('--input', '-i', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Daily liquidity CSV with exactly one fund')
@click.option('--profile', 'profile_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Mixture profile CSV')
@click.option('--x0', 'x0_path', type=click.Path(exists=True, dir_okay=False),
              help='Target CSV (asset,x0); defaults to the fund portfolio')
@click.option('--eta-start', type=float, default=0.0, show_default=True, help='First eta1 of the sweep')
@click.option('--eta-stop', type=float, default=None, help='Last eta1 of the sweep (default: 4x the turning point)')
@click.option('--eta-count', type=int, default=101, show_default=True, help='Evenly spaced eta1 points')
@run_options
def analyze(input_path, profile_path, x0_path, eta_start, eta_stop, eta_count, config_file, output_dir, check,
            debug, log_to_file, save_config):
    """Closed-form cost ratio, its extremes and the eta1 sweep."""
    if eta_count < 1:
        raise click.UsageError("the eta1 grid is empty; --eta-count must be at least 1")
    with reported_errors():
        config_mgr = open_run(config_file, output_dir, debug, log_to_file, save_config)
        config = config_mgr.config
        out = Path(config.output_dir)

        daily, assets = read_liquidity_csv(input_path)
        profile = read_profile_csv(profile_path)
        if x0_path:
            x0, _ = read_x0_csv(x0_path, assets)
        else:
            x0 = daily.W[:, 0].copy() if daily.n_funds else np.zeros(daily.n_assets)
            logger.info("No target given; analysing the fund portfolio")

        inputs = CostRatioInputs(daily, profile, x0)
        report = cost_ratio(inputs, config.numerics)
        extremes = cost_ratio_extremes(daily, profile)
        bound = theta_bound_summary(profile)
        if isinstance(bound, Infeasible):
            logger.warning(f"Large-eta1 bound: {bound.reason}")
            bound = None
        knee = turning_point(profile)
        thresholds = {
            "turning_point": knee,
            "theta_threshold": delta_threshold_theta(report.eta1, profile),
            "eta1_threshold": delta_threshold_eta(profile),
        }

        stop = eta_stop if eta_stop is not None else 4.0 * max(knee, report.eta1, 0.25)
        if stop < eta_start:
            raise click.UsageError(f"--eta-stop {stop} lies below --eta-start {eta_start}")
        grid = eta_grid(eta_start, stop, eta_count, include=[knee, report.eta1])
        curve = market_ratio_curve(daily, profile, grid)

        singles = [single_stock_ratio(daily, profile, i) for i in range(daily.n_assets)]
        outputs = {
            "report": write_report(out / "cost_ratio.txt", report_values(report, extremes, bound, thresholds)),
            "sweep": write_sweep_csv(out / "eta_sweep.csv", curve, extremes.upsilon_orth),
            "single_stock": write_table(out / "single_stock.csv", {
                "asset": assets,
                "upsilon": [s.upsilon for s in singles],
                "eta1_i": [s.eta1_i for s in singles],
            }),
        }

        click.echo(f"Cost ratio:        {report.upsilon:.6f}")
        click.echo(f"Liquidity ratio:   {report.eta1:.6f}")
        click.echo(f"Largest ratio at:  {extremes.which_is_max} (delta {extremes.delta:+.3e})")
        click.echo(f"Most exposed asset: {assets[singles[0].argmax_asset]}")

        if check:
            direct = direct_cost_ratio(inputs, config.numerics)
            gap = abs(direct - report.upsilon) / direct
            verify(gap <= RATIO_AGREEMENT, f"closed form matches the schedule cost ratio (relative gap {gap:.3e})")
            at_knee = market_ratio(profile, knee)
            verify(abs(at_knee - 1.0) <= 1e-9, f"market ratio equals 1 at the turning point ({at_knee:.17g})")
            reread = read_sweep_csv(outputs["sweep"])
            verify([r[:2] for r in reread] == [tuple(c) for c in curve], "sweep CSV re-parses losslessly")

        report_outputs(outputs)


@click.command()
@click.option('--input', '-i', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Volume panel CSV (day,period,asset,dvol) or profiles CSV')
@click.option('--input-kind', type=click.Choice(['panel', 'profiles']), default='panel', show_default=True,
              help='What --input holds')
@click.option('--residual-threshold', type=float, help='Largest residual still called consistent')
@run_options
def calibrate_cmd(input_path, input_kind, residual_threshold, config_file, output_dir, check, debug, log_to_file,
                  save_config):
    """Recover theta, alpha and beta from volume and correlation profiles."""
    with reported_errors():
        config_mgr = open_run(config_file, output_dir, debug, log_to_file, save_config,
                              residual_threshold=residual_threshold)
        config = config_mgr.config
        out = Path(config.output_dir)

        outputs = {}
        summary = {}
        if input_kind == "panel":
            panel = read_panel_csv(input_path)
            statistics = compute_profiles(panel)
            observed = statistics.profiles
            outputs["profiles"] = write_profiles_csv(out / "market_profiles.csv", observed)
            summary.update(days=statistics.days, excluded_pairs=statistics.excluded_pairs)
        else:
            observed = read_profiles_csv(input_path)

        result = calibrate(observed, config.calibration)
        outputs["profile"] = write_profile_csv(out / "mixture_profile.csv", result.profile)
        summary.update(
            theta=result.profile.theta,
            residual=result.residual,
            consistent=result.consistent,
            method=result.method,
            clipped_periods=result.clipped_periods,
            forward_error=result.forward_error,
            alpha_sum=result.alpha_sum,
            beta_sum=result.beta_sum,
        )
        outputs["summary"] = write_kv(out / "calibration.txt", summary, header="mixture profile calibration")

        click.echo(f"theta = {result.profile.theta:.10f} ({result.method})")
        click.echo(f"residual = {result.residual:.3e} ({'consistent' if result.consistent else 'inconsistent'})")

        if check:
            reread = read_profile_csv(outputs["profile"])
            verify(np.array_equal(reread.alpha, result.profile.alpha)
                   and np.array_equal(reread.beta, result.profile.beta)
                   and reread.theta == result.profile.theta, "mixture profile CSV re-parses losslessly")
            if np.all(result.profile.alpha > 0):
                closure = calibrate(forward_profiles(result.profile), config.calibration)
                gap = abs(closure.profile.theta - result.profile.theta)
                verify(gap <= 1e-8, f"calibrating the implied profiles recovers theta (gap {gap:.3e})")
            else:
                logger.warning("Some alpha_t is zero; the implied correlation is 1 and the closure check is skipped")

        report_outputs(outputs)


@click.command()
@click.option('--kind', type=click.Choice(['panel', 'records']), default='panel', show_default=True,
              help='Volume panel or synthetic transaction records')
@click.option('--input', '-i', 'input_path', type=click.Path(exists=True, dir_okay=False),
              help='panel: order-flow parameter file')
@click.option('--profile', 'profile_path', type=click.Path(exists=True, dir_okay=False),
              help='panel: mixture profile CSV used when no parameter file is given')
@click.option('--assets', 'n_assets', type=int, default=5, show_default=True,
              help='Assets per panel (with --profile) or per record')
@click.option('--seed', type=int, help='Root seed (overrides config)')
@click.option('--days', type=int, help='panel: number of days (overrides config)')
@click.option('--workers', type=int, help='panel: worker threads (overrides config)')
@click.option('--progress/--no-progress', default=None, help='panel: show a progress bar')
@click.option('--n-records', type=int, default=1000, show_default=True, help='records: number of records')
@click.option('--gamma-id', type=float, default=1.0, show_default=True, help='records: true gamma_id')
@click.option('--gamma-f', callback=parse_gammas, default="1.0", show_default=True,
              help='records: true gamma_f per fund, comma separated ("" for no funds)')
@click.option('--noise', type=float, default=0.0, show_default=True, help='records: noise scale')
@run_options
def simulate(kind, input_path, profile_path, n_assets, seed, days, workers, progress, n_records, gamma_id, gamma_f,
             noise, config_file, output_dir, check, debug, log_to_file, save_config):
    """Simulate a volume panel or transaction records."""
    with reported_errors():
        config_mgr = open_run(config_file, output_dir, debug, log_to_file, save_config,
                              seed=seed, days=days, workers=workers, progress=progress)
        config = config_mgr.config
        sim = config.simulation
        out = Path(config.output_dir)

        if kind == "records":
            truth = ImpactCoefficients(gamma_id, np.array(gamma_f))
            records = simulate_records(truth, n_records, noise, sim.seed, n_assets=n_assets)
            outputs = {
                "records": write_records(out / "records", records),
                "truth": write_coefficients(out / "true_coefficients.txt", truth),
            }
            click.echo(f"Simulated {n_records} records with {truth.n_funds} fund(s), seed {sim.seed}")
            if check:
                reread = read_records(out / "records")
                same = all(np.array_equal(a.r_bar, b.r_bar) and np.array_equal(a.sigma_noise, b.sigma_noise)
                           for a, b in zip(records, reread))
                verify(len(reread) == len(records) and same, "records re-parse losslessly")
            report_outputs(outputs)
            return

        if input_path:
            params = read_params(input_path)
        elif profile_path:
            params = OrderFlowParams.homogeneous(read_profile_csv(profile_path), sim.lam, sim.cv, 1.0,
                                                 np.ones(n_assets))
        else:
            raise click.UsageError("a panel simulation needs --input (parameter file) or --profile")

        panel = simulate_panel(params, sim.days, sim.seed, workers=sim.workers, progress=sim.progress)
        outputs = {
            "panel": write_panel_csv(out / "panel.csv", panel),
            "params": write_params(out / "orderflow_params.txt", params),
        }
        click.echo(f"Simulated {sim.days} days x {params.periods} periods x {params.n_assets} assets, seed {sim.seed}")

        if check:
            for d in range(min(CHECKED_DAYS, sim.days)):
                verify(np.array_equal(simulate_day(params, sim.seed, d), panel.dvol[d]),
                       f"day {d + 1} is reproduced from its own stream")
            reread = read_panel_csv(outputs["panel"])
            verify(np.array_equal(reread.dvol, panel.dvol), "panel CSV re-parses losslessly")

        report_outputs(outputs)


@click.command()
@click.option('--input', '-i', 'input_path', required=True, type=click.Path(exists=True, file_okay=False),
              help='Records directory holding manifest.csv')
@click.option('--init', 'init_path', type=click.Path(exists=True, dir_okay=False),
              help='Starting coefficients (default: all ones)')
@click.option('--shared-fund-coefficient', is_flag=True, help='Fit a single gamma_f common to all funds')
@click.option('--max-iter', 'mle_max_iter', type=int, help='Optimizer iteration cap (overrides config)')
@click.option('--gtol', type=float, help='Gradient tolerance (overrides config)')
@run_options
def estimate(input_path, init_path, shared_fund_coefficient, mle_max_iter, gtol, config_file, output_dir, check,
             debug, log_to_file, save_config):
    """Maximum-likelihood impact coefficients from transaction records."""
    with reported_errors():
        config_mgr = open_run(config_file, output_dir, debug, log_to_file, save_config,
                              mle_max_iter=mle_max_iter, gtol=gtol)
        config = config_mgr.config
        out = Path(config.output_dir)

        records = read_records(input_path)
        n_funds = records[0].n_funds
        init = read_coefficients(init_path) if init_path else ImpactCoefficients(1.0, np.ones(n_funds))
        options = MLEOptions.from_config(config.estimation, shared_fund_coefficient)
        result = fit_mle(records, init, options)

        outputs = {
            "coefficients": write_coefficients(out / "coefficients.txt", result.coefficients),
            "diagnostics": write_diagnostics(out / "diagnostics.txt", result),
        }
        click.echo(f"gamma_id = {result.coefficients.gamma_id:.10g}")
        for k, value in enumerate(result.coefficients.gamma_f, start=1):
            click.echo(f"gamma_f[{k}] = {value:.10g}")
        click.echo(f"log-likelihood = {result.log_likelihood:.10g} ({'converged' if result.converged else 'not converged'})")

        if check:
            coef = result.coefficients
            shape = (records[0].n_assets, n_funds)
            sample = [rec for rec in records if (rec.n_assets, rec.n_funds) == shape][:CHECKED_RECORDS]
            batched = RecordBatch(sample).predict(coef)
            for rec, fast in zip(sample, batched):
                woodbury = predict_shortfall(rec, coef)
                dense = 0.5 * np.linalg.solve(record_liquidity(rec, coef).liquidity_matrix(), rec.v_tilde)
                scale = max(float(np.max(np.abs(dense))), np.finfo(float).tiny)
                gap = max(float(np.max(np.abs(woodbury - dense))), float(np.max(np.abs(fast - dense)))) / scale
                verify(gap <= PREDICTION_AGREEMENT, f"shortfall prediction matches dense inversion (gap {gap:.3e})")
            reread = read_coefficients(outputs["coefficients"])
            verify(reread.gamma_id == coef.gamma_id and np.array_equal(reread.gamma_f, coef.gamma_f),
                   "coefficient file re-parses losslessly")

        report_outputs(outputs)


@click.command()
@click.option('--output', '-o', 'filepath', default='config.json.template', show_default=True,
              help='Template path')
def create_template(filepath):
    """Create a configuration template file."""
    config_mgr = ConfigManager(search_defaults=False)
    path = config_mgr.create_template(filepath)
    click.echo(f"Configuration template written to: {path}")


# Create CLI group
@click.group()
def cli():
    """Portfolio Execution - coupled execution under cross-impact, from files."""
    pass


cli.add_command(schedule, name='schedule')
cli.add_command(analyze, name='analyze')
cli.add_command(calibrate_cmd, name='calibrate')
cli.add_command(simulate, name='simulate')
cli.add_command(estimate, name='estimate')
cli.add_command(create_template, name='create-template')


if __name__ == "__main__":
    cli()
