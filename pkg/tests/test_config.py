import json
import os

import pytest

from utils.config_manager import AppConfig, ConfigManager


@pytest.fixture
def clean_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in list(os.environ):
        if name.startswith(ConfigManager.ENV_PREFIX):
            monkeypatch.delenv(name)
    return tmp_path


def test_defaults(clean_dir):
    config = ConfigManager(search_defaults=False).config
    assert config == AppConfig()
    assert config.numerics.condition_limit == 1e12
    assert config.calibration.residual_threshold == 1e-6
    assert config.simulation.workers == 1


def test_json_file_is_loaded(clean_dir):
    path = clean_dir / "settings.json"
    path.write_text(json.dumps({"qp": {"max_iter": 50}, "simulation": {"seed": 99}, "output_dir": "runs"}))
    manager = ConfigManager(config_file=str(path))
    assert manager.config.qp.max_iter == 50
    assert manager.config.simulation.seed == 99
    assert manager.config.output_dir == "runs"
    assert manager.loaded_from == path


def test_default_config_json_is_found(clean_dir):
    (clean_dir / "config.json").write_text(json.dumps({"estimation": {"gtol": 1e-6}}))
    assert ConfigManager().config.estimation.gtol == 1e-6
    assert ConfigManager(search_defaults=False).config.estimation.gtol == 1e-8


def test_environment_overrides_file(clean_dir, monkeypatch):
    path = clean_dir / "settings.json"
    path.write_text(json.dumps({"qp": {"max_iter": 50}}))
    monkeypatch.setenv("CROSSIMPACT_QP_MAX_ITER", "75")
    monkeypatch.setenv("CROSSIMPACT_DEBUG", "yes")
    config = ConfigManager(config_file=str(path)).config
    assert config.qp.max_iter == 75
    assert config.debug is True


def test_arguments_override_environment(clean_dir, monkeypatch):
    monkeypatch.setenv("CROSSIMPACT_SIMULATION_SEED", "3")
    manager = ConfigManager(search_defaults=False)
    manager.override_with_args(seed=11, days=None, qp_max_iter=5, unrelated=1)
    assert manager.config.simulation.seed == 11
    assert manager.config.simulation.days == AppConfig().simulation.days
    assert manager.config.qp.max_iter == 5


def test_unknown_keys_are_ignored(clean_dir):
    path = clean_dir / "settings.json"
    path.write_text(json.dumps({"qp": {"max_iter": 7, "momentum": 0.9}}))
    assert ConfigManager(config_file=str(path)).config.qp.max_iter == 7


def test_template_round_trips(clean_dir):
    path = ConfigManager(search_defaults=False).create_template(str(clean_dir / "template.json"))
    template = json.loads(path.read_text())
    assert set(template) >= {"numerics", "qp", "calibration", "simulation", "estimation", "output_dir"}
    assert ConfigManager(config_file=str(path)).config == AppConfig()


def test_missing_explicit_file_raises(clean_dir):
    with pytest.raises(FileNotFoundError):
        ConfigManager(config_file="missing.json")


def test_describe_flattens_sections(clean_dir):
    flat = ConfigManager(search_defaults=False).describe()
    assert flat["qp.max_iter"] == 100000
    assert flat["log_to_file"] is False


def test_save_to_file_round_trips(clean_dir):
    manager = ConfigManager(search_defaults=False)
    manager.override_with_args(seed=123, qp_tolerance=1e-7, output_dir="runs")
    path = manager.save_to_file(str(clean_dir / "saved.json"))
    reloaded = ConfigManager(config_file=str(path), search_defaults=False).config
    assert reloaded == manager.config
    assert reloaded.simulation.seed == 123


def test_save_to_file_defaults_to_config_json(clean_dir):
    path = ConfigManager(search_defaults=False).save_to_file()
    assert path.name == "config.json" and (clean_dir / "config.json").exists()
    assert json.loads(path.read_text())["qp"]["max_iter"] == 100000
