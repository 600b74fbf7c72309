# utils/config_manager.py
"""
Configuration Manager
Handles toolkit configuration from multiple sources:
1. Default values
2. Configuration file (JSON)
3. Environment variables (.env file and system)
4. Command-line arguments (override)
"""

import os
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple
from dataclasses import dataclass, asdict, field, fields

try:
    from dotenv import load_dotenv
    HAS_DOTENV = True
except ImportError:
    HAS_DOTENV = False

from .logger_setup import setup_logger

logger = setup_logger(name="config_manager", level=logging.INFO)


@dataclass
class NumericsConfig:
    """Tolerances shared by the impact, scheduling and analysis modules"""
    span_tolerance: float = 1e-8
    condition_limit: float = 1e12
    dense_limit: int = 2048
    orthogonality_tolerance: float = 1e-10


@dataclass
class QPConfig:
    """Projected-gradient oracle settings"""
    max_iter: int = 100000
    tolerance: float = 1e-10


@dataclass
class CalibrationConfig:
    """Theta search settings"""
    bracket_low: float = 1e-4
    bracket_high: float = 1 - 1e-4
    theta_tolerance: float = 1e-10
    residual_threshold: float = 1e-6


@dataclass
class SimulationConfig:
    """Order-flow simulator defaults"""
    lam: float = 200.0
    cv: float = 0.5
    days: int = 1000
    seed: int = 7
    workers: int = 1
    progress: bool = True


@dataclass
class EstimationConfig:
    """MLE optimizer settings"""
    max_iter: int = 500
    gtol: float = 1e-8
    fd_step: float = 1e-5


@dataclass
class AppConfig:
    """Complete application configuration"""
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    qp: QPConfig = field(default_factory=QPConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    output_dir: str = "output"
    log_to_file: bool = False
    log_dir: str = "logs"
    debug: bool = False


SECTIONS = ('numerics', 'qp', 'calibration', 'simulation', 'estimation')
TOP_LEVEL = ('output_dir', 'log_to_file', 'log_dir', 'debug')


class ConfigManager:
    """Manages toolkit configuration from multiple sources"""

    DEFAULT_CONFIG_PATHS = [
        "config.json",
        ".config.json",
        "~/.crossimpact/config.json",
    ]

    ENV_PREFIX = "CROSSIMPACT_"

    def __init__(self, config_file: Optional[str] = None, search_defaults: bool = True):
        """
        Initialize configuration manager

        Args:
            config_file: Path to configuration file (optional)
            search_defaults: Whether to look in DEFAULT_CONFIG_PATHS as well
        """
        self.config = AppConfig()
        self.config_file = config_file
        self.search_defaults = search_defaults
        self.loaded_from: Optional[Path] = None
        self.logger = logger

        if HAS_DOTENV:
            env_files = ['.env', '.env.local', Path.home() / '.crossimpact' / '.env']
            for env_file in env_files:
                if Path(env_file).exists():
                    load_dotenv(env_file)
                    self.logger.debug(f"Loaded environment from: {env_file}")
                    break

        self._load_from_file()
        self._load_from_env()

    def _load_from_file(self):
        """Load configuration from file"""
        config_paths = []
        if self.config_file:
            explicit = Path(self.config_file).expanduser()
            if not explicit.exists():
                raise FileNotFoundError(f"Configuration file not found: {self.config_file}")
            config_paths.append(explicit)
        if self.search_defaults:
            config_paths.extend(Path(p).expanduser() for p in self.DEFAULT_CONFIG_PATHS)

        for path in config_paths:
            if not path.exists():
                continue
            with open(path, 'r') as f:
                data = json.load(f)
            self._update_config(data)
            self.loaded_from = path
            self.logger.info(f"Loaded configuration from: {path}")
            return

    def _env_mappings(self) -> Dict[str, Tuple[str, ...]]:
        """CROSSIMPACT_<SECTION>_<KEY> for every section field, CROSSIMPACT_<KEY> for top level."""
        mappings: Dict[str, Tuple[str, ...]] = {}
        for section in SECTIONS:
            for f in fields(getattr(self.config, section)):
                mappings[f"{self.ENV_PREFIX}{section.upper()}_{f.name.upper()}"] = (section, f.name)
        for key in TOP_LEVEL:
            mappings[f"{self.ENV_PREFIX}{key.upper()}"] = (key,)
        return mappings

    def _load_from_env(self):
        """Load configuration from environment variables"""
        for env_var, mapping in self._env_mappings().items():
            value = os.getenv(env_var)
            if value is not None:
                self._set_nested_value(mapping, value)
                self.logger.debug(f"Configuration override from {env_var}")

    def _update_config(self, data: dict):
        """Update configuration from dictionary"""
        for section in SECTIONS:
            if section in data:
                target = getattr(self.config, section)
                for key, value in data[section].items():
                    if hasattr(target, key):
                        self._set_nested_value((section, key), value)
                    else:
                        self.logger.warning(f"Unknown configuration key ignored: {section}.{key}")

        for key in TOP_LEVEL:
            if key in data:
                self._set_nested_value((key,), data[key])

    def _set_nested_value(self, mapping: tuple, value: Any):
        """Set a (possibly nested) configuration value, coercing to the field type"""
        if len(mapping) == 1:
            target, attr_name = self.config, mapping[0]
        else:
            target, attr_name = getattr(self.config, mapping[0]), mapping[1]
        current = getattr(target, attr_name)
        setattr(target, attr_name, self._coerce(value, type(current)))

    @staticmethod
    def _coerce(value: Any, kind: type) -> Any:
        if kind is bool:
            if isinstance(value, str):
                return value.strip().lower() in ('true', '1', 'yes', 'on')
            return bool(value)
        if kind is int:
            return int(float(value)) if isinstance(value, str) else int(value)
        if kind is float:
            return float(value)
        return value

    def override_with_args(self, **kwargs):
        """Override configuration with command-line arguments (None means 'not given')"""
        mappings = {
            'seed': ('simulation', 'seed'),
            'days': ('simulation', 'days'),
            'workers': ('simulation', 'workers'),
            'lam': ('simulation', 'lam'),
            'cv': ('simulation', 'cv'),
            'progress': ('simulation', 'progress'),
            'qp_max_iter': ('qp', 'max_iter'),
            'qp_tolerance': ('qp', 'tolerance'),
            'residual_threshold': ('calibration', 'residual_threshold'),
            'mle_max_iter': ('estimation', 'max_iter'),
            'gtol': ('estimation', 'gtol'),
            'output_dir': ('output_dir',),
            'log_to_file': ('log_to_file',),
            'debug': ('debug',),
        }

        for arg_name, value in kwargs.items():
            if value is not None and arg_name in mappings:
                self._set_nested_value(mappings[arg_name], value)

    def to_dict(self) -> dict:
        return asdict(self.config)

    def save_to_file(self, filepath: Optional[str] = None) -> Path:
        """Save current configuration to file"""
        if not filepath:
            filepath = self.config_file or "config.json"
        with open(filepath, 'w') as f:
            json.dump(self.to_dict(), f, indent=4)
        self.logger.info(f"Configuration saved to: {filepath}")
        return Path(filepath)

    def create_template(self, filepath: str = "config.json.template") -> Path:
        """Create a configuration template file holding every default"""
        template = asdict(AppConfig())
        with open(filepath, 'w') as f:
            json.dump(template, f, indent=4)
        self.logger.info(f"Configuration template created: {filepath}")
        return Path(filepath)

    def describe(self) -> Dict[str, Any]:
        """Flattened view (section.key -> value) used in run summaries"""
        flat: Dict[str, Any] = {}
        for key, value in self.to_dict().items():
            if isinstance(value, dict):
                for sub_key, sub_value in value.items():
                    flat[f"{key}.{sub_key}"] = sub_value
            else:
                flat[key] = value
        return flat

    def __repr__(self):
        """String representation"""
        return f"ConfigManager(loaded_from={self.loaded_from}, debug={self.config.debug})"
