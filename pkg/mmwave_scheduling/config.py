"""
Configuration management for scheduling sweeps
"""

import copy
import os
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import yaml
from loguru import logger

from .exceptions import ConfigError, DomainError
from .harness import PRESETS, figure_preset
from .models import ALGORITHM_PARAM_FIELDS, DEFAULT_ALGORITHMS, SchedulerId, SweepSpec, SystemConfig

LOG_LEVELS = ["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"]

DEFAULT_CONFIG = {
    "system": {
        "num_antennas": 64,
        "num_users": 100,
        "num_scheduled": 8,
        "num_paths": 4,
        "num_stored_beams": 8,
        "ortho_threshold": 0.5,
        "beam_overlap_limit": 3,
        "antenna_spacing_ratio": 0.5,
    },
    "sweep": {
        "preset": None,  # fig2, fig3, fig4, fig2-desk, ...
        "rho_db": [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
        "bits": [2],
        "trials": 200,
        "seed": 0,
        "algorithms": list(DEFAULT_ALGORITHMS),
        "n_ol_overrides": {},  # bits -> N_OL
        "algorithm_params": {},  # algorithm -> {ortho_threshold, beam_overlap_limit}
        "workers": 1,
    },
    "logging": {
        "level": os.getenv("MMWAVE_LOG_LEVEL", "INFO"),
        "format": "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name} - {message}",
        "file": None,  # Set to a path to enable file logging
    },
}


def _positive_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and x > 0


def _number_list(x) -> bool:
    return isinstance(x, list) and len(x) > 0 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
    )


def _known_algorithms(x) -> bool:
    if not isinstance(x, list) or not x:
        return False
    try:
        for value in x:
            SchedulerId.parse(value)
    except KeyError:
        return False
    return True


def _algorithm_params(x) -> bool:
    if not isinstance(x, dict):
        return False
    if x and not _known_algorithms(list(x)):
        return False
    return all(
        isinstance(v, dict) and set(v) <= set(ALGORITHM_PARAM_FIELDS) for v in x.values()
    )


# Validation rules
CONFIG_SCHEMA = {
    "system": {
        "type": dict,
        "required_keys": [
            "num_antennas",
            "num_users",
            "num_scheduled",
            "num_paths",
            "num_stored_beams",
        ],
        "validators": {
            "num_antennas": _positive_int,
            "num_users": _positive_int,
            "num_scheduled": _positive_int,
            "num_paths": _positive_int,
            "num_stored_beams": _positive_int,
            "ortho_threshold": lambda x: isinstance(x, (int, float)) and 0 <= x <= 1,
            "beam_overlap_limit": lambda x: isinstance(x, int) and x >= 0,
            "antenna_spacing_ratio": lambda x: isinstance(x, (int, float)) and x > 0,
        },
    },
    "sweep": {
        "type": dict,
        "required_keys": ["rho_db", "bits", "trials", "seed", "algorithms"],
        "validators": {
            "rho_db": _number_list,
            "bits": lambda x: _number_list(x) and all(isinstance(b, int) and b > 0 for b in x),
            "trials": _positive_int,
            "seed": lambda x: isinstance(x, int) and 0 <= x < 2 ** 64,
            "algorithms": _known_algorithms,
            "preset": lambda x: isinstance(x, str) and x.strip().lower() in PRESETS,
            "n_ol_overrides": lambda x: isinstance(x, dict),
            "algorithm_params": _algorithm_params,
            "workers": _positive_int,
        },
    },
    "logging": {
        "type": dict,
        "required_keys": ["level", "format"],
        "validators": {
            "level": lambda x: isinstance(x, str) and x.upper() in LOG_LEVELS,
            "format": lambda x: isinstance(x, str) and len(x) > 0,
        },
    },
}


def _deep_update(base: Dict[str, Any], update: Mapping[str, Any]) -> None:
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value


class Config:
    """Configuration manager for scheduling sweeps"""

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Initialize configuration

        Args:
            config_path: Path to a YAML config file. If None, uses defaults.
        """
        self.config_path = Path(config_path) if config_path else None
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from file merged over the defaults"""
        config = copy.deepcopy(DEFAULT_CONFIG)
        if self.config_path is None:
            return config
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Failed to load config from {self.config_path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config file {self.config_path} must contain a mapping")
        _deep_update(config, loaded)
        logger.debug(f"Loaded configuration from {self.config_path}")
        return config

    def save(self, path: Union[str, Path]) -> None:
        """Write the current configuration as YAML"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.config, f, sort_keys=False)

    def get(self, key: str, default=None) -> Any:
        """Get configuration value (dot notation, e.g. 'sweep.trials')"""
        value = self.config
        for k in key.split("."):
            if isinstance(value, dict):
                value = value.get(k)
            else:
                return default
            if value is None:
                return default
        return value

    def set(self, key: str, value: Any):
        """Set configuration value"""
        keys = key.split(".")
        config = self.config
        for k in keys[:-1]:
            if k not in config:
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value

    def apply_overrides(self, overrides: Mapping[str, Any]) -> None:
        """Set every dotted key whose value is not None (CLI flags win over file values)"""
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)

    def validate(self) -> Tuple[bool, List[str]]:
        """
        Validate configuration against schema

        Returns:
            Tuple of (is_valid, list_of_errors)
        """
        errors = []

        for section, schema in CONFIG_SCHEMA.items():
            if section not in self.config:
                errors.append(f"Missing required section: {section}")
                continue

            section_config = self.config[section]

            if not isinstance(section_config, schema["type"]):
                errors.append(f"Section '{section}' must be a {schema['type'].__name__}")
                continue

            for required_key in schema.get("required_keys", []):
                if required_key not in section_config:
                    errors.append(f"Missing required key '{required_key}' in section '{section}'")

            for key, validator in schema.get("validators", {}).items():
                if key in section_config and section_config[key] is not None:
                    if not validator(section_config[key]):
                        errors.append(f"Invalid value for '{section}.{key}': {section_config[key]}")

        return (len(errors) == 0, errors)

    def _require_valid(self) -> None:
        ok, errors = self.validate()
        if not ok:
            raise ConfigError("Invalid configuration: " + "; ".join(errors))

    def to_system_config(self) -> SystemConfig:
        """Build the SystemConfig described by the 'system' section"""
        self._require_valid()
        fields = {k: v for k, v in self.config["system"].items() if v is not None}
        try:
            return SystemConfig(**fields)
        except (TypeError, DomainError) as e:
            raise ConfigError(f"Invalid system section: {e}") from e

    def to_sweep_spec(self) -> SweepSpec:
        """
        Build the SweepSpec described by the 'sweep' section

        With ``sweep.preset`` set, the preset supplies the grids, trial count
        and system; seed, algorithms, N_OL overrides and per-algorithm parameters
        still come from the 'sweep' section.
        """
        self._require_valid()
        sweep = self.config["sweep"]
        overrides = {
            int(bits): int(n_ol) for bits, n_ol in (sweep.get("n_ol_overrides") or {}).items()
        }
        algorithm_params = sweep.get("algorithm_params") or {}
        preset = sweep.get("preset")
        try:
            if preset:
                spec = figure_preset(preset, master_seed=sweep["seed"])
                return replace(
                    spec,
                    algorithms=tuple(sweep["algorithms"]),
                    n_ol_overrides={**spec.n_ol_overrides, **overrides},
                    algorithm_params={**spec.algorithm_params, **algorithm_params},
                )
            return SweepSpec(
                rho_db_grid=tuple(sweep["rho_db"]),
                bits_grid=tuple(sweep["bits"]),
                trials=sweep["trials"],
                base_config=self.to_system_config(),
                n_ol_overrides=overrides,
                algorithms=tuple(sweep["algorithms"]),
                master_seed=sweep["seed"],
                algorithm_params=algorithm_params,
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid sweep section: {e}") from e
