"""
TilingForge - Utility Functions

Helper functions for configuration, environment, and logging.
"""

import os
import logging
import yaml
from pathlib import Path
from typing import Dict, Any, Optional, Union
from dataclasses import dataclass


logger = logging.getLogger(__name__)

DEFAULT_SEED = 0x5EED
SEED_ENV_VAR = "TILINGFORGE_SEED"


@dataclass
class OptimizerConfig:
    """Settings for multi-start a-maximization."""
    seed: int = DEFAULT_SEED
    starts: int = 32
    max_iterations: int = 100000
    gradient_tolerance: float = 1e-10
    box_epsilon: float = 1e-9
    uniqueness_tolerance: float = 1e-6

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "OptimizerConfig":
        data = data or {}
        return cls(
            seed=parse_seed(data.get("seed", DEFAULT_SEED)),
            starts=int(data.get("starts", 32)),
            max_iterations=int(data.get("max_iterations", 100000)),
            gradient_tolerance=float(data.get("gradient_tolerance", 1e-10)),
            box_epsilon=float(data.get("box_epsilon", 1e-9)),
            uniqueness_tolerance=float(data.get("uniqueness_tolerance", 1e-6)),
        )


@dataclass
class AmoebaConfig:
    """Fiber grid and acceptance threshold for curve sampling."""
    range: float = 4.0
    grid: int = 200
    residual_tolerance: float = 1e-8


@dataclass
class AppConfig:
    """Application configuration."""
    tolerance: float = 1e-6
    output_dir: str = "output"
    verbose_logging: bool = False

    optimizer: OptimizerConfig = None
    amoeba: AmoebaConfig = None

    # Series truncation and q-expansion length
    series_order: int = 30
    q_terms: int = 64

    def __post_init__(self):
        if self.optimizer is None:
            self.optimizer = OptimizerConfig()
        if self.amoeba is None:
            self.amoeba = AmoebaConfig()


def parse_seed(value: Union[int, str]) -> int:
    """Parse a seed given as an int, a decimal string or a 0x hex string."""
    if isinstance(value, int):
        return value
    text = str(value).strip()
    try:
        return int(text, 16) if text.lower().startswith("0x") else int(text)
    except ValueError as e:
        raise ValueError(f"Invalid seed: {value!r}") from e


def load_env_file(env_path: str = ".env") -> Dict[str, str]:
    """
    Load environment variables from a .env file.

    Supports simple KEY=VALUE format and quoted values.

    Args:
        env_path: Path to .env file

    Returns:
        Dictionary of environment variables
    """
    env_vars = {}
    path = Path(env_path)

    if not path.exists():
        logger.debug(f"Env file not found: {env_path}")
        return env_vars

    with open(path, "r") as f:
        for line in f:
            line = line.strip()

            if not line or line.startswith("#") or "=" not in line:
                continue

            key, value = line.split("=", 1)
            key = key.strip()
            value = value.strip()

            if (value.startswith('"') and value.endswith('"')) or \
               (value.startswith("'") and value.endswith("'")):
                value = value[1:-1]

            env_vars[key] = value

    logger.debug(f"Loaded {len(env_vars)} variables from {env_path}")
    return env_vars


def load_config(config_path: str = "config.yaml") -> Dict[str, Any]:
    """
    Load application configuration from YAML file.

    Args:
        config_path: Path to config.yaml

    Returns:
        Configuration dictionary
    """
    path = Path(config_path)

    if not path.exists():
        logger.warning(f"Config file not found: {config_path}")
        return {}

    with open(path, "r") as f:
        config = yaml.safe_load(f) or {}

    logger.debug(f"Loaded config from {config_path}")
    return config


def load_app_config(
    env_path: str = ".env",
    config_path: str = "config.yaml",
) -> AppConfig:
    """
    Load complete application configuration from env and config files.

    TILINGFORGE_SEED in the environment (or the env file) overrides the
    optimizer seed from config.yaml.

    Args:
        env_path: Path to .env file
        config_path: Path to config.yaml

    Returns:
        AppConfig object
    """
    env_vars = load_env_file(env_path)

    # Real environment variables take precedence over the env file
    for key, value in env_vars.items():
        if key not in os.environ:
            os.environ[key] = value

    yaml_config = load_config(config_path)

    optimizer = OptimizerConfig.from_dict(yaml_config.get("optimizer"))
    seed_override = os.environ.get(SEED_ENV_VAR)
    if seed_override:
        optimizer.seed = parse_seed(seed_override)
        logger.debug(f"Optimizer seed overridden by {SEED_ENV_VAR}: {optimizer.seed:#x}")

    amoeba_data = yaml_config.get("amoeba") or {}

    return AppConfig(
        tolerance=float(yaml_config.get("tolerance", 1e-6)),
        output_dir=yaml_config.get("output_dir", "output"),
        verbose_logging=yaml_config.get("verbose_logging", False),
        optimizer=optimizer,
        amoeba=AmoebaConfig(
            range=float(amoeba_data.get("range", 4.0)),
            grid=int(amoeba_data.get("grid", 200)),
            residual_tolerance=float(amoeba_data.get("residual_tolerance", 1e-8)),
        ),
        series_order=int(yaml_config.get("series_order", 30)),
        q_terms=int(yaml_config.get("q_terms", 64)),
    )


def setup_logging(verbose: bool = False) -> None:
    """
    Configure logging for the application.

    Args:
        verbose: Enable debug logging
    """
    level = logging.DEBUG if verbose else logging.INFO

    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    # Reduce noise from sympy
    logging.getLogger("sympy").setLevel(logging.WARNING)


def validate_config(config: AppConfig) -> list[str]:
    """
    Validate application configuration.

    Args:
        config: AppConfig to validate

    Returns:
        List of validation error messages (empty if valid)
    """
    errors = []

    if config.tolerance <= 0:
        errors.append(f"tolerance must be positive, got {config.tolerance}")
    if config.series_order < 0:
        errors.append(f"series_order must be non-negative, got {config.series_order}")
    if config.q_terms < 1:
        errors.append(f"q_terms must be at least 1, got {config.q_terms}")

    opt = config.optimizer
    if opt.starts < 1:
        errors.append(f"optimizer.starts must be at least 1, got {opt.starts}")
    if opt.max_iterations < 1:
        errors.append(f"optimizer.max_iterations must be at least 1, got {opt.max_iterations}")
    if opt.gradient_tolerance <= 0:
        errors.append(f"optimizer.gradient_tolerance must be positive, got {opt.gradient_tolerance}")
    if not 0 < opt.box_epsilon < 1:
        errors.append(f"optimizer.box_epsilon must lie in (0, 1), got {opt.box_epsilon}")

    if config.amoeba.range <= 0:
        errors.append(f"amoeba.range must be positive, got {config.amoeba.range}")
    if config.amoeba.grid < 1:
        errors.append(f"amoeba.grid must be at least 1, got {config.amoeba.grid}")

    return errors
