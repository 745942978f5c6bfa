"""Run-level settings and configuration management."""

from pathlib import Path

import yaml
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from .constants import FilterDefaults, SolverDefaults


class Settings(BaseSettings):
    """
    Run-level defaults for image-set-filter.

    Settings are loaded in the following order of precedence (highest to lowest):
    1. Values from a YAML file passed to load_settings
    2. Environment variables (e.g., IMAGE_SET_FILTER_SEED)
    3. .env file (if found)
    4. Default values

    CLI flags override all of these.
    """

    model_config = SettingsConfigDict(
        env_prefix="IMAGE_SET_FILTER_", env_file=".env", extra="ignore"
    )

    seed: int = Field(0, ge=0, lt=2**64)  # Default seed when --seed is not given
    workers: int = Field(1, ge=1)  # Threads for sample generation and mapping
    output_dir: Path = Path("results")

    # --- Solver tolerances ---
    mvee_tol: float = Field(SolverDefaults.MVEE_TOL, gt=0.0)
    filter_mvee_tol: float = Field(FilterDefaults.MVEE_TOL, gt=0.0)
    sdp_tol: float = Field(SolverDefaults.PAS_TOL, gt=0.0)


def load_settings(config_file: Path | None = None) -> Settings:
    """Load settings from a YAML file, environment variables, and defaults."""
    if config_file:
        config_file = Path(config_file).expanduser().resolve()

        with open(config_file, encoding="utf-8") as f:
            yaml_settings = yaml.safe_load(f) or {}

        # Relative output directories are taken relative to the config file
        if "output_dir" in yaml_settings:
            output_dir = Path(yaml_settings["output_dir"]).expanduser()
            if not output_dir.is_absolute():
                output_dir = config_file.parent / output_dir
            yaml_settings["output_dir"] = str(output_dir.resolve())

        return Settings(**yaml_settings)

    return Settings()
