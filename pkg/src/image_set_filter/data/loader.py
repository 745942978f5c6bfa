"""
Data loading functionality.

This module provides a clean interface for loading model files, filter
configurations, measurement sequences and sample clouds.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Protocol

import numpy as np
import pandas as pd
import pydantic
import yaml

from ..constants import CSVConstants
from ..exceptions import (
    ConfigurationError,
    DataLoadError,
    ModelError,
    ValidationError,
)
from ..models import FilterConfig, ModelFile
from ..systems import Model, builtin_model

logger = logging.getLogger(__name__)


class DataLoaderProtocol(Protocol):
    """Protocol for data loaders."""

    def load_model(self, path: Path) -> Model:
        """Load a system model."""
        ...

    def load_filter_config(self, path: Path) -> FilterConfig:
        """Load a filter configuration."""
        ...

    def load_measurements(self, path: Path, n_y: int) -> np.ndarray:
        """Load a (K, n_y) measurement sequence."""
        ...


def _read_mapping(path: Path) -> dict[str, Any]:
    """Parse a JSON or YAML file into a mapping."""
    path = Path(path)
    if not path.exists():
        raise DataLoadError(f"File not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise DataLoadError(f"Failed to parse {path}: {e}") from e
    if not isinstance(data, dict):
        raise DataLoadError(f"{path} does not contain a mapping")
    return data


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


class ExperimentDataLoader:
    """
    Handles loading of experiment inputs from files.

    This class encapsulates all file I/O for models, configurations and
    measurement data; every failure surfaces as DataLoadError or
    ConfigurationError.
    """

    def __init__(self) -> None:
        self.logger = logging.getLogger(__name__)

    def load_model(self, path: Path) -> Model:
        """
        Load a model file ({builtin: name} or explicit expressions).

        Raises:
            DataLoadError: If the file cannot be read
            ConfigurationError: If the contents are not a valid model
        """
        data = _read_mapping(path)
        try:
            model = ModelFile.model_validate(data).to_model()
        except pydantic.ValidationError as e:
            raise ConfigurationError(f"Invalid model file {path}: {e}") from e
        except (ModelError, ValidationError) as e:
            raise ConfigurationError(f"Invalid model in {path}: {e}") from e
        self.logger.info(f"Loaded model '{model.name}' (n={model.n}) from {path}")
        return model

    def load_filter_config(self, path: Path) -> FilterConfig:
        """
        Load a filter configuration from JSON or YAML.

        Raises:
            DataLoadError: If the file cannot be read
            ConfigurationError: If a field is invalid
        """
        data = _read_mapping(path)
        try:
            config = FilterConfig.model_validate(data)
        except pydantic.ValidationError as e:
            raise ConfigurationError(f"Invalid filter config {path}: {e}") from e
        self.logger.info(f"Loaded filter config from {path}")
        return config

    def load_measurements(self, path: Path, n_y: int) -> np.ndarray:
        """
        Load measurements y_1..y_K from a CSV with columns y1..y{n_y}.

        An optional integer column k orders the rows.

        Raises:
            DataLoadError: If the file or a column is missing
        """
        path = Path(path)
        if not path.exists():
            raise DataLoadError(f"Measurement file not found: {path}")
        try:
            df = pd.read_csv(
                path, sep=CSVConstants.DEFAULT_SEPARATOR, float_precision="round_trip"
            )
        except Exception as e:
            raise DataLoadError(f"Failed to load measurements: {e}") from e
        if "k" in df.columns:
            df = df.sort_values("k", kind="stable")
        columns = [f"y{j + 1}" for j in range(n_y)]
        missing = [c for c in columns if c not in df.columns]
        if missing:
            raise DataLoadError(f"Measurement file {path} lacks columns {missing}")
        values = df[columns].to_numpy(dtype=float)
        if values.shape[0] == 0:
            raise DataLoadError(f"Measurement file {path} has no rows")
        self.logger.info(f"Loaded {values.shape[0]} measurements from {path}")
        return values

    def load_cloud(self, path: Path) -> np.ndarray:
        """
        Load a sample cloud CSV (columns x1..xn).

        Raises:
            DataLoadError: If the file is missing or has no x columns
        """
        path = Path(path)
        if not path.exists():
            raise DataLoadError(f"Cloud file not found: {path}")
        df = pd.read_csv(
            path, sep=CSVConstants.DEFAULT_SEPARATOR, float_precision="round_trip"
        )
        columns = [c for c in df.columns if c.startswith("x") and c[1:].isdigit()]
        if not columns:
            raise DataLoadError(f"Cloud file {path} has no x columns")
        columns.sort(key=lambda c: int(c[1:]))
        return df[columns].to_numpy(dtype=float)


def resolve_model(
    path: Path | None = None,
    builtin: str | None = None,
    loader: DataLoaderProtocol | None = None,
) -> Model:
    """
    Model from a file or a built-in name (exactly one of the two).

    Files are read with loader, an ExperimentDataLoader by default.

    Raises:
        ConfigurationError: If neither or both are given
    """
    if (path is None) == (builtin is None):
        raise ConfigurationError("Give exactly one of a model file and a built-in")
    if builtin is not None:
        return builtin_model(builtin)
    assert path is not None
    return (loader or ExperimentDataLoader()).load_model(path)


def load_filter_config(path: Path) -> FilterConfig:
    return ExperimentDataLoader().load_filter_config(path)
