"""
Shared pytest fixtures for image-set-filter tests.

This module provides reusable fixtures for:
- Point clouds with known minimum-volume enclosures
- Sets of every family
- Built-in and file-based system models
- Filter configuration and model files in temporary directories
"""

import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from image_set_filter.geometry import Box, NasSet, NormType
from image_set_filter.settings import Settings
from image_set_filter.systems import Model, abrc08, identity, sys_f

# ============================================================================
# Configuration Fixtures
# ============================================================================


@pytest.fixture
def temp_config_file(tmp_path: Path) -> Path:
    """Path for a temporary YAML settings file."""
    return tmp_path / "config.yaml"


@pytest.fixture
def sample_settings_dict() -> dict:
    """Provide a sample settings dictionary."""
    return {
        "seed": 11,
        "workers": 2,
        "output_dir": "results",
        "mvee_tol": 1e-8,
    }


@pytest.fixture
def sample_settings_file(tmp_path: Path, sample_settings_dict: dict) -> Path:
    """Create a temporary settings file with sample data."""
    config_path = tmp_path / "settings.yaml"
    with open(config_path, "w") as f:
        yaml.dump(sample_settings_dict, f)
    return config_path


@pytest.fixture
def default_settings() -> Settings:
    """Settings with every default."""
    return Settings()


# ============================================================================
# Point Cloud Fixtures
# ============================================================================


@pytest.fixture
def diamond_points() -> np.ndarray:
    """{(+-1, 0), (0, +-1)}: minimum-volume ellipsoid is the unit disc."""
    return np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


@pytest.fixture
def square_corners() -> np.ndarray:
    """Corners of [-1, 1]^2: the disc of radius sqrt(2) and the square itself."""
    return np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data (never used inside the library)."""
    return np.random.default_rng(20240611)


@pytest.fixture
def gaussian_cloud(rng: np.random.Generator) -> np.ndarray:
    """Correlated 2-D cloud of 60 points."""
    mixing = np.array([[2.0, 0.5], [0.3, 0.7]])
    return rng.standard_normal((60, 2)) @ mixing.T + np.array([1.0, -2.0])


# ============================================================================
# Set Fixtures
# ============================================================================


@pytest.fixture
def unit_box() -> Box:
    """[0, 1]^2."""
    return Box(np.zeros(2), np.ones(2))


@pytest.fixture
def unit_disc() -> NasSet:
    """Unit Euclidean disc at the origin."""
    return NasSet(center=np.zeros(2), shape=np.eye(2), norm=NormType.TWO)


@pytest.fixture
def scaled_ellipse() -> NasSet:
    """Ellipse with semi-axes 2 and 1/2 centered at (1, -1)."""
    return NasSet(center=np.array([1.0, -1.0]), shape=np.diag([0.5, 2.0]))


# ============================================================================
# Model Fixtures
# ============================================================================


@pytest.fixture
def sysf_model() -> Model:
    """Unmeasured two-state system with X = [0, 1]^2 and W = [-0.2, 0.2]^2."""
    return sys_f()


@pytest.fixture
def abrc08_model() -> Model:
    """Measured two-state system used for the filter experiments."""
    return abrc08()


@pytest.fixture
def identity_model() -> Model:
    """x+ = x on [0, 1]^2 without noise."""
    return identity()


@pytest.fixture
def linear_model_dict() -> dict:
    """A contracting linear system with a scalar measurement."""
    return {
        "name": "linear",
        "n": 2,
        "n_w": 2,
        "n_y": 1,
        "dynamics": ["0.5*x1 + 0.1*x2 + w1", "-0.2*x1 + 0.6*x2 + w2"],
        "measurement": ["x1 - x2"],
        "X0": [[-1.0, 1.0], [-1.0, 1.0]],
        "W": [[-0.05, 0.05], [-0.05, 0.05]],
        "V": [[-0.1, 0.1]],
    }


@pytest.fixture
def model_file(tmp_path: Path, linear_model_dict: dict) -> Path:
    """The linear model written as JSON."""
    path = tmp_path / "model.json"
    path.write_text(json.dumps(linear_model_dict))
    return path


@pytest.fixture
def filter_config_dict() -> dict:
    """Short, small-sample filter configuration."""
    return {
        "family": "ellipsoid",
        "epsilon": 0.2,
        "delta": 0.05,
        "n_policy": "fixed",
        "n_fixed": 80,
        "horizon": 4,
        "max_resample_attempts": 20,
    }


@pytest.fixture
def filter_config_file(tmp_path: Path, filter_config_dict: dict) -> Path:
    """The filter configuration written as YAML."""
    path = tmp_path / "filter.yaml"
    with open(path, "w") as f:
        yaml.dump(filter_config_dict, f)
    return path
