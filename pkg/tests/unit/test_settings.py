"""Unit tests for Settings module."""

from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError as PydanticValidationError

from image_set_filter.constants import FilterDefaults, SolverDefaults
from image_set_filter.settings import Settings, load_settings


class TestSettingsBasicLoading:
    """Test basic settings loading from different sources."""

    def test_load_from_env_vars(self, monkeypatch):
        """Test that settings are correctly loaded from environment variables."""
        monkeypatch.setenv("IMAGE_SET_FILTER_SEED", "42")
        monkeypatch.setenv("IMAGE_SET_FILTER_WORKERS", "4")
        monkeypatch.setenv("IMAGE_SET_FILTER_SDP_TOL", "1e-8")

        settings = load_settings()

        assert settings.seed == 42
        assert settings.workers == 4
        assert settings.sdp_tol == 1e-8

    def test_load_from_yaml(self, sample_settings_file: Path):
        """Test that settings are correctly loaded from a YAML file."""
        settings = load_settings(config_file=sample_settings_file)

        assert settings.seed == 11
        assert settings.workers == 2
        assert settings.mvee_tol == 1e-8

    def test_yaml_overrides_env_vars(self, monkeypatch, temp_config_file: Path):
        """Test that YAML settings override environment variables."""
        monkeypatch.setenv("IMAGE_SET_FILTER_SEED", "42")
        monkeypatch.setenv("IMAGE_SET_FILTER_WORKERS", "4")
        with open(temp_config_file, "w") as f:
            yaml.dump({"seed": 7}, f)

        settings = load_settings(config_file=temp_config_file)

        assert settings.seed == 7
        assert settings.workers == 4

    def test_default_values(self):
        """Test that settings use default values when no config is provided."""
        settings = Settings()

        assert settings.seed == 0
        assert settings.workers == 1
        assert settings.output_dir == Path("results")
        assert settings.mvee_tol == SolverDefaults.MVEE_TOL
        assert settings.filter_mvee_tol == FilterDefaults.MVEE_TOL

    def test_load_fixture_file(self):
        """The shipped sample configuration loads."""
        path = Path(__file__).parent.parent / "fixtures" / "sample_config.yaml"

        settings = load_settings(config_file=path)

        assert settings.seed == 20240611
        assert settings.sdp_tol == 1e-9

    def test_empty_yaml(self, temp_config_file: Path):
        """An empty file gives the defaults."""
        temp_config_file.write_text("")

        assert load_settings(config_file=temp_config_file).seed == 0


class TestSettingsPathResolution:
    """Test path resolution and handling."""

    def test_relative_output_dir_resolved(self, sample_settings_file: Path):
        """Relative output directories are resolved against the config file."""
        settings = load_settings(config_file=sample_settings_file)

        assert settings.output_dir.is_absolute()
        expected = (sample_settings_file.parent / "results").resolve()
        assert settings.output_dir == expected

    def test_absolute_paths_preserved(self, temp_config_file: Path, tmp_path: Path):
        """Test that absolute paths are preserved."""
        out = tmp_path / "absolute_out"
        with open(temp_config_file, "w") as f:
            yaml.dump({"output_dir": str(out)}, f)

        settings = load_settings(config_file=temp_config_file)

        assert settings.output_dir == out.resolve()


class TestSettingsValidation:
    """Test settings validation and constraints."""

    def test_seed_range(self):
        """Seeds are unsigned 64-bit integers."""
        assert Settings(seed=2**64 - 1).seed == 2**64 - 1
        with pytest.raises(PydanticValidationError):
            Settings(seed=-1)
        with pytest.raises(PydanticValidationError):
            Settings(seed=2**64)

    def test_workers_positive(self):
        """At least one worker."""
        with pytest.raises(PydanticValidationError):
            Settings(workers=0)

    def test_tolerances_positive(self):
        """Solver tolerances must be positive."""
        with pytest.raises(PydanticValidationError):
            Settings(sdp_tol=0.0)
        with pytest.raises(PydanticValidationError):
            Settings(mvee_tol=-1e-7)

    def test_unknown_keys_ignored(self):
        """Extra keys do not fail the load."""
        settings = Settings(**{"seed": 3, "legacy_key": "x"})

        assert settings.seed == 3
