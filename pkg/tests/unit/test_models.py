"""Unit tests for the validated configuration records."""

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from image_set_filter.exceptions import ConfigurationError
from image_set_filter.geometry import Box, NormType
from image_set_filter.models import (
    FilterConfig,
    InitialSetConfig,
    ModelFile,
    NPolicy,
    RunManifest,
    ViolationEstimate,
    box_as_set,
)
from image_set_filter.scenario import CertificateMethod, SetFamily


class TestModelFile:
    """Test model file parsing."""

    def test_expressions(self, linear_model_dict):
        """A full expression list builds a Model."""
        model = ModelFile(**linear_model_dict).to_model()

        assert model.name == "linear"
        assert (model.n, model.n_w, model.n_y) == (2, 2, 1)
        np.testing.assert_allclose(model.measurement_box.upper, [0.1])

    def test_state_dimension_defaults_to_dynamics(self):
        """n may be omitted."""
        model = ModelFile(dynamics=["x1", "2*x2"]).to_model()

        assert model.n == 2

    def test_builtin_with_override(self):
        """Built-ins take replacement boxes."""
        model = ModelFile(builtin="abrc08", V=[[-0.5, 0.5]]).to_model()

        assert model.name == "abrc08"
        np.testing.assert_allclose(model.measurement_box.upper, [0.5])
        np.testing.assert_allclose(model.noise_box.upper, [0.1, 0.1])

    def test_needs_a_source(self):
        """Either builtin or dynamics."""
        with pytest.raises(PydanticValidationError):
            ModelFile(name="empty")
        with pytest.raises(PydanticValidationError):
            ModelFile(builtin="sysF", dynamics=["x1"])

    def test_unknown_keys_rejected(self, linear_model_dict):
        """Typos in model files are errors."""
        with pytest.raises(PydanticValidationError):
            ModelFile(**linear_model_dict, dynamcis=["x1"])

    def test_box_dict_form(self):
        """Boxes may be written as lower/upper lists."""
        model = ModelFile(
            dynamics=["x1"], X0={"lower": [-2.0], "upper": [3.0]}
        ).to_model()

        np.testing.assert_allclose(model.initial_box.lower, [-2.0])


class TestInitialSetConfig:
    """Test the initial set description."""

    def test_disc(self):
        """A radius gives P = I / radius."""
        A0 = InitialSetConfig(center=[0.6, 0.07], radius=6.8).to_set()

        assert A0.norm is NormType.TWO
        assert A0.volume == pytest.approx(np.pi * 6.8**2)
        assert A0.contains([0.6 + 6.8, 0.07])

    def test_explicit_shape(self):
        """A shape matrix is taken as given."""
        A0 = InitialSetConfig(
            center=[0.0, 0.0], shape=[[2.0, 0.0], [0.0, 0.5]]
        ).to_set()

        assert A0.volume == pytest.approx(np.pi)

    def test_box_kind(self):
        """Boxes become inf-norm sets."""
        A0 = InitialSetConfig(kind="box", box=[[0.0, 2.0], [0.0, 1.0]]).to_set()

        assert A0.norm is NormType.INF
        assert A0.volume == pytest.approx(2.0)

    def test_radius_xor_shape(self):
        """Exactly one of radius and shape."""
        with pytest.raises(PydanticValidationError):
            InitialSetConfig(center=[0.0], radius=1.0, shape=[[1.0]])
        with pytest.raises(PydanticValidationError):
            InitialSetConfig(center=[0.0])

    def test_box_kind_needs_box(self):
        """kind 'box' without a box is invalid."""
        with pytest.raises(PydanticValidationError):
            InitialSetConfig(kind="box")

    def test_radius_positive(self):
        """Zero radius is refused."""
        with pytest.raises(PydanticValidationError):
            InitialSetConfig(center=[0.0], radius=0.0)


class TestBoxAsSet:
    """Test the box to NasSet conversion."""

    def test_degenerate_box(self):
        """A flat box has no inf-norm representation."""
        with pytest.raises(ConfigurationError):
            box_as_set(Box.from_pairs([[0.0, 0.0], [0.0, 1.0]]))


class TestFilterConfig:
    """Test filter configuration validation."""

    def test_defaults(self):
        """Ellipsoids with N from the bounds, resampling on, reuse off."""
        config = FilterConfig()

        assert config.family is SetFamily.ELLIPSOID
        assert config.n_policy is NPolicy.FROM_BOUNDS
        assert config.resample and not config.reuse
        assert config.max_resample_attempts == 50

    def test_from_dict(self, filter_config_dict):
        """YAML dictionaries validate."""
        config = FilterConfig(**filter_config_dict)

        assert config.n_fixed == 80
        assert config.horizon == 4

    def test_pas_rejected(self):
        """Filtering runs on norm-based sets only."""
        with pytest.raises(PydanticValidationError):
            FilterConfig(family="pas")

    def test_policy_consistency(self):
        """fixed needs n_fixed; from-bounds forbids it."""
        with pytest.raises(PydanticValidationError):
            FilterConfig(n_policy="fixed")
        with pytest.raises(PydanticValidationError):
            FilterConfig(n_fixed=100)

    @pytest.mark.parametrize("field", ["epsilon", "delta"])
    @pytest.mark.parametrize("value", [0.0, 1.0, 1.5])
    def test_probability_ranges(self, field, value):
        """epsilon and delta lie in (0, 1)."""
        with pytest.raises(PydanticValidationError):
            FilterConfig(**{field: value})

    def test_attempts_positive(self):
        """At least one resample round."""
        with pytest.raises(PydanticValidationError):
            FilterConfig(max_resample_attempts=0)

    def test_schedule_covers_horizon(self):
        """One V per step."""
        with pytest.raises(PydanticValidationError):
            FilterConfig(horizon=3, measurement_noise_schedule=[[[-1, 1]]])

    def test_measurement_box_schedule(self):
        """The schedule overrides the model's V per step."""
        config = FilterConfig(
            horizon=2, measurement_noise_schedule=[[[-1, 1]], [[-2, 2]]]
        )
        default = Box.from_pairs([[-0.2, 0.2]])

        assert config.measurement_box(2, default).upper[0] == 2.0
        assert FilterConfig().measurement_box(1, default) is default

    def test_certificate_from_bounds(self):
        """The per-step certificate inverts the tail."""
        certificate = FilterConfig(epsilon=0.1, delta=1e-3).certificate(2)

        assert certificate.method is CertificateMethod.TAIL_INVERSION
        assert certificate.dimension == 5

    def test_certificate_fixed(self):
        """A fixed N reports its implied epsilon."""
        certificate = FilterConfig(n_policy="fixed", n_fixed=300).certificate(2)

        assert certificate.sample_size == 300

    def test_unknown_keys_rejected(self):
        """Typos in filter files are errors."""
        with pytest.raises(PydanticValidationError):
            FilterConfig(horizn=10)


class TestRecords:
    """Test result records."""

    def test_violation_fraction_range(self):
        """Fractions lie in [0, 1]."""
        with pytest.raises(PydanticValidationError):
            ViolationEstimate(fraction=1.2, samples=10)

    def test_manifest_dump(self):
        """Manifests serialize to plain JSON types."""
        manifest = RunManifest(
            tool_version="0.3.0",
            command="bounds",
            arguments={"eps": 0.1},
            seed=3,
        )
        data = manifest.model_dump(mode="json")

        assert data["arguments"] == {"eps": 0.1}
        assert data["outputs"] == []
