"""Unit tests for the image-set approximation service."""

import logging

import numpy as np
import pytest

from image_set_filter.constants import ApproximationDefaults, SamplingDefaults
from image_set_filter.exceptions import (
    ConfigurationError,
    InvalidDataError,
    ModelDomainError,
)
from image_set_filter.geometry import Box, NasSet, NormType
from image_set_filter.scenario import (
    CertificateMethod,
    SetFamily,
    required_samples_exact,
)
from image_set_filter.services import (
    ApproximationService,
    approximate_image_set,
    estimate_violation,
    propagate_samples,
)
from image_set_filter.systems import Model


@pytest.fixture
def log_model() -> Model:
    """x+ = log(x1) on [-0.5, 1.5]: a quarter of X leaves the domain."""
    return Model(
        name="log",
        n=1,
        n_w=0,
        n_y=0,
        dynamics=("log(x1)",),
        initial_box=Box.from_pairs([[-0.5, 1.5]]),
    )


class TestApproximate:
    """Test the scenario approximation of a one-step image."""

    def test_sysf_fixed_sample_size(self, sysf_model):
        """N = 200 gives a 200-point cloud, all inside the ellipsoid."""
        result = approximate_image_set(
            sysf_model, "ellipsoid", 0.1, 1e-3, seed=7, sample_size=200
        )

        assert result.cloud.shape == (200, 2)
        assert result.certificate.sample_size == 200
        assert np.all(result.fitted.contains(result.cloud, tol=1e-6))
        assert result.to_dict()["all_points_contained"]

    def test_sample_size_from_bounds(self, identity_model):
        """Without N the tail inversion fixes the sample size."""
        result = approximate_image_set(identity_model, "box", 0.1, 1e-3, seed=1)

        assert result.certificate.method is CertificateMethod.TAIL_INVERSION
        assert result.cloud.shape[0] == required_samples_exact(0.1, 1e-3, 4)

    def test_identity_box_inside_state_box(self, identity_model):
        """The image of [0, 1]^2 under x+ = x fits inside [0, 1]^2."""
        result = approximate_image_set(
            identity_model, "box", 0.1, 1e-3, seed=3, sample_size=2000
        )
        lower, upper = result.fitted.spans()

        assert np.all(lower >= -1e-12) and np.all(upper <= 1.0 + 1e-12)
        assert result.fitted.volume == pytest.approx(1.0, abs=0.01)

    def test_custom_state_sampler(self, identity_model):
        """A user-supplied sampler replaces uniform draws from X."""

        def inner_square(region, stream, count):
            gen = stream.generator()
            return 0.4 + 0.2 * gen.random((count, region.dimension))

        result = approximate_image_set(
            identity_model,
            "box",
            0.1,
            1e-3,
            seed=3,
            sample_size=500,
            sampler=inner_square,
        )
        lower, upper = result.fitted.spans()

        assert np.all(result.cloud >= 0.4) and np.all(result.cloud <= 0.6)
        assert np.all(lower >= 0.4 - 1e-12) and np.all(upper <= 0.6 + 1e-12)

    def test_reproducible(self, sysf_model):
        """Same seed, same cloud and set; worker count does not matter."""
        a = approximate_image_set(sysf_model, "ellipsoid", 0.2, 0.01, seed=5)
        b = approximate_image_set(sysf_model, "ellipsoid", 0.2, 0.01, seed=5, workers=3)

        np.testing.assert_array_equal(a.cloud, b.cloud)
        np.testing.assert_array_equal(a.fitted.shape, b.fitted.shape)

    def test_seeds_differ(self, sysf_model):
        """Different seeds give different clouds."""
        a = approximate_image_set(sysf_model, "box", 0.2, 0.01, seed=1)
        b = approximate_image_set(sysf_model, "box", 0.2, 0.01, seed=2)

        assert not np.array_equal(a.cloud, b.cloud)

    def test_pas_needs_degree(self, sysf_model):
        """The polynomial family has no default degree here."""
        with pytest.raises(ConfigurationError):
            ApproximationService().approximate(sysf_model, "pas", 0.1, 1e-3)

    def test_pas_small_instance(self, identity_model):
        """A degree-2 PAS on the identity image keeps every point."""
        result = approximate_image_set(
            identity_model, SetFamily.PAS, 0.2, 0.01, degree=2, seed=4, sample_size=40
        )
        data = result.to_dict()

        assert data["degree"] == 2
        assert data["all_points_contained"]
        assert min(data["gram_min_eigenvalue_margins"]) >= -1e-7
        estimate = data["volume_estimate"]
        assert 0.0 < estimate["value"] <= result.fitted.box.volume
        assert estimate["samples"] == ApproximationDefaults.PAS_VOLUME_SAMPLES

    def test_domain_error_names_sample(self, log_model):
        """A sample outside the domain of f stops the run with x reported."""
        with pytest.raises(ModelDomainError, match="x=") as excinfo:
            approximate_image_set(log_model, "box", 0.1, 1e-3, seed=0, sample_size=50)

        assert excinfo.value.component == "f1"

    def test_missing_state_box(self):
        """X is required."""
        model = Model(name="free", n=1, n_w=0, n_y=0, dynamics=("x1",))

        with pytest.raises(ConfigurationError):
            approximate_image_set(model, "box", 0.1, 1e-3)

    def test_result_document(self, sysf_model):
        """The JSON document carries set, certificate and solver report."""
        result = approximate_image_set(
            sysf_model, "ellipsoid", 0.1, 1e-3, seed=7, sample_size=100
        )
        data = result.to_dict()

        assert data["family"] == "ellipsoid"
        assert data["set"]["type"] == "nas"
        assert data["certificate"]["sample_size"] == 100
        assert data["volume"] == pytest.approx(result.fitted.volume)
        assert "timings" not in data


class TestPropagateSamples:
    """Test chunked propagation."""

    def test_first_failure_across_chunks(self, log_model):
        """The failing index is global, not per chunk."""
        size = SamplingDefaults.CHUNK_SIZE + 20
        states = np.ones((size, 1))
        states[SamplingDefaults.CHUNK_SIZE + 5, 0] = -1.0

        result = propagate_samples(log_model, states, None, workers=2)

        assert result.sample_index == SamplingDefaults.CHUNK_SIZE + 5
        assert result.n_errors == 1


class TestViolation:
    """Test the Monte Carlo violation estimate."""

    def test_small_violation_for_good_fit(self, identity_model):
        """A box fitted to many samples is rarely violated."""
        result = approximate_image_set(
            identity_model, "box", 0.1, 1e-3, seed=3, sample_size=2000
        )
        estimate = ApproximationService().estimate_violation(
            result.fitted, identity_model, 5000, seed=9
        )

        assert estimate.fraction < 0.05
        assert estimate.standard_error == pytest.approx(
            np.sqrt(estimate.fraction * (1.0 - estimate.fraction) / 5000)
        )

    def test_standard_error_for_large_m(self, identity_model):
        """The binomial standard error is reported from 10^4 samples."""
        half = NasSet(np.array([0.25, 0.5]), np.diag([4.0, 2.0]), NormType.INF)
        fraction, standard_error = estimate_violation(
            half, identity_model, SamplingDefaults.MIN_VALIDATION_SAMPLES, seed=2
        )

        assert fraction == pytest.approx(0.5, abs=0.02)
        assert standard_error == pytest.approx(0.005, abs=1e-3)

    def test_standard_error_for_small_m(self, identity_model, caplog):
        """Below 10^4 samples the standard error is still reported, with a warning."""
        half = NasSet(np.array([0.25, 0.5]), np.diag([4.0, 2.0]), NormType.INF)
        with caplog.at_level(logging.WARNING):
            fraction, standard_error = estimate_violation(
                half, identity_model, 400, seed=2
            )

        assert standard_error == pytest.approx(np.sqrt(fraction * (1 - fraction) / 400))
        assert standard_error > 0.0
        assert "unreliable" in caplog.text

    def test_domain_errors_count_as_violations(self, log_model, caplog):
        """Failed evaluations are violations and are logged."""
        everything = NasSet(np.zeros(1), np.array([[1e-6]]), NormType.TWO)
        with caplog.at_level(logging.WARNING):
            estimate = ApproximationService().estimate_violation(
                everything, log_model, 4000, seed=1
            )

        assert estimate.domain_errors > 0
        assert estimate.fraction == pytest.approx(estimate.domain_errors / 4000)
        assert "counted as violations" in caplog.text

    def test_positive_sample_count(self, identity_model, unit_disc):
        """M must be positive."""
        with pytest.raises(InvalidDataError):
            ApproximationService().estimate_violation(unit_disc, identity_model, 0)
