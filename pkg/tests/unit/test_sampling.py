"""Unit tests for substreams and samplers."""

import numpy as np
import pytest

from image_set_filter.constants import SamplingDefaults
from image_set_filter.exceptions import (
    AcceptanceRateError,
    ConfigurationError,
    SamplingError,
)
from image_set_filter.geometry import Box, NasSet, NormType, PasSet
from image_set_filter.sampling import (
    SamplePurpose,
    SampleStream,
    chunk_sizes,
    rejection_sample,
    run_ordered,
    sample_ball,
    sample_box,
    sample_nas,
    sample_pas,
    sample_set,
)


class TestSampleStream:
    """Test substream keys."""

    def test_same_key_same_draws(self):
        """A stream is a value: equal keys give equal numbers."""
        a = SampleStream(5, epoch=2, index=1).generator(3).random(4)
        b = SampleStream(5, epoch=2, index=1).generator(3).random(4)

        np.testing.assert_array_equal(a, b)

    def test_purposes_are_independent(self):
        """State and noise draws of the same step differ."""
        stream = SampleStream(5)
        a = stream.at(purpose=SamplePurpose.STATE).generator().random(4)
        b = stream.at(purpose=SamplePurpose.PROCESS_NOISE).generator().random(4)

        assert not np.allclose(a, b)

    def test_at_keeps_seed(self):
        """at() only replaces the fields it is given."""
        stream = SampleStream(9, epoch=3).at(index=4)

        assert (stream.seed, stream.epoch, stream.index) == (9, 3, 4)

    def test_invalid_seed(self):
        """Seeds are 64-bit unsigned integers."""
        with pytest.raises(ConfigurationError):
            SampleStream(-1)
        with pytest.raises(ConfigurationError):
            SampleStream(2**64)


class TestChunking:
    """Test chunked evaluation."""

    def test_chunk_sizes(self):
        """Full chunks followed by the remainder."""
        size = SamplingDefaults.CHUNK_SIZE

        assert chunk_sizes(2 * size + 5) == [size, size, 5]
        assert chunk_sizes(size) == [size]

    def test_run_ordered_keeps_order(self):
        """Thread-pool results come back in input order."""
        assert run_ordered(lambda i: i * i, range(10), workers=4) == [
            i * i for i in range(10)
        ]

    def test_worker_count_does_not_change_samples(self, unit_box):
        """Draws spanning several chunks are identical for 1 and 4 workers."""
        stream = SampleStream(3)
        count = 2 * SamplingDefaults.CHUNK_SIZE + 17

        serial = sample_box(unit_box, stream, count, workers=1)
        threaded = sample_box(unit_box, stream, count, workers=4)

        np.testing.assert_array_equal(serial, threaded)


class TestSamplers:
    """Test the uniform samplers of every set family."""

    def test_box_samples_inside(self):
        """Samples cover the box and stay in it."""
        box = Box.from_pairs([[-0.2, 0.2], [1.0, 3.0]])
        points = sample_box(box, SampleStream(1), 5000)

        assert points.shape == (5000, 2)
        assert np.all(box.contains(points, tol=0.0))
        assert points[:, 1].mean() == pytest.approx(2.0, abs=0.05)

    def test_zero_width_coordinate_is_constant(self):
        """Point-mass coordinates are reproduced exactly."""
        box = Box.from_pairs([[0.0, 0.0], [0.0, 1.0]])
        points = sample_box(box, SampleStream(1), 100)

        assert np.all(points[:, 0] == 0.0)

    def test_count_must_be_positive(self, unit_box):
        """Zero samples is an error."""
        with pytest.raises(SamplingError):
            sample_box(unit_box, SampleStream(0), 0)

    @pytest.mark.parametrize("norm", list(NormType))
    def test_ball_samples_inside(self, norm):
        """Unit p-ball samples satisfy ||z||_p <= 1."""
        points = sample_ball(3, norm, SampleStream(2), 2000)

        norms = np.linalg.norm(points, ord=norm.order, axis=1)
        assert np.all(norms <= 1.0 + 1e-12)

    def test_disc_is_uniform(self):
        """Half the unit disc's mass lies within radius 1/sqrt(2)."""
        points = sample_ball(2, NormType.TWO, SampleStream(4), 20000)
        inner = np.linalg.norm(points, axis=1) <= np.sqrt(0.5)

        assert inner.mean() == pytest.approx(0.5, abs=0.02)

    def test_nas_samples_inside(self, scaled_ellipse):
        """Affine image of the ball lands in the ellipse."""
        points = sample_nas(scaled_ellipse, SampleStream(6), 4000)

        assert np.all(scaled_ellipse.contains(points, tol=1e-9))
        np.testing.assert_allclose(points.mean(axis=0), [1.0, -1.0], atol=0.05)

    def test_pas_samples_in_superlevel_set(self):
        """q(x) = 1.75 - x^2 keeps |x| <= sqrt(0.75)."""
        U = PasSet(
            Box(np.array([-1.0]), np.array([1.0])), 2, np.array([1.75, 0.0, -1.0])
        )
        points = sample_set(U, SampleStream(8), 500)

        assert np.all(np.abs(points) <= np.sqrt(0.75) + 1e-12)
        assert np.all(U.contains(points))

    def test_pas_acceptance_budget(self):
        """A measure-zero superlevel set exhausts the draw budget."""
        U = PasSet(
            Box(np.array([-1.0]), np.array([1.0])), 2, np.array([1.0, 0.0, -1.0])
        )
        with pytest.raises(AcceptanceRateError):
            sample_pas(U, SampleStream(8), 10, max_attempts=1000)

    def test_rejection_counts_draws(self):
        """The draw count covers every proposal up to the last acceptance."""
        points, draws = rejection_sample(
            lambda gen, m: gen.random((m, 1)),
            lambda x: x[:, 0] < 0.5,
            SampleStream(10),
            100,
        )

        assert points.shape == (100, 1)
        assert np.all(points < 0.5)
        assert draws >= 100

    def test_rejection_budget_binds_within_chunk(self):
        """A 1% acceptance rate cannot fill 50 points from 100 draws."""
        with pytest.raises(AcceptanceRateError):
            rejection_sample(
                lambda gen, m: gen.random((m, 1)),
                lambda x: x[:, 0] < 0.01,
                SampleStream(10),
                50,
                max_draws=100,
            )

    def test_rejection_draws_within_budget(self):
        """A successful run never reports more draws than its budget."""
        points, draws = rejection_sample(
            lambda gen, m: gen.random((m, 1)),
            lambda x: x[:, 0] < 0.5,
            SampleStream(10),
            10,
            max_draws=1000,
        )

        assert points.shape == (10, 1)
        assert draws <= 1000

    def test_sample_set_dispatch(self, unit_disc):
        """NasSet goes to the affine sampler."""
        points = sample_set(unit_disc, SampleStream(1), 10)

        assert isinstance(unit_disc, NasSet)
        assert np.all(unit_disc.contains(points))

    def test_sample_set_box(self):
        """A Box goes to the box sampler."""
        box = Box(np.array([0.0, 2.0]), np.array([1.0, 3.0]))
        points = sample_set(box, SampleStream(2), 50)

        np.testing.assert_array_equal(points, sample_box(box, SampleStream(2), 50))

    def test_custom_sampler_replaces_uniform(self, unit_disc):
        """A user-supplied sampler sees the set and the stream."""
        calls = []

        def corner_sampler(region, stream, count):
            calls.append((region, stream, count))
            return np.full((count, region.dimension), 0.5)

        stream = SampleStream(3)
        points = sample_set(unit_disc, stream, 7, sampler=corner_sampler)

        np.testing.assert_array_equal(points, np.full((7, 2), 0.5))
        assert len(calls) == 1
        assert calls[0][0] is unit_disc
        assert calls[0][1] is stream
        assert calls[0][2] == 7

    def test_custom_sampler_output_checked(self, unit_disc):
        """Wrong shapes and non-finite points are rejected."""
        with pytest.raises(SamplingError, match="expected"):
            sample_set(
                unit_disc, SampleStream(3), 5, sampler=lambda A, s, m: np.zeros((m, 3))
            )
        with pytest.raises(SamplingError):
            sample_set(
                unit_disc,
                SampleStream(3),
                2,
                sampler=lambda A, s, m: np.array([[0.0, np.nan], [0.0, 0.0]]),
            )
