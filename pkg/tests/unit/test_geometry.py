"""Unit tests for boxes, norm-based sets and polynomial superlevel sets."""

import numpy as np
import pytest

from image_set_filter.exceptions import (
    DimensionMismatchError,
    InvalidSetError,
)
from image_set_filter.geometry import (
    Box,
    MonomialBasis,
    NasSet,
    NormType,
    PasSet,
    PutinarCertificate,
    basis_size,
    box_membership,
    box_moments,
    nas_membership,
    nas_volume,
    pas_membership,
    set_from_dict,
    set_to_dict,
)
from image_set_filter.models import box_as_set


@pytest.fixture
def parabola_set() -> PasSet:
    """q(x) = 1 - x^2 on [-1, 1] with its Putinar certificate."""
    box = Box(np.array([-1.0]), np.array([1.0]))
    certificate = PutinarCertificate(
        r0=np.zeros((1, 1)),
        faces=(
            0.5 * np.array([[1.0, 1.0], [1.0, 1.0]]),
            0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]]),
        ),
    )
    return PasSet(box, 2, np.array([1.0, 0.0, -1.0]), certificate)


class TestBox:
    """Test box construction and membership."""

    def test_membership_examples(self):
        """Interior, boundary and exterior points of [0, 1]^2."""
        box = Box.from_pairs([[0, 1], [0, 1]])

        assert box_membership(box, [0.5, 0.5])
        assert box_membership(box, [1.0, 0.0])
        assert not box_membership(box, [1.0 + 1e-6, 0.5])

    def test_zero_width_box_is_allowed(self):
        """A point-mass box is representable and flagged degenerate."""
        box = Box.from_pairs([[0, 0], [0, 0]])

        assert box.is_degenerate
        assert box.volume == 0.0
        assert box_membership(box, [0.0, 0.0])

    def test_inverted_bounds_rejected(self):
        """lower > upper is an empty box."""
        with pytest.raises(InvalidSetError):
            Box.from_pairs([[1, 0]])

    def test_parse_cli_syntax(self):
        """The "l1,u1;l2,u2" syntax."""
        box = Box.parse("-1,2;0.5,3")

        np.testing.assert_allclose(box.lower, [-1.0, 0.5])
        np.testing.assert_allclose(box.upper, [2.0, 3.0])

    def test_parse_malformed(self):
        """Missing bounds are reported."""
        with pytest.raises(InvalidSetError):
            Box.parse("0,1;2")

    def test_inflate_about_center(self):
        """Inflation keeps the center and scales the widths."""
        box = Box.from_pairs([[0, 2], [-1, 1]]).inflate(1.5)

        np.testing.assert_allclose(box.center, [1.0, 0.0])
        np.testing.assert_allclose(box.widths, [3.0, 3.0])

    def test_bounding_box(self, gaussian_cloud):
        """The bounding box is tight on every axis."""
        box = Box.bounding(gaussian_cloud)

        assert np.all(box.contains(gaussian_cloud, tol=0.0))
        np.testing.assert_allclose(box.lower, gaussian_cloud.min(axis=0))

    def test_vectorized_contains(self, unit_box):
        """Arrays of points give boolean arrays."""
        inside = unit_box.contains(np.array([[0.2, 0.2], [2.0, 0.0]]))

        assert inside.tolist() == [True, False]

    def test_dimension_mismatch(self, unit_box):
        """Points must have the box dimension."""
        with pytest.raises(DimensionMismatchError):
            unit_box.contains([0.1, 0.2, 0.3])


class TestNasSet:
    """Test norm-based sets."""

    def test_unit_disc_volume(self, unit_disc):
        """vol = pi for the unit disc."""
        assert nas_volume(unit_disc) == pytest.approx(np.pi)
        assert unit_disc.log_volume == pytest.approx(np.log(np.pi))

    def test_unit_ball_volumes_per_norm(self):
        """Unit 1-, 2- and inf-balls in the plane."""
        volumes = {
            norm: NasSet(np.zeros(2), np.eye(2), norm).volume for norm in NormType
        }

        assert volumes[NormType.ONE] == pytest.approx(2.0)
        assert volumes[NormType.TWO] == pytest.approx(np.pi)
        assert volumes[NormType.INF] == pytest.approx(4.0)

    def test_boundary_is_member(self, unit_disc):
        """The set is closed."""
        assert nas_membership(unit_disc, [1.0, 0.0])
        assert nas_membership(unit_disc, [np.sqrt(0.5), np.sqrt(0.5)])
        assert not nas_membership(unit_disc, [1.0, 1e-3])

    def test_scaled_ellipse_spans(self, scaled_ellipse):
        """Semi-axes 2 and 1/2 around (1, -1)."""
        lower, upper = scaled_ellipse.spans()

        np.testing.assert_allclose(lower, [-1.0, -1.5])
        np.testing.assert_allclose(upper, [3.0, -0.5])
        assert scaled_ellipse.volume == pytest.approx(np.pi)

    def test_support_function(self, scaled_ellipse):
        """Support along the axes matches the spans."""
        assert scaled_ellipse.support(np.array([1.0, 0.0])) == pytest.approx(3.0)
        assert scaled_ellipse.support(np.array([0.0, -1.0])) == pytest.approx(1.5)

    def test_l1_spans(self):
        """The l1 ball reaches 1 along every axis."""
        diamond = NasSet(np.zeros(2), np.eye(2), NormType.ONE)
        lower, upper = diamond.spans()

        np.testing.assert_allclose(upper, [1.0, 1.0])
        np.testing.assert_allclose(lower, [-1.0, -1.0])

    def test_shape_must_be_positive_definite(self):
        """Indefinite and asymmetric P are rejected."""
        with pytest.raises(InvalidSetError):
            NasSet(np.zeros(2), np.diag([1.0, -1.0]))
        with pytest.raises(InvalidSetError):
            NasSet(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_box_as_inf_norm_set(self, unit_box):
        """A box becomes the inf-norm ball with P = diag(2 / widths)."""
        as_set = box_as_set(unit_box)

        assert as_set.norm is NormType.INF
        assert as_set.volume == pytest.approx(1.0)
        assert as_set.contains([1.0, 1.0])

    def test_log_volume_does_not_underflow(self):
        """Tiny sets keep a finite log-volume."""
        tiny = NasSet(np.zeros(2), np.eye(2) * 1e200)

        assert np.isfinite(tiny.log_volume)
        assert tiny.log_volume == pytest.approx(np.log(np.pi) - 2 * np.log(1e200))

    def test_serialization(self, scaled_ellipse):
        """JSON dictionaries rebuild the same set."""
        data = set_to_dict(scaled_ellipse)
        rebuilt = set_from_dict(data)

        assert data["type"] == "nas"
        assert data["p"] == 2
        np.testing.assert_array_equal(rebuilt.shape, scaled_ellipse.shape)


class TestPasSet:
    """Test polynomial superlevel sets."""

    def test_membership(self, parabola_set):
        """Only the peak of 1 - x^2 reaches level 1."""
        assert pas_membership(parabola_set, [0.0])
        assert not pas_membership(parabola_set, [0.5])
        assert not pas_membership(parabola_set, [2.0])

    def test_certificate_reproduces_coefficients(self, parabola_set):
        """r0 + sum r_i b_i expands to q."""
        np.testing.assert_allclose(parabola_set.reconstruct(), [1.0, 0.0, -1.0])
        margins = parabola_set.certificate.min_eigenvalue_margins()
        assert min(margins) >= -1e-12
        assert parabola_set.multiplier_degrees == (0, 2)

    def test_wrong_certificate_rejected(self):
        """A certificate for another polynomial is refused."""
        box = Box(np.array([-1.0]), np.array([1.0]))
        with pytest.raises(InvalidSetError):
            PasSet(
                box,
                2,
                np.array([1.0, 0.0, -1.0]),
                PutinarCertificate(r0=np.eye(2)),
            )

    def test_coefficient_count_checked(self):
        """The coefficient vector must match the basis."""
        box = Box(np.zeros(2), np.ones(2))
        with pytest.raises(DimensionMismatchError):
            PasSet(box, 2, np.ones(4))

    def test_degenerate_box_rejected(self):
        """S must have positive volume."""
        box = Box(np.array([0.0]), np.array([0.0]))
        with pytest.raises(InvalidSetError):
            PasSet(box, 2, np.ones(3))

    def test_serialization_keeps_gram_blocks(self, parabola_set):
        """Gram blocks survive the JSON dictionary."""
        data = set_to_dict(parabola_set)
        rebuilt = set_from_dict(data)

        assert len(data["gram_blocks"]) == 3
        assert data["monomials"] == [[0], [1], [2]]
        assert isinstance(rebuilt, PasSet)
        np.testing.assert_allclose(rebuilt.coefficients, parabola_set.coefficients)


class TestMonomialBasis:
    """Test the graded-lexicographic basis."""

    def test_basis_sizes(self):
        """C(n + sigma, n) monomials."""
        assert basis_size(2, 4) == 15
        assert basis_size(3, 2) == 10
        assert len(MonomialBasis(2, 2)) == 6

    def test_graded_order(self):
        """Constant first, then degree one, then degree two."""
        labels = MonomialBasis(2, 2).labels()

        assert labels == ["1", "x1", "x2", "x1^2", "x1*x2", "x2^2"]

    def test_box_moments(self):
        """Integrals of 1, x and x^2 over [-1, 1]."""
        box = Box(np.array([-1.0]), np.array([1.0]))

        np.testing.assert_allclose(box_moments(box, 2), [2.0, 0.0, 2.0 / 3.0])
