"""
Approximating set families.

NasSet is the norm-based family {x : ||P(x - c)||_p <= 1} and PasSet the
polynomial superlevel family {x in S : q(x) >= 1}. Both are immutable and
closed: boundary points are members.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any

import numpy as np
from scipy.special import gammaln

from ..constants import Tolerances
from ..exceptions import DimensionMismatchError, InvalidSetError
from .box import Box, as_points
from .polynomials import (
    MonomialBasis,
    basis_size,
    half_degree_for_size,
    putinar_polynomial,
)


class NormType(Enum):
    """Norm index p of a NasSet."""

    ONE = "1"
    TWO = "2"
    INF = "inf"

    @property
    def order(self) -> float:
        """Value usable as numpy's ord argument."""
        return {"1": 1.0, "2": 2.0, "inf": np.inf}[self.value]

    @property
    def dual(self) -> "NormType":
        return {
            NormType.ONE: NormType.INF,
            NormType.TWO: NormType.TWO,
            NormType.INF: NormType.ONE,
        }[self]

    @classmethod
    def parse(cls, value: Any) -> "NormType":
        """Accept 1, 2, "inf", inf or an existing NormType."""
        if isinstance(value, NormType):
            return value
        text = str(value).strip().lower()
        aliases = {
            "1": "1",
            "1.0": "1",
            "2": "2",
            "2.0": "2",
            "inf": "inf",
            "∞": "inf",
        }
        if text not in aliases:
            raise InvalidSetError(f"Unsupported norm index: {value!r}")
        return cls(aliases[text])

    def to_json(self) -> int | str:
        return "inf" if self is NormType.INF else int(self.value)


def log_unit_ball_volume(n: int, norm: NormType) -> float:
    """Logarithm of the volume of the unit p-ball in n dimensions."""
    if norm is NormType.TWO:
        return float(0.5 * n * np.log(np.pi) - gammaln(0.5 * n + 1.0))
    if norm is NormType.INF:
        return float(n * np.log(2.0))
    return float(n * np.log(2.0) - gammaln(n + 1.0))


def _frozen(arr: Any) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class NasSet:
    """
    Norm-based approximating set {x : ||P(x - c)||_p <= 1}.

    The set equals {c + P^-1 z : ||z||_p <= 1}. P must be symmetric positive
    definite.
    """

    center: np.ndarray
    shape: np.ndarray
    norm: NormType = NormType.TWO

    def __post_init__(self) -> None:
        center = _frozen(np.atleast_1d(self.center))
        shape = _frozen(np.atleast_2d(self.shape))
        n = center.shape[0]
        if center.ndim != 1 or shape.shape != (n, n):
            raise DimensionMismatchError(
                f"Shape matrix {shape.shape} does not match center of length {n}"
            )
        if not (np.all(np.isfinite(center)) and np.all(np.isfinite(shape))):
            raise InvalidSetError("NasSet center and shape must be finite")
        scale = max(float(np.max(np.abs(shape))), np.finfo(float).tiny)
        if np.max(np.abs(shape - shape.T)) > Tolerances.SYMMETRY_RTOL * scale:
            raise InvalidSetError("Shape matrix P must be symmetric")
        if np.min(np.linalg.eigvalsh(shape)) <= 0.0:
            raise InvalidSetError("Shape matrix P must be positive definite")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "norm", NormType.parse(self.norm))

    @property
    def dimension(self) -> int:
        return int(self.center.shape[0])

    @cached_property
    def inverse_shape(self) -> np.ndarray:
        return _frozen(np.linalg.inv(self.shape))

    def norms(self, points: Any) -> np.ndarray:
        """||P(x - c)||_p for each row of points."""
        pts, _ = as_points(points, self.dimension)
        z = (pts - self.center) @ self.shape.T
        return np.linalg.norm(z, ord=self.norm.order, axis=1)

    def contains(self, points: Any, tol: float = Tolerances.MEMBERSHIP) -> Any:
        """Closed membership test; returns a bool or a bool array."""
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        _, single = as_points(points, self.dimension)
        inside = self.norms(points) <= 1.0 + tol
        return bool(inside[0]) if single else inside

    @property
    def log_volume(self) -> float:
        _, logdet = np.linalg.slogdet(self.shape)
        return log_unit_ball_volume(self.dimension, self.norm) - float(logdet)

    @property
    def volume(self) -> float:
        return float(np.exp(self.log_volume))

    def support(self, direction: Any) -> float:
        """Support function max over the set of direction . x."""
        d = np.asarray(direction, dtype=float)
        if d.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"Direction of shape {d.shape} for a set of dimension {self.dimension}"
            )
        reach = np.linalg.norm(self.inverse_shape @ d, ord=self.norm.dual.order)
        return float(d @ self.center + reach)

    def spans(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis extent (lower, upper) from exact support-function values."""
        half = np.linalg.norm(self.inverse_shape, ord=self.norm.dual.order, axis=1)
        return self.center - half, self.center + half

    def __repr__(self) -> str:
        return (
            f"NasSet(n={self.dimension}, p={self.norm.value}, "
            f"center={np.array2string(self.center, precision=4)})"
        )


@dataclass(frozen=True, eq=False)
class PutinarCertificate:
    """Gram matrices of r0 and of the face multipliers r_1..r_2n."""

    r0: np.ndarray
    faces: tuple[np.ndarray, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "r0", _frozen(np.atleast_2d(self.r0)))
        object.__setattr__(
            self, "faces", tuple(_frozen(np.atleast_2d(g)) for g in self.faces)
        )

    @property
    def blocks(self) -> tuple[np.ndarray, ...]:
        return (self.r0, *self.faces)

    def min_eigenvalue_margins(self) -> list[float]:
        """min eig(Q) / (1 + trace(Q)) for every block."""
        return [
            float(np.min(np.linalg.eigvalsh((g + g.T) / 2.0)) / (1.0 + np.trace(g)))
            for g in self.blocks
        ]


@dataclass(frozen=True, eq=False)
class PasSet:
    """
    Polynomial superlevel set {x in S : q(x) >= 1} on a box S.

    Coefficients follow the graded-lexicographic basis of degree `degree`.
    When a certificate is attached, its Gram matrices reproduce q.
    """

    box: Box
    degree: int
    coefficients: np.ndarray
    certificate: PutinarCertificate | None = None

    def __post_init__(self) -> None:
        coefficients = _frozen(np.atleast_1d(self.coefficients))
        if self.degree < 0:
            raise InvalidSetError(f"Negative PAS degree {self.degree}")
        expected = basis_size(self.box.dimension, self.degree)
        if coefficients.shape != (expected,):
            raise DimensionMismatchError(
                f"Degree-{self.degree} PAS in {self.box.dimension} variables needs "
                f"{expected} coefficients, got {coefficients.shape}"
            )
        if self.box.is_degenerate:
            raise InvalidSetError("PAS bounding box must have positive volume")
        object.__setattr__(self, "coefficients", coefficients)
        if self.certificate is not None:
            self._check_certificate(self.certificate)

    def _check_certificate(self, certificate: PutinarCertificate) -> None:
        for margin in certificate.min_eigenvalue_margins():
            if margin < -Tolerances.GRAM_EIG_RTOL:
                raise InvalidSetError(f"Gram block is not PSD (margin {margin:.3e})")
        reconstructed = self.reconstruct(certificate)
        scale = max(1.0, float(np.max(np.abs(self.coefficients))))
        error = float(np.max(np.abs(reconstructed - self.coefficients)))
        if error > Tolerances.COEFFICIENT_MATCH * scale:
            raise InvalidSetError(
                f"Certificate does not reproduce q (max deviation {error:.3e})"
            )

    def reconstruct(self, certificate: PutinarCertificate | None = None) -> np.ndarray:
        """
        Coefficients of r0 + sum r_i b_i in this set's basis.

        Terms above `degree` must vanish for a valid certificate; they are
        checked here and dropped.
        """
        cert = certificate or self.certificate
        if cert is None:
            raise InvalidSetError("PasSet has no certificate to reconstruct from")
        target, coefficients = putinar_polynomial(self.box, cert.r0, cert.faces)
        size = len(self.basis)
        out = np.zeros(size)
        keep = min(size, len(target))
        out[:keep] = coefficients[:keep]
        excess = coefficients[keep:]
        scale = max(1.0, float(np.max(np.abs(coefficients))))
        limit = Tolerances.COEFFICIENT_MATCH * scale
        if excess.size and np.max(np.abs(excess)) > limit:
            raise InvalidSetError("Certificate has nonzero terms above the PAS degree")
        return out

    @property
    def dimension(self) -> int:
        return self.box.dimension

    @cached_property
    def basis(self) -> MonomialBasis:
        return MonomialBasis(self.box.dimension, self.degree)

    @property
    def multiplier_degrees(self) -> tuple[int, int | None]:
        """SOS degrees of r0 and of the face multipliers (None without faces)."""
        if self.certificate is None:
            raise InvalidSetError("PasSet has no certificate")
        n = self.dimension
        k0 = half_degree_for_size(n, self.certificate.r0.shape[0])
        if not self.certificate.faces:
            return 2 * k0, None
        k1 = half_degree_for_size(n, self.certificate.faces[0].shape[0])
        return 2 * k0, 2 * k1

    def evaluate(self, points: Any) -> Any:
        """q at each row of points."""
        pts, single = as_points(points, self.dimension)
        values = self.basis.evaluate(pts) @ self.coefficients
        return float(values[0]) if single else values

    def contains(self, points: Any, tol: float = Tolerances.MEMBERSHIP) -> Any:
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        pts, single = as_points(points, self.dimension)
        inside = self.box.contains(pts, tol) & (
            self.basis.evaluate(pts) @ self.coefficients >= 1.0 - tol
        )
        return bool(inside[0]) if single else inside

    def __repr__(self) -> str:
        return f"PasSet(n={self.dimension}, degree={self.degree}, box={self.box!r})"


ApproximatingSet = NasSet | PasSet


def nas_membership(A: NasSet, x: Any, tol: float = Tolerances.MEMBERSHIP) -> bool:
    """True iff ||P(x - c)||_p <= 1 + tol."""
    return bool(A.contains(np.asarray(x, dtype=float).reshape(-1), tol))


def nas_volume(A: NasSet) -> float:
    """vol(unit p-ball) / det(P)."""
    return A.volume


def pas_membership(U: PasSet, x: Any, tol: float = Tolerances.MEMBERSHIP) -> bool:
    """True iff x lies in S (with tol) and q(x) >= 1 - tol."""
    return bool(U.contains(np.asarray(x, dtype=float).reshape(-1), tol))
