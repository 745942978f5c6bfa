"""
Axis-aligned boxes.

Boxes describe the state domain, the noise domains and the bounding set of a
polynomial superlevel set. Zero-width coordinates are allowed so that a
point-mass noise box can be expressed; fitting a PAS requires positive volume.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..constants import Tolerances
from ..exceptions import DimensionMismatchError, InvalidSetError


def as_points(x: Any, n: int) -> tuple[np.ndarray, bool]:
    """
    Coerce a point or an array of points to shape (N, n).

    Args:
        x: A single vector of length n or an (N, n) array
        n: Expected dimension

    Returns:
        Tuple of the (N, n) float array and whether the input was a single point

    Raises:
        DimensionMismatchError: If the trailing dimension differs from n
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n:
        raise DimensionMismatchError(
            f"Expected points of dimension {n}, got array of shape {np.shape(x)}"
        )
    return arr, single


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box [lower, upper] with componentwise lower <= upper."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = _readonly(np.atleast_1d(self.lower))
        upper = _readonly(np.atleast_1d(self.upper))
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise DimensionMismatchError(
                f"Box bounds must be vectors of equal length, got {lower.shape} "
                f"and {upper.shape}"
            )
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise InvalidSetError("Box bounds must be finite")
        if np.any(lower > upper):
            raise InvalidSetError(f"Empty box: lower {lower} exceeds upper {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_pairs(cls, pairs: Any) -> "Box":
        """Build a box from [[l1, u1], [l2, u2], ...]."""
        arr = np.asarray(pairs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidSetError(f"Expected a list of [lower, upper] pairs: {pairs}")
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def parse(cls, text: str) -> "Box":
        """
        Parse the CLI box syntax "l1,u1;l2,u2".

        Raises:
            InvalidSetError: If the text is malformed
        """
        try:
            pairs = [
                [float(v) for v in part.split(",")]
                for part in text.split(";")
                if part.strip()
            ]
        except ValueError as e:
            raise InvalidSetError(f"Malformed box specification '{text}': {e}") from e
        if not pairs or any(len(p) != 2 for p in pairs):
            raise InvalidSetError(f"Malformed box specification '{text}'")
        return cls.from_pairs(pairs)

    @classmethod
    def bounding(cls, points: np.ndarray) -> "Box":
        """Smallest box containing every row of points."""
        pts = np.asarray(points, dtype=float)
        return cls(pts.min(axis=0), pts.max(axis=0))

    @property
    def dimension(self) -> int:
        return int(self.lower.shape[0])

    @property
    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def is_degenerate(self) -> bool:
        """True when some coordinate has zero width."""
        return bool(np.any(self.widths <= 0.0))

    def inflate(self, factor: float) -> "Box":
        """Scale the box about its center by factor."""
        half = self.widths * factor / 2.0
        return Box(self.center - half, self.center + half)

    def contains(self, points: Any, tol: float = Tolerances.MEMBERSHIP) -> Any:
        """Componentwise interval test; returns a bool or a bool array."""
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        pts, single = as_points(points, self.dimension)
        inside = np.all(
            (pts >= self.lower - tol) & (pts <= self.upper + tol), axis=1
        )
        return bool(inside[0]) if single else inside

    def to_dict(self) -> dict[str, list[float]]:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}

    @classmethod
    def from_dict(cls, data: Any) -> "Box":
        """Accept {"lower": [...], "upper": [...]} or a list of pairs."""
        if isinstance(data, dict):
            return cls(np.asarray(data["lower"]), np.asarray(data["upper"]))
        return cls.from_pairs(data)

    def __repr__(self) -> str:
        pairs = ", ".join(
            f"[{lo:g}, {hi:g}]" for lo, hi in zip(self.lower, self.upper, strict=True)
        )
        return f"Box({pairs})"


def box_membership(box: Box, x: Any, tol: float = Tolerances.MEMBERSHIP) -> bool:
    """True iff every component of x lies in its interval, up to tol."""
    return bool(box.contains(np.asarray(x, dtype=float).reshape(-1), tol))
