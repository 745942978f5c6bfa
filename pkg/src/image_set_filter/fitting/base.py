"""
Base classes and protocols for set fitters.

A fitter turns a cloud of sample points into an approximating set that
contains every point. Fitters are pure given the cloud, so one instance may be
shared across threads.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from ..constants import Tolerances
from ..exceptions import InvalidDataError
from ..geometry import ApproximatingSet
from ..scenario import SetFamily, design_dimension
from ..solvers import SolveReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitOutcome:
    """
    Fitted set together with the report of the solve that produced it.

    Attributes:
        fitted: The fitted set
        report: Solver report
        points_outside: Input points the set misses at the containment slack
    """

    fitted: ApproximatingSet
    report: SolveReport
    points_outside: int = 0

    @property
    def contains_all(self) -> bool:
        return self.points_outside == 0


class SetFitterProtocol(Protocol):
    """Protocol defining the interface for set fitters."""

    family: SetFamily

    def fit(self, points: Any) -> ApproximatingSet:
        """
        Fit a set containing every point.

        Args:
            points: (N, n) sample cloud

        Returns:
            The fitted set
        """
        ...


class BaseSetFitter(ABC):
    """
    Abstract base class for set fitters.

    Subclasses implement `fit_detailed`; `fit` returns only the set.
    """

    family: SetFamily

    def __init__(self, containment_tol: float = Tolerances.CONTAINMENT_CHECK):
        """
        Initialize the fitter.

        Args:
            containment_tol: Membership slack every input point must pass
        """
        self.containment_tol = containment_tol
        self.logger = logging.getLogger(type(self).__module__)

    @abstractmethod
    def fit_detailed(self, points: Any) -> FitOutcome:
        """
        Fit a set and return it with its solver report.

        Args:
            points: (N, n) sample cloud

        Returns:
            FitOutcome
        """
        raise NotImplementedError("Subclasses must implement fit_detailed()")

    def fit(self, points: Any) -> ApproximatingSet:
        return self.fit_detailed(points).fitted

    def design_dimension(self, n: int) -> int:
        return design_dimension(self.family, n)

    def _prepare(self, points: Any) -> np.ndarray:
        """
        Validate a cloud and warn when it is smaller than the design dimension.

        Raises:
            InvalidDataError: If the cloud is empty, not 2-D or not finite
        """
        cloud = np.asarray(points, dtype=float)
        if cloud.ndim == 1:
            cloud = cloud[:, None]
        if cloud.ndim != 2 or cloud.shape[0] == 0 or cloud.shape[1] == 0:
            raise InvalidDataError(
                f"Expected a non-empty (N, n) cloud, got {cloud.shape}"
            )
        if not np.all(np.isfinite(cloud)):
            raise InvalidDataError("Sample cloud contains non-finite values")
        N, n = cloud.shape
        d = self.design_dimension(n)
        if N < d:
            self.logger.warning(
                f"{self.family.value} fit from {N} points, fewer than the design "
                f"dimension {d}"
            )
        return cloud

    def _check_containment(self, fitted: ApproximatingSet, cloud: np.ndarray) -> int:
        """Number of cloud points outside the fitted set, logged when nonzero."""
        inside = fitted.contains(cloud, self.containment_tol)
        missing = int(np.sum(~np.asarray(inside)))
        if missing:
            self.logger.warning(
                f"{self.family.value} fit leaves {missing} of {cloud.shape[0]} "
                f"points outside at tol {self.containment_tol:g}"
            )
        return missing


def degeneracy_floor(cloud: np.ndarray) -> float:
    """Width given to directions in which the cloud has no extent."""
    return Tolerances.DEGENERACY_FLOOR * max(1.0, float(np.max(np.abs(cloud))))
