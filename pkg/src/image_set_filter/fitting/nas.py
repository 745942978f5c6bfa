"""
Norm-based set fitters.

- EllipsoidFitter: minimum-volume enclosing ellipsoid (p = 2)
- BoxFitter: closed-form bounding box (p = inf, diagonal P)
- ParallelotopeFitter: maxdet over symmetric P (p = inf)
- L1Fitter: maxdet over diagonal P with cross-polytope constraints (p = 1)

The maxdet fitters use the variable change c~ = P c so that every membership
constraint is affine in (P, c~). Clouds are centered on their bounding box and
scaled isotropically before solving; the result is mapped back exactly.
"""

import itertools
import logging
from typing import Any

import numpy as np

from ..constants import SolverDefaults, Tolerances
from ..exceptions import DegenerateDataError
from ..geometry import Box, NasSet, NormType
from ..scenario import SetFamily
from ..solvers import (
    MatrixStructure,
    MaxdetProblem,
    SolveReport,
    SolveStatus,
    minimum_volume_ellipsoid,
    shape_basis,
    solve_maxdet,
)
from .base import BaseSetFitter, FitOutcome, degeneracy_floor

logger = logging.getLogger(__name__)


def _principal_frame(cloud: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Mean, orthonormal principal directions and numerical rank of a cloud."""
    mean = cloud.mean(axis=0)
    _, singular, vt = np.linalg.svd(cloud - mean, full_matrices=True)
    if singular.size == 0 or singular[0] == 0.0:
        return mean, vt.T, 0
    rank = int(np.sum(singular > Tolerances.RANK_RTOL * singular[0]))
    return mean, vt.T, rank


def _with_jitter(cloud: np.ndarray) -> np.ndarray:
    """Append points that give flat directions a width of the degeneracy floor."""
    mean, frame, rank = _principal_frame(cloud)
    n = cloud.shape[1]
    if rank == n:
        return cloud
    width = degeneracy_floor(cloud)
    flat = frame[:, rank:]
    extra = np.vstack([mean + width * flat.T, mean - width * flat.T])
    logger.debug(f"Cloud has rank {rank} < {n}; adding {extra.shape[0]} jitter points")
    return np.vstack([cloud, extra])


def _normalization(cloud: np.ndarray) -> tuple[np.ndarray, float]:
    """Bounding-box center and the largest half-width (at least the floor)."""
    bounds = Box.bounding(cloud)
    scale = max(float(np.max(bounds.widths)) / 2.0, degeneracy_floor(cloud))
    return bounds.center, scale


class EllipsoidFitter(BaseSetFitter):
    """Minimum-volume ellipsoid through the Khachiyan iteration."""

    family = SetFamily.ELLIPSOID

    def __init__(self, tol: float = SolverDefaults.MVEE_TOL, **kwargs: Any):
        super().__init__(**kwargs)
        self.tol = tol

    def fit_detailed(self, points: Any) -> FitOutcome:
        """
        Fit the minimum-volume ellipsoid of a cloud.

        Flat clouds are fitted inside their affine hull and given the
        degeneracy floor as half-axis in the remaining directions.

        Raises:
            DegenerateDataError: If the Khachiyan iteration cannot factor
                the scatter matrix after regularization
        """
        cloud = self._prepare(points)
        n = cloud.shape[1]
        mean, frame, rank = _principal_frame(cloud)
        width = degeneracy_floor(cloud)
        iterations, optimality = 0, 0.0
        if rank == n:
            result = minimum_volume_ellipsoid(cloud, tol=self.tol)
            shape, center = result.shape, result.center
            iterations, optimality = result.iterations, result.optimality
        else:
            self.logger.debug(f"Ellipsoid fit on a rank-{rank} cloud in R^{n}")
            blocks = np.zeros((n, n))
            center_local = np.zeros(n)
            if rank > 0:
                local = (cloud - mean) @ frame[:, :rank]
                result = minimum_volume_ellipsoid(local, tol=self.tol)
                blocks[:rank, :rank] = result.shape
                center_local[:rank] = result.center
                iterations, optimality = result.iterations, result.optimality
            blocks[rank:, rank:] = np.eye(n - rank) / width
            shape = frame @ blocks @ frame.T
            center = mean + frame @ center_local
        fitted = NasSet(center=center, shape=(shape + shape.T) / 2.0, norm=NormType.TWO)
        outside = self._check_containment(fitted, cloud)
        converged = optimality <= self.tol
        report = SolveReport(
            status=SolveStatus.OPTIMAL if converged else SolveStatus.MAX_ITERATIONS,
            objective=float(-np.linalg.slogdet(fitted.shape)[1]),
            solution=None,
            residual=float(max(0.0, np.max(fitted.norms(cloud)) - 1.0)),
            iterations=iterations,
            solver="khachiyan-mvee",
            details={"optimality": optimality, "rank": rank},
        )
        return FitOutcome(fitted=fitted, report=report, points_outside=outside)


class BoxFitter(BaseSetFitter):
    """Axis-aligned bounding box in NasSet form."""

    family = SetFamily.BOX

    def fit_detailed(self, points: Any) -> FitOutcome:
        """Closed form c = (max + min) / 2, P_jj = 2 / (max - min)."""
        cloud = self._prepare(points)
        bounds = Box.bounding(cloud)
        widths = np.maximum(bounds.widths, degeneracy_floor(cloud))
        fitted = NasSet(
            center=bounds.center, shape=np.diag(2.0 / widths), norm=NormType.INF
        )
        report = SolveReport(
            status=SolveStatus.OPTIMAL,
            objective=float(np.sum(np.log(widths / 2.0))),
            solution=None,
            residual=0.0,
            iterations=0,
            solver="closed-form-box",
        )
        outside = self._check_containment(fitted, cloud)
        return FitOutcome(fitted=fitted, report=report, points_outside=outside)


class _MaxdetFitter(BaseSetFitter):
    """Shared maxdet plumbing for the parallelotope and l1 fitters."""

    structure: MatrixStructure
    norm: NormType

    def __init__(self, tol: float = SolverDefaults.MAXDET_GAP_TOL, **kwargs: Any):
        super().__init__(**kwargs)
        self.tol = tol

    def _constraints(
        self, cloud: np.ndarray, n: int
    ) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _initial(self, n: int) -> np.ndarray | None:
        return None

    def fit_detailed(self, points: Any) -> FitOutcome:
        """
        Solve min log det P^-1 over the membership constraints of the cloud.

        Raises:
            SolverError: If the barrier method does not reach optimality
            DegenerateDataError: If the returned P is not positive definite
        """
        cloud = self._prepare(points)
        n = cloud.shape[1]
        origin, scale = _normalization(cloud)
        scaled = (_with_jitter(cloud) - origin) / scale
        G, h = self._constraints(scaled, n)
        problem = MaxdetProblem(
            n=n,
            structure=self.structure,
            extra=n,
            constraint_matrix=G,
            constraint_rhs=h,
        )
        report = solve_maxdet(problem, initial=self._initial(n), gap_tol=self.tol)
        report.raise_for_status(f"{self.family.value} fit")
        shape_scaled = report.details["shape"]
        try:
            center_scaled = np.linalg.solve(shape_scaled, report.details["extra"])
        except np.linalg.LinAlgError as e:
            raise DegenerateDataError(
                f"{self.family.value} fit returned a singular P"
            ) from e
        fitted = NasSet(
            center=origin + scale * center_scaled,
            shape=shape_scaled / scale,
            norm=self.norm,
        )
        outside = self._check_containment(fitted, cloud)
        return FitOutcome(fitted=fitted, report=report, points_outside=outside)


class ParallelotopeFitter(_MaxdetFitter):
    """Minimum-volume parallelotope {x : ||P(x - c)||_inf <= 1}, P symmetric."""

    family = SetFamily.PARALLELOTOPE
    structure = MatrixStructure.SYMMETRIC
    norm = NormType.INF

    def _constraints(self, cloud: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
        # -1 <= (P x_i)_j - c~_j <= 1 for every point i and row j
        basis = shape_basis(n, self.structure)
        N = cloud.shape[0]
        rows = np.zeros((N, n, basis.shape[0] + n))
        rows[:, :, : basis.shape[0]] = np.einsum("kjl,il->ijk", basis, cloud)
        rows[:, :, basis.shape[0] :] = -np.eye(n)[None, :, :]
        rows = rows.reshape(N * n, -1)
        G = np.vstack([rows, -rows])
        return G, np.ones(G.shape[0])

    def _initial(self, n: int) -> np.ndarray:
        # Normalized clouds lie in [-1, 1]^n, so P = I / 2 is strictly feasible
        params = 0.5 * np.eye(n)[np.triu_indices(n)]
        return np.concatenate([params, np.zeros(n)])


class L1Fitter(_MaxdetFitter):
    """Minimum-volume diagonal cross-polytope {x : ||P(x - c)||_1 <= 1}."""

    family = SetFamily.L1
    structure = MatrixStructure.DIAGONAL
    norm = NormType.ONE

    def _constraints(self, cloud: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
        # sum_j s_j (P_jj x_ij - c~_j) <= 1 for every sign vector s
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
        N = cloud.shape[0]
        rows = np.zeros((N, signs.shape[0], 2 * n))
        rows[:, :, :n] = signs[None, :, :] * cloud[:, None, :]
        rows[:, :, n:] = -signs[None, :, :]
        G = rows.reshape(N * signs.shape[0], 2 * n)
        return G, np.ones(G.shape[0])


def fit_ellipsoid(points: Any, tol: float = SolverDefaults.MVEE_TOL) -> NasSet:
    """Minimum-volume enclosing ellipsoid of a cloud."""
    fitted = EllipsoidFitter(tol=tol).fit(points)
    assert isinstance(fitted, NasSet)
    return fitted


def fit_hyperrectangle(
    points: Any, tol: float = Tolerances.CONTAINMENT_CHECK
) -> NasSet:
    """
    Bounding box of a cloud as a NasSet with p = inf and diagonal P.

    The box is exact, so tol is only the slack of its containment check.
    """
    fitted = BoxFitter(containment_tol=tol).fit(points)
    assert isinstance(fitted, NasSet)
    return fitted


def fit_parallelotope(
    points: Any, tol: float = SolverDefaults.MAXDET_GAP_TOL
) -> NasSet:
    """Minimum-volume parallelotope with symmetric positive-definite P."""
    fitted = ParallelotopeFitter(tol=tol).fit(points)
    assert isinstance(fitted, NasSet)
    return fitted


def fit_l1_diag(points: Any, tol: float = SolverDefaults.MAXDET_GAP_TOL) -> NasSet:
    """Minimum-volume diagonal cross-polytope."""
    fitted = L1Fitter(tol=tol).fit(points)
    assert isinstance(fitted, NasSet)
    return fitted
