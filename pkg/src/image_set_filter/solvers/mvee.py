"""
Minimum-volume enclosing ellipsoid of a point cloud.

Khachiyan's first-order method with Todd-Yildirim away steps. The returned
ellipsoid is {x : ||P (x - c)||_2 <= 1} with P symmetric positive definite,
rescaled so that every input point satisfies the inequality.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..constants import SolverDefaults
from ..exceptions import DegenerateDataError, InvalidDataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MveeResult:
    """
    Enclosing ellipsoid and solver diagnostics.

    Attributes:
        shape: Symmetric positive-definite P
        center: Center c
        iterations: Coordinate steps taken
        optimality: Final max(eps+, eps-) optimality measure
        weights: Final weights on the input points
    """

    shape: np.ndarray
    center: np.ndarray
    iterations: int
    optimality: float
    weights: np.ndarray


def _lifted_scores(Q: np.ndarray, u: np.ndarray) -> np.ndarray:
    """M_j = q_j^T (Q diag(u) Q^T)^-1 q_j for lifted points q_j = (x_j, 1)."""
    V = (Q * u) @ Q.T
    try:
        factor = cho_factor(V)
    except LinAlgError as e:
        raise DegenerateDataError(
            "Points do not span the space; the enclosing ellipsoid is flat"
        ) from e
    return np.einsum("ij,ij->j", Q, cho_solve(factor, Q))


def minimum_volume_ellipsoid(
    points: np.ndarray,
    tol: float = SolverDefaults.MVEE_TOL,
    max_iterations: int = SolverDefaults.MVEE_MAX_ITERATIONS,
) -> MveeResult:
    """
    Fit the minimum-volume ellipsoid containing every point.

    Args:
        points: (N, n) array whose affine hull is R^n
        tol: Target optimality measure
        max_iterations: Coordinate step budget; the best iterate so far is
            returned, rescaled to contain the points, when it runs out

    Returns:
        MveeResult

    Raises:
        InvalidDataError: If fewer than n + 1 points are given
        DegenerateDataError: If the points lie in a proper affine subspace
    """
    X = np.asarray(points, dtype=float)
    N, n = X.shape
    if N < n + 1:
        raise InvalidDataError(f"Need at least {n + 1} points in R^{n}, got {N}")
    Q = np.vstack([X.T, np.ones(N)])
    d = n + 1
    u = np.full(N, 1.0 / N)
    optimality = float("inf")
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        scores = _lifted_scores(Q, u)
        j_up = int(np.argmax(scores))
        support = np.flatnonzero(u > 0.0)
        j_down = int(support[np.argmin(scores[support])])
        eps_up = scores[j_up] / d - 1.0
        eps_down = 1.0 - scores[j_down] / d
        optimality = float(max(eps_up, eps_down))
        if optimality <= tol:
            break
        if eps_up >= eps_down:
            j, score = j_up, scores[j_up]
            tau = (score - d) / (d * (score - 1.0))
        else:
            j, score = j_down, scores[j_down]
            floor = -u[j] / (1.0 - u[j])
            # score -> 1 only at the weighted mean, where the full drop applies
            if score - 1.0 <= np.finfo(float).eps:
                tau = floor
            else:
                tau = max((score - d) / (d * (score - 1.0)), floor)
        u = (1.0 - tau) * u
        u[j] += tau
        u[u < 0.0] = 0.0
    else:
        logger.warning(
            f"MVEE stopped at the iteration cap with optimality {optimality:.2e}"
        )

    center = X.T @ u
    scatter = (X.T * u) @ X - np.outer(center, center)
    try:
        A = np.linalg.inv(scatter) / n
    except np.linalg.LinAlgError as e:
        raise DegenerateDataError("Weighted scatter matrix is singular") from e
    A = (A + A.T) / 2.0
    offsets = X - center
    reach = float(np.max(np.einsum("ij,jk,ik->i", offsets, A, offsets)))
    if reach > 0.0:
        A = A / reach
    eigenvalues, eigenvectors = np.linalg.eigh(A)
    if eigenvalues[0] <= 0.0:
        raise DegenerateDataError("Enclosing ellipsoid matrix is not positive definite")
    shape = (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.T
    logger.debug(f"MVEE converged in {iterations} steps (measure {optimality:.2e})")
    return MveeResult(
        shape=(shape + shape.T) / 2.0,
        center=center,
        iterations=iterations,
        optimality=optimality,
        weights=u,
    )
