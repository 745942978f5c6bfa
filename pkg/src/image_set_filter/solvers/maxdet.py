"""
Determinant maximization under affine constraints.

Solves  minimize log det P^-1  subject to  G z <= h,  P(z) positive definite,
where z stacks the free entries of P (symmetric or diagonal) followed by any
extra affine variables (for example a transformed center). The barrier method
follows the central path of  t * (-log det P) - sum log(h - G z)  with damped
Newton centering.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, cholesky

from ..constants import SolverDefaults
from ..exceptions import InvalidDataError
from .lp import LinearProgram, solve_lp
from .reports import SolveReport, SolveStatus

logger = logging.getLogger(__name__)


class MatrixStructure(str, Enum):
    """Free-entry pattern of the shape matrix P."""

    SYMMETRIC = "symmetric"
    DIAGONAL = "diagonal"


def shape_basis(n: int, structure: MatrixStructure) -> np.ndarray:
    """Symmetric basis matrices E_k with P = sum_k z_k E_k."""
    if MatrixStructure(structure) is MatrixStructure.DIAGONAL:
        basis = np.zeros((n, n, n))
        for j in range(n):
            basis[j, j, j] = 1.0
        return basis
    basis = np.zeros((n * (n + 1) // 2, n, n))
    rows, cols = np.triu_indices(n)
    for k, (i, j) in enumerate(zip(rows, cols, strict=True)):
        basis[k, i, j] = 1.0
        basis[k, j, i] = 1.0
    return basis


@dataclass(frozen=True)
class MaxdetProblem:
    """
    Affinely constrained determinant maximization.

    Attributes:
        n: Size of P
        structure: Symmetric (upper-triangle parameters) or diagonal P
        extra: Number of additional affine variables after the P parameters
        constraint_matrix: G, one row per affine inequality G z <= h
        constraint_rhs: h
    """

    n: int
    structure: MatrixStructure
    extra: int
    constraint_matrix: np.ndarray
    constraint_rhs: np.ndarray

    def __post_init__(self) -> None:
        G = np.atleast_2d(np.asarray(self.constraint_matrix, dtype=float))
        h = np.asarray(self.constraint_rhs, dtype=float).reshape(-1)
        object.__setattr__(self, "structure", MatrixStructure(self.structure))
        if G.shape != (h.shape[0], self.num_variables):
            raise InvalidDataError(
                f"Constraint matrix shape {G.shape} does not match "
                f"({h.shape[0]}, {self.num_variables})"
            )
        object.__setattr__(self, "constraint_matrix", G)
        object.__setattr__(self, "constraint_rhs", h)

    @property
    def num_shape_parameters(self) -> int:
        if self.structure is MatrixStructure.DIAGONAL:
            return self.n
        return self.n * (self.n + 1) // 2

    @property
    def num_variables(self) -> int:
        return self.num_shape_parameters + self.extra

    def shape_basis(self) -> np.ndarray:
        return shape_basis(self.n, self.structure)

    def shape_of(self, z: np.ndarray) -> np.ndarray:
        params = z[: self.num_shape_parameters]
        return np.einsum("k,kab->ab", params, self.shape_basis())

    def pack(self, shape: np.ndarray, extra: np.ndarray) -> np.ndarray:
        """Inverse of (shape_of, extra part)."""
        if self.structure is MatrixStructure.DIAGONAL:
            params = np.diag(shape).copy()
        else:
            params = shape[np.triu_indices(self.n)]
        return np.concatenate([params, np.asarray(extra, dtype=float).reshape(-1)])


class _Barrier:
    """Value, gradient and Hessian of the centering objective."""

    def __init__(self, problem: MaxdetProblem):
        self.problem = problem
        self.basis = problem.shape_basis()
        self.G = problem.constraint_matrix
        self.h = problem.constraint_rhs
        self.k = problem.num_shape_parameters

    def feasible(self, z: np.ndarray) -> bool:
        if np.any(self.h - self.G @ z <= 0.0):
            return False
        try:
            cholesky(self.problem.shape_of(z), lower=True)
        except LinAlgError:
            return False
        return True

    def value(self, z: np.ndarray, t: float) -> float:
        slack = self.h - self.G @ z
        _, logdet = np.linalg.slogdet(self.problem.shape_of(z))
        return float(-t * logdet - np.sum(np.log(slack)))

    def derivatives(self, z: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        slack = self.h - self.G @ z
        P = self.problem.shape_of(z)
        weighted = np.linalg.solve(P, self.basis)  # P^-1 E_k
        grad = self.G.T @ (1.0 / slack)
        grad[: self.k] -= t * np.trace(weighted, axis1=1, axis2=2)
        hess = (self.G.T / slack**2) @ self.G
        hess[: self.k, : self.k] += t * np.einsum("kab,lba->kl", weighted, weighted)
        return grad, hess


def _phase_one(problem: MaxdetProblem) -> np.ndarray | None:
    """
    Strictly feasible start from an LP.

    Maximizes a common margin s over G z + s <= h with a diagonal P whose
    diagonal entries are at least s; off-diagonal entries are pinned to zero.
    """
    nv = problem.num_variables
    G, h = problem.constraint_matrix, problem.constraint_rhs
    rows = [np.hstack([G, np.ones((G.shape[0], 1))])]
    rhs = [h]
    basis = problem.shape_basis()
    diagonal_params = [
        k for k in range(problem.num_shape_parameters) if np.trace(basis[k]) > 0
    ]
    for k in diagonal_params:
        row = np.zeros(nv + 1)
        row[k] = -1.0
        row[nv] = 1.0
        rows.append(row[None, :])
        rhs.append(np.zeros(1))
    cap = np.zeros((1, nv + 1))
    cap[0, nv] = 1.0
    rows.append(cap)
    rhs.append(np.ones(1))
    off_diagonal = [
        k for k in range(problem.num_shape_parameters) if np.trace(basis[k]) == 0
    ]
    eq_matrix = None
    eq_rhs = None
    if off_diagonal:
        eq_matrix = np.zeros((len(off_diagonal), nv + 1))
        for row, k in enumerate(off_diagonal):
            eq_matrix[row, k] = 1.0
        eq_rhs = np.zeros(len(off_diagonal))
    objective = np.zeros(nv + 1)
    objective[nv] = -1.0
    report = solve_lp(
        LinearProgram(
            objective=objective,
            inequality_matrix=np.vstack(rows),
            inequality_rhs=np.concatenate(rhs),
            equality_matrix=eq_matrix,
            equality_rhs=eq_rhs,
        )
    )
    if not report.is_optimal or report.solution is None or report.solution[nv] <= 0.0:
        return None
    return report.solution[:nv]


def solve_maxdet(
    problem: MaxdetProblem,
    initial: np.ndarray | None = None,
    gap_tol: float = SolverDefaults.MAXDET_GAP_TOL,
    gradient_tol: float = SolverDefaults.MAXDET_GRADIENT_TOL,
) -> SolveReport:
    """
    Barrier-method solve of a MaxdetProblem.

    Args:
        problem: Problem data
        initial: Starting point; an LP finds one when it is omitted or not
            strictly feasible
        gap_tol: Stop when (number of constraints) / t falls below this
        gradient_tol: Newton centering stops when the gradient norm of the
            centering objective, divided by t, falls below this

    Returns:
        SolveReport whose solution is z; details carry "shape" (P) and "extra"
    """
    barrier = _Barrier(problem)
    z = None if initial is None else np.asarray(initial, dtype=float)
    if z is None or not barrier.feasible(z):
        z = _phase_one(problem)
    if z is None or not barrier.feasible(z):
        logger.debug("maxdet: no strictly feasible starting point")
        return SolveReport(
            status=SolveStatus.INFEASIBLE,
            objective=float("nan"),
            solution=None,
            residual=float("inf"),
            iterations=0,
            solver="barrier-maxdet",
        )

    m = max(1, problem.constraint_matrix.shape[0])
    t = 1.0
    iterations = 0
    gradient_norm = float("inf")
    status = SolveStatus.OPTIMAL
    alpha = SolverDefaults.MAXDET_LINE_SEARCH_ALPHA
    beta = SolverDefaults.MAXDET_LINE_SEARCH_BETA
    while True:
        for _ in range(SolverDefaults.MAXDET_MAX_NEWTON):
            grad, hess = barrier.derivatives(z, t)
            gradient_norm = float(np.linalg.norm(grad)) / t
            try:
                step = -cho_solve(cho_factor(hess), grad)
            except LinAlgError:
                step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            decrement = float(-grad @ step)
            iterations += 1
            if decrement / 2.0 <= 1e-12 or gradient_norm <= gradient_tol:
                break
            size = 1.0
            while not barrier.feasible(z + size * step) and size > 1e-16:
                size *= beta
            current = barrier.value(z, t)
            while (
                barrier.value(z + size * step, t) > current - alpha * size * decrement
                and size > 1e-16
            ):
                size *= beta
            if size <= 1e-16:
                break
            z = z + size * step
        else:
            status = SolveStatus.MAX_ITERATIONS
        if m / t <= gap_tol or status is not SolveStatus.OPTIMAL:
            break
        t *= SolverDefaults.MAXDET_BARRIER_GROWTH

    shape = problem.shape_of(z)
    shape = (shape + shape.T) / 2.0
    _, logdet = np.linalg.slogdet(shape)
    slack = problem.constraint_rhs - problem.constraint_matrix @ z
    logger.debug(f"maxdet finished after {iterations} Newton steps, gap {m / t:.2e}")
    return SolveReport(
        status=status,
        objective=float(-logdet),
        solution=z,
        residual=float(max(0.0, -np.min(slack, initial=0.0))),
        iterations=iterations,
        solver="barrier-maxdet",
        details={
            "shape": shape,
            "extra": z[problem.num_shape_parameters :],
            "gradient_norm": gradient_norm,
            "duality_gap": m / t,
        },
    )
