"""Linear programs through SciPy's HiGHS interface."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..constants import SolverDefaults
from ..exceptions import InvalidDataError
from .reports import SolveReport, SolveStatus

logger = logging.getLogger(__name__)

_HIGHS_STATUS = {
    0: SolveStatus.OPTIMAL,
    1: SolveStatus.MAX_ITERATIONS,
    2: SolveStatus.INFEASIBLE,
    3: SolveStatus.UNBOUNDED,
    4: SolveStatus.NUMERICAL_FAILURE,
}
_MIN_HIGHS_TOL = 1e-10


@dataclass(frozen=True)
class LinearProgram:
    """minimize c.x subject to A x <= b and, optionally, A_eq x = b_eq."""

    objective: np.ndarray
    inequality_matrix: np.ndarray | None = None
    inequality_rhs: np.ndarray | None = None
    equality_matrix: np.ndarray | None = None
    equality_rhs: np.ndarray | None = None

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        object.__setattr__(self, "objective", c)
        for mat_name, rhs_name in (
            ("inequality_matrix", "inequality_rhs"),
            ("equality_matrix", "equality_rhs"),
        ):
            mat, rhs = getattr(self, mat_name), getattr(self, rhs_name)
            if (mat is None) != (rhs is None):
                raise InvalidDataError(f"{mat_name} and {rhs_name} must come together")
            if mat is None:
                continue
            mat = np.atleast_2d(np.asarray(mat, dtype=float))
            rhs = np.asarray(rhs, dtype=float).reshape(-1)
            if mat.shape != (rhs.shape[0], c.shape[0]):
                raise InvalidDataError(
                    f"{mat_name} has shape {mat.shape}, expected "
                    f"({rhs.shape[0]}, {c.shape[0]})"
                )
            if not (np.all(np.isfinite(mat)) and np.all(np.isfinite(rhs))):
                raise InvalidDataError(f"{mat_name} has non-finite entries")
            object.__setattr__(self, mat_name, mat)
            object.__setattr__(self, rhs_name, rhs)

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint violation at x."""
        worst = 0.0
        if self.inequality_matrix is not None:
            slack = self.inequality_matrix @ x - self.inequality_rhs
            worst = max(worst, float(np.max(slack, initial=0.0)))
        if self.equality_matrix is not None:
            gap = np.abs(self.equality_matrix @ x - self.equality_rhs)
            worst = max(worst, float(np.max(gap, initial=0.0)))
        return worst


def solve_lp(problem: LinearProgram, tol: float = SolverDefaults.LP_TOL) -> SolveReport:
    """
    Solve a linear program with free variables.

    Args:
        problem: The LP
        tol: Primal and dual feasibility tolerance handed to HiGHS

    Returns:
        SolveReport; unbounded and infeasible problems get their own status
    """
    highs_tol = max(tol, _MIN_HIGHS_TOL)
    result = linprog(
        problem.objective,
        A_ub=problem.inequality_matrix,
        b_ub=problem.inequality_rhs,
        A_eq=problem.equality_matrix,
        b_eq=problem.equality_rhs,
        bounds=(None, None),
        method="highs",
        options={
            "primal_feasibility_tolerance": highs_tol,
            "dual_feasibility_tolerance": highs_tol,
        },
    )
    status = _HIGHS_STATUS.get(int(result.status), SolveStatus.NUMERICAL_FAILURE)
    solution = None if result.x is None else np.asarray(result.x, dtype=float)
    residual = float("nan") if solution is None else problem.violation(solution)
    objective = float(result.fun) if result.fun is not None else float("nan")
    logger.debug(f"LP finished: {status.value} ({result.message})")
    return SolveReport(
        status=status,
        objective=objective,
        solution=solution,
        residual=residual,
        iterations=int(getattr(result, "nit", 0) or 0),
        solver="highs-lp",
        details={"message": str(result.message)},
    )
