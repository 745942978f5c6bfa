"""Solver outcome records shared by every convex kernel."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..exceptions import SolverError


class SolveStatus(str, Enum):
    """Terminal state of a solve."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    MAX_ITERATIONS = "max-iterations"
    NUMERICAL_FAILURE = "numerical-failure"


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float | np.floating):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


@dataclass(frozen=True)
class SolveReport:
    """
    Outcome of a convex solve.

    Attributes:
        status: Terminal status
        objective: Objective value at the returned point
        solution: Primal solution vector (None when unavailable)
        residual: Scaled feasibility residual at the returned point
        iterations: Iterations performed
        solver: Kernel name
        details: Kernel-specific diagnostics (gap, eigenvalues, ...)
    """

    status: SolveStatus
    objective: float
    solution: np.ndarray | None
    residual: float
    iterations: int
    solver: str
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def raise_for_status(self, context: str) -> None:
        """Raise SolverError unless the solve is optimal."""
        if not self.is_optimal:
            raise SolverError(
                f"{context}: {self.solver} finished with status "
                f"'{self.status.value}' after {self.iterations} iterations "
                f"(residual {self.residual:.3e})",
                report=self,
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "solver": self.solver,
            "objective": _jsonable(self.objective),
            "residual": _jsonable(self.residual),
            "iterations": self.iterations,
            "details": _jsonable(self.details),
        }
