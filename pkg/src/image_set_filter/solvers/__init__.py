"""
Convex kernels used by the set fitters.

- lp: linear programs through HiGHS
- maxdet: barrier-method determinant maximization
- mvee: minimum-volume enclosing ellipsoids
- sdp: primal-dual interior point for block-diagonal SDPs
"""

from .lp import LinearProgram, solve_lp
from .maxdet import MatrixStructure, MaxdetProblem, shape_basis, solve_maxdet
from .mvee import MveeResult, minimum_volume_ellipsoid
from .reports import SolveReport, SolveStatus
from .sdp import LmiBlock, SdpProblem, solve_sdp

__all__ = [
    "LinearProgram",
    "LmiBlock",
    "MatrixStructure",
    "MaxdetProblem",
    "MveeResult",
    "SdpProblem",
    "SolveReport",
    "SolveStatus",
    "minimum_volume_ellipsoid",
    "shape_basis",
    "solve_lp",
    "solve_maxdet",
    "solve_sdp",
]
