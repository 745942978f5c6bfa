"""
Dense primal-dual interior-point solver for small block-diagonal SDPs.

Problems are stated in inequality form,

    minimize    c.x
    subject to  F0_j + sum_i x_i F_ij  PSD      for every block j
                G x <= h
                E x  = f,

which is the dual of a standard-form SDP. Equalities are removed through a
null-space parameterization x = x_p + Z t before iterating. The iteration uses
the HKM search direction with a Mehrotra predictor-corrector step and an
infeasible starting point.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import (
    LinAlgError,
    cho_factor,
    cho_solve,
    cholesky,
    null_space,
    solve_triangular,
)

from ..constants import SolverDefaults
from ..exceptions import InvalidDataError
from .reports import SolveReport, SolveStatus

logger = logging.getLogger(__name__)

_EQUALITY_RESIDUAL = 1e-9
_LOOSE_ACCEPT_FACTOR = 1e3


@dataclass(frozen=True)
class LmiBlock:
    """
    Affine matrix constraint F0 + sum_i x_i F_i PSD.

    Attributes:
        constant: Symmetric k x k matrix F0
        coefficients: (m, k, k) stack of symmetric matrices F_i
    """

    constant: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        F0 = np.atleast_2d(np.asarray(self.constant, dtype=float))
        F = np.asarray(self.coefficients, dtype=float)
        k = F0.shape[0]
        if F0.shape != (k, k) or F.ndim != 3 or F.shape[1:] != (k, k):
            raise InvalidDataError(
                f"LMI block shapes {F0.shape} and {F.shape} are inconsistent"
            )
        symmetric = np.allclose(F0, F0.T, atol=1e-12) and np.allclose(
            F, F.transpose(0, 2, 1), atol=1e-12
        )
        if not symmetric:
            raise InvalidDataError("LMI block matrices must be symmetric")
        object.__setattr__(self, "constant", (F0 + F0.T) / 2.0)
        object.__setattr__(self, "coefficients", (F + F.transpose(0, 2, 1)) / 2.0)

    @property
    def size(self) -> int:
        return self.constant.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.constant + np.einsum("i,iab->ab", x, self.coefficients)


@dataclass(frozen=True)
class SdpProblem:
    """
    Block-diagonal SDP in inequality form.

    Attributes:
        objective: Cost vector c over m scalar variables
        blocks: Matrix inequalities, one per PSD block
        inequality_matrix: Optional G for G x <= h
        inequality_rhs: Optional h
        equality_matrix: Optional E for E x = f
        equality_rhs: Optional f
    """

    objective: np.ndarray
    blocks: tuple[LmiBlock, ...] = field(default_factory=tuple)
    inequality_matrix: np.ndarray | None = None
    inequality_rhs: np.ndarray | None = None
    equality_matrix: np.ndarray | None = None
    equality_rhs: np.ndarray | None = None

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        m = c.shape[0]
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for block in self.blocks:
            if block.coefficients.shape[0] != m:
                raise InvalidDataError(
                    f"LMI block has {block.coefficients.shape[0]} coefficient "
                    f"matrices for {m} variables"
                )
        for mat_name, rhs_name in (
            ("inequality_matrix", "inequality_rhs"),
            ("equality_matrix", "equality_rhs"),
        ):
            mat, rhs = getattr(self, mat_name), getattr(self, rhs_name)
            if (mat is None) != (rhs is None):
                raise InvalidDataError(f"{mat_name} and {rhs_name} must come together")
            if mat is None:
                continue
            mat = np.asarray(mat, dtype=float).reshape(-1, m)
            rhs = np.asarray(rhs, dtype=float).reshape(-1)
            if mat.shape[0] != rhs.shape[0]:
                raise InvalidDataError(f"{mat_name} rows do not match {rhs_name}")
            object.__setattr__(self, mat_name, mat)
            object.__setattr__(self, rhs_name, rhs)

    @property
    def num_variables(self) -> int:
        return self.objective.shape[0]

    def block_eigenvalues(self, x: np.ndarray) -> list[float]:
        """Minimum eigenvalue of every block at x."""
        return [float(np.linalg.eigvalsh(b.evaluate(x))[0]) for b in self.blocks]

    def residual(self, x: np.ndarray) -> float:
        """Largest violation scaled by (1 + trace) for blocks, absolute otherwise."""
        worst = 0.0
        for block in self.blocks:
            value = block.evaluate(x)
            scale = 1.0 + abs(float(np.trace(value)))
            worst = max(worst, -float(np.linalg.eigvalsh(value)[0]) / scale)
        if self.inequality_matrix is not None:
            excess = self.inequality_matrix @ x - self.inequality_rhs
            worst = max(worst, float(np.max(excess, initial=0.0)))
        if self.equality_matrix is not None:
            gap = np.abs(self.equality_matrix @ x - self.equality_rhs)
            worst = max(worst, float(np.max(gap, initial=0.0)))
        return max(0.0, worst)


@dataclass
class _StandardForm:
    """Data of  max b.y  s.t.  C_j - A_j*(y) PSD,  c_lp - A_lp^T y >= 0."""

    b: np.ndarray
    C: list[np.ndarray]
    A: list[np.ndarray]
    c_lp: np.ndarray
    A_lp: np.ndarray
    offset: float
    particular: np.ndarray
    basis: np.ndarray

    def adjoint(self, y: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        return (
            [np.einsum("k,kab->ab", y, A) for A in self.A],
            self.A_lp.T @ y,
        )

    def forward(self, X: list[np.ndarray], x: np.ndarray) -> np.ndarray:
        total = self.A_lp @ x
        for A, Xj in zip(self.A, X, strict=True):
            total = total + np.einsum("kab,ab->k", A, Xj)
        return total


def _standard_form(problem: SdpProblem) -> _StandardForm | None:
    m = problem.num_variables
    if problem.equality_matrix is not None and problem.equality_matrix.shape[0] > 0:
        E, f = problem.equality_matrix, problem.equality_rhs
        particular = np.linalg.lstsq(E, f, rcond=None)[0]
        miss = np.linalg.norm(E @ particular - f)
        if miss > _EQUALITY_RESIDUAL * (1.0 + np.linalg.norm(f)):
            return None
        basis = null_space(E)
    else:
        particular = np.zeros(m)
        basis = np.eye(m)
    c = problem.objective
    C = [b.evaluate(particular) for b in problem.blocks]
    A = [-np.einsum("ik,iab->kab", basis, b.coefficients) for b in problem.blocks]
    if problem.inequality_matrix is not None:
        G, h = problem.inequality_matrix, problem.inequality_rhs
        c_lp = h - G @ particular
        A_lp = (G @ basis).T
    else:
        c_lp = np.zeros(0)
        A_lp = np.zeros((basis.shape[1], 0))
    return _StandardForm(
        b=-basis.T @ c,
        C=C,
        A=A,
        c_lp=c_lp,
        A_lp=A_lp,
        offset=float(c @ particular),
        particular=particular,
        basis=basis,
    )


def _max_step(V: np.ndarray, dV: np.ndarray) -> float:
    """Largest alpha with V + alpha dV PSD (V positive definite)."""
    L = cholesky(V, lower=True)
    W = solve_triangular(L, solve_triangular(L, dV, lower=True).T, lower=True)
    smallest = float(np.linalg.eigvalsh((W + W.T) / 2.0)[0])
    return math.inf if smallest >= 0.0 else -1.0 / smallest


def _max_step_lp(v: np.ndarray, dv: np.ndarray) -> float:
    shrinking = dv < 0.0
    if not np.any(shrinking):
        return math.inf
    return float(np.min(-v[shrinking] / dv[shrinking]))


_Iterate = tuple[list[np.ndarray], np.ndarray, list[np.ndarray], np.ndarray]


def _initial_point(form: _StandardForm) -> _Iterate:
    X, S = [], []
    b_scale = 1.0 + np.abs(form.b)
    for Cj, Aj in zip(form.C, form.A, strict=True):
        k = Cj.shape[0]
        norms = np.linalg.norm(Aj.reshape(Aj.shape[0], -1), axis=1)
        ratio = float(np.max(b_scale / (1.0 + norms), initial=1.0))
        xi = max(10.0, math.sqrt(k), k * ratio)
        eta = max(
            10.0,
            math.sqrt(k),
            (1.0 + max(float(np.max(norms, initial=0.0)), float(np.linalg.norm(Cj))))
            / math.sqrt(k),
        )
        X.append(xi * np.eye(k))
        S.append(eta * np.eye(k))
    n_lp = form.c_lp.shape[0]
    lp_scale = 1.0 + float(np.max(np.abs(form.c_lp), initial=0.0))
    x_lp = np.full(n_lp, max(10.0, lp_scale))
    s_lp = np.full(n_lp, max(10.0, lp_scale))
    return X, x_lp, S, s_lp


def _direction(
    form: _StandardForm,
    X: list[np.ndarray],
    x_lp: np.ndarray,
    S_inv: list[np.ndarray],
    s_lp: np.ndarray,
    Rd: list[np.ndarray],
    rd_lp: np.ndarray,
    T: list[np.ndarray],
    t_lp: np.ndarray,
    schur: tuple[np.ndarray, bool],
) -> tuple[list[np.ndarray], np.ndarray, np.ndarray, list[np.ndarray], np.ndarray]:
    rhs = form.b.copy()
    for Aj, Xj, Sj_inv, Rj, Tj in zip(form.A, X, S_inv, Rd, T, strict=True):
        rhs -= np.einsum("kab,ab->k", Aj, Tj @ Sj_inv)
        rhs += np.einsum("kab,ab->k", Aj, Xj @ Rj @ Sj_inv)
    rhs -= form.A_lp @ (t_lp / s_lp)
    rhs += form.A_lp @ (x_lp * rd_lp / s_lp)
    factor, is_cholesky = schur
    if is_cholesky:
        dy = cho_solve(factor, rhs)
    else:
        dy = np.linalg.lstsq(factor, rhs, rcond=None)[0]
    adj, adj_lp = form.adjoint(dy)
    dS = [Rj - Aj for Rj, Aj in zip(Rd, adj, strict=True)]
    ds_lp = rd_lp - adj_lp
    dX = []
    for Xj, Sj_inv, dSj, Tj in zip(X, S_inv, dS, T, strict=True):
        step = Tj @ Sj_inv - Xj - Xj @ dSj @ Sj_inv
        dX.append((step + step.T) / 2.0)
    dx_lp = t_lp / s_lp - x_lp - x_lp * ds_lp / s_lp
    return dX, dx_lp, dy, dS, ds_lp


def _schur(
    form: _StandardForm,
    X: list[np.ndarray],
    x_lp: np.ndarray,
    S_inv: list[np.ndarray],
    s_lp: np.ndarray,
) -> tuple[np.ndarray, bool]:
    m = form.b.shape[0]
    M = (form.A_lp * (x_lp / s_lp)) @ form.A_lp.T
    for Aj, Xj, Sj_inv in zip(form.A, X, S_inv, strict=True):
        W = Xj @ Aj @ Sj_inv
        M = M + Aj.reshape(m, -1) @ W.transpose(0, 2, 1).reshape(m, -1).T
    M = (M + M.T) / 2.0
    try:
        return cho_factor(M + 1e-14 * np.trace(M) / max(m, 1) * np.eye(m)), True
    except LinAlgError:
        return M, False


def solve_sdp(
    problem: SdpProblem,
    tol: float = SolverDefaults.SDP_TOL,
    max_iterations: int = SolverDefaults.SDP_MAX_ITERATIONS,
) -> SolveReport:
    """
    Solve an SdpProblem to relative tolerance tol.

    Args:
        problem: Problem data
        tol: Bound on relative primal/dual infeasibility and duality gap
        max_iterations: Interior-point iteration cap

    Returns:
        SolveReport with the primal solution x; details carry the duality gap,
        both infeasibility measures and the minimum eigenvalue of every block
    """
    form = _standard_form(problem)
    if form is None:
        return _report(problem, SolveStatus.INFEASIBLE, None, 0, {})
    m = form.b.shape[0]
    if m == 0:
        x = form.particular
        status = (
            SolveStatus.OPTIMAL
            if problem.residual(x) <= tol
            else SolveStatus.INFEASIBLE
        )
        return _report(problem, status, x, 0, {})

    X, x_lp, S, s_lp = _initial_point(form)
    y = np.zeros(m)
    nu = sum(Cj.shape[0] for Cj in form.C) + form.c_lp.shape[0]
    b_norm = 1.0 + float(np.linalg.norm(form.b))
    c_norm = 1.0 + math.sqrt(
        sum(float(np.sum(Cj**2)) for Cj in form.C) + float(np.sum(form.c_lp**2))
    )
    step_fraction = SolverDefaults.SDP_STEP_FRACTION
    divergence = SolverDefaults.SDP_DIVERGENCE
    status = SolveStatus.MAX_ITERATIONS
    measures: dict[str, float] = {}
    best: tuple[np.ndarray, dict[str, float]] | None = None
    iteration = 0

    for iteration in range(1, max_iterations + 1):
        adj, adj_lp = form.adjoint(y)
        Rd = [Cj - Sj - Aj for Cj, Sj, Aj in zip(form.C, S, adj, strict=True)]
        rd_lp = form.c_lp - s_lp - adj_lp
        rp = form.b - form.forward(X, x_lp)
        pobj = sum(float(np.sum(Cj * Xj)) for Cj, Xj in zip(form.C, X, strict=True))
        pobj += float(form.c_lp @ x_lp)
        dobj = float(form.b @ y)
        pinf = float(np.linalg.norm(rp)) / b_norm
        dinf = math.sqrt(
            sum(float(np.sum(Rj**2)) for Rj in Rd) + float(np.sum(rd_lp**2))
        ) / c_norm
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        measures = {"pinf": pinf, "dinf": dinf, "gap": gap, "pobj": pobj, "dobj": dobj}
        if dinf <= math.sqrt(tol) and pinf <= math.sqrt(tol):
            best = (y.copy(), dict(measures))
        if pinf <= tol and dinf <= tol and gap <= tol:
            status = SolveStatus.OPTIMAL
            break
        if pinf <= tol and pobj < -divergence:
            status = SolveStatus.INFEASIBLE
            break
        if dinf <= tol and dobj > divergence:
            status = SolveStatus.UNBOUNDED
            break

        try:
            mu = (
                sum(float(np.sum(Xj * Sj)) for Xj, Sj in zip(X, S, strict=True))
                + float(x_lp @ s_lp)
            ) / nu
            S_inv = [np.linalg.inv(Sj) for Sj in S]
            S_inv = [(Si + Si.T) / 2.0 for Si in S_inv]
            schur = _schur(form, X, x_lp, S_inv, s_lp)
            zeros = [np.zeros_like(Xj) for Xj in X]
            dXa, dxa, dya, dSa, dsa = _direction(
                form, X, x_lp, S_inv, s_lp, Rd, rd_lp, zeros, np.zeros_like(x_lp), schur
            )
            alpha_p, alpha_d = _step_lengths(X, x_lp, S, s_lp, dXa, dxa, dSa, dsa, 1.0)
            mu_aff = (
                sum(
                    float(np.sum((Xj + alpha_p * dXj) * (Sj + alpha_d * dSj)))
                    for Xj, dXj, Sj, dSj in zip(X, dXa, S, dSa, strict=True)
                )
                + float((x_lp + alpha_p * dxa) @ (s_lp + alpha_d * dsa))
            ) / nu
            sigma = min(1.0, (max(mu_aff, 0.0) / mu) ** 3) if mu > 0 else 0.0
            T = [
                sigma * mu * np.eye(Xj.shape[0]) - dXj @ dSj
                for Xj, dXj, dSj in zip(X, dXa, dSa, strict=True)
            ]
            t_lp = sigma * mu - dxa * dsa
            dX, dx, dy, dS, ds = _direction(
                form, X, x_lp, S_inv, s_lp, Rd, rd_lp, T, t_lp, schur
            )
            alpha_p, alpha_d = _step_lengths(
                X, x_lp, S, s_lp, dX, dx, dS, ds, step_fraction
            )
        except (LinAlgError, np.linalg.LinAlgError):
            status = SolveStatus.NUMERICAL_FAILURE
            break
        X = [Xj + alpha_p * dXj for Xj, dXj in zip(X, dX, strict=True)]
        X = [(Xj + Xj.T) / 2.0 for Xj in X]
        x_lp = x_lp + alpha_p * dx
        y = y + alpha_d * dy
        S = [Sj + alpha_d * dSj for Sj, dSj in zip(S, dS, strict=True)]
        S = [(Sj + Sj.T) / 2.0 for Sj in S]
        s_lp = s_lp + alpha_d * ds
        if max(alpha_p, alpha_d) < 1e-12:
            status = SolveStatus.NUMERICAL_FAILURE
            break

    if status in (SolveStatus.NUMERICAL_FAILURE, SolveStatus.MAX_ITERATIONS) and best:
        candidate, candidate_measures = best
        loose = _LOOSE_ACCEPT_FACTOR * tol
        candidate_x = form.particular + form.basis @ candidate
        if (
            all(candidate_measures[key] <= loose for key in ("pinf", "dinf", "gap"))
            and problem.residual(candidate_x) <= tol
        ):
            logger.debug(
                f"SDP stalled at iteration {iteration}; accepting iterate with "
                f"gap {candidate_measures['gap']:.2e}"
            )
            y, measures, status = candidate, candidate_measures, SolveStatus.OPTIMAL

    if status is SolveStatus.INFEASIBLE or status is SolveStatus.UNBOUNDED:
        x = None
    else:
        x = form.particular + form.basis @ y
    logger.debug(f"SDP finished: {status.value} after {iteration} iterations")
    return _report(problem, status, x, iteration, measures)


def _step_lengths(
    X: list[np.ndarray],
    x_lp: np.ndarray,
    S: list[np.ndarray],
    s_lp: np.ndarray,
    dX: list[np.ndarray],
    dx: np.ndarray,
    dS: list[np.ndarray],
    ds: np.ndarray,
    fraction: float,
) -> tuple[float, float]:
    primal = [_max_step(Xj, dXj) for Xj, dXj in zip(X, dX, strict=True)]
    dual = [_max_step(Sj, dSj) for Sj, dSj in zip(S, dS, strict=True)]
    alpha_p = min([*primal, _max_step_lp(x_lp, dx)])
    alpha_d = min([*dual, _max_step_lp(s_lp, ds)])
    return min(1.0, fraction * alpha_p), min(1.0, fraction * alpha_d)


def _report(
    problem: SdpProblem,
    status: SolveStatus,
    x: np.ndarray | None,
    iterations: int,
    measures: dict[str, float],
) -> SolveReport:
    details: dict[str, object] = dict(measures)
    if x is None:
        objective = float("nan")
        residual = float("inf")
    else:
        objective = float(problem.objective @ x)
        residual = problem.residual(x)
        details["block_min_eigenvalues"] = problem.block_eigenvalues(x)
    return SolveReport(
        status=status,
        objective=objective,
        solution=x,
        residual=residual,
        iterations=iterations,
        solver="hkm-sdp",
        details=details,
    )
