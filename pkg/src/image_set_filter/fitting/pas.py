"""
Polynomial superlevel set fitting.

The fit minimizes the integral of q over the box S subject to q(x_i) >= 1 at
every sample and a Putinar certificate of nonnegativity on S:

    q = r0 + sum_i r_i b_i,   r0, r_i sums of squares,  b_i the box faces.

Each SOS multiplier is a Gram matrix over a monomial half-basis; the Gram
entries are the SDP decision variables. The problem is solved in coordinates
where S is [-1, 1]^n and the polynomial and certificate are mapped back.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from ..constants import ApproximationDefaults, SolverDefaults, Tolerances
from ..exceptions import InvalidDataError, InvalidSetError, PointsOutsideDomainError
from ..geometry import (
    Box,
    MonomialBasis,
    PasSet,
    PutinarCertificate,
    box_faces,
    box_moments,
    substitution_matrix,
)
from ..geometry.polynomials import multiply_affine
from ..sampling import SampleStream, sample_box
from ..scenario import SetFamily, design_dimension
from ..solvers import LmiBlock, SdpProblem, SolveReport, solve_sdp
from .base import BaseSetFitter, FitOutcome, degeneracy_floor

logger = logging.getLogger(__name__)


class MultiplierPolicy(str, Enum):
    """Degree rule for the face multipliers."""

    # every multiplier has SOS degree 2 floor(sigma / 2); terms above sigma vanish
    MATCHED = "matched"
    # deg(r_i b_i) <= sigma, so face multipliers drop to 2 floor((sigma - 1) / 2)
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class _GramBlock:
    offset: int
    half: MonomialBasis

    @property
    def size(self) -> int:
        return len(self.half)

    @property
    def num_variables(self) -> int:
        return self.size * (self.size + 1) // 2


@dataclass(frozen=True, eq=False)
class PutinarTemplate:
    """
    Linear parameterization of q = r0 + sum_i r_i b_i by Gram entries.

    Attributes:
        box: Box whose faces multiply the face multipliers
        degree: Degree sigma of q
        multipliers: Face multiplier degree rule
        blocks: Gram blocks, r0 first, then one per face in box_faces order
        target: Basis the full expansion lives in (degree >= sigma)
        coefficient_map: Matrix L with expansion = L @ g
    """

    box: Box
    degree: int
    multipliers: MultiplierPolicy
    blocks: tuple[_GramBlock, ...]
    target: MonomialBasis
    coefficient_map: np.ndarray

    @property
    def num_variables(self) -> int:
        return int(self.coefficient_map.shape[1])

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(block.size for block in self.blocks)

    @property
    def basis(self) -> MonomialBasis:
        return MonomialBasis(self.box.dimension, self.degree)

    @property
    def excess_map(self) -> np.ndarray:
        """Rows of terms above the degree that must vanish; all-zero rows dropped."""
        rows = self.coefficient_map[len(self.basis) :]
        return rows[np.any(rows != 0.0, axis=1)]

    def coefficients(self, g: np.ndarray) -> np.ndarray:
        """Coefficients of q in the degree-sigma basis."""
        return self.coefficient_map[: len(self.basis)] @ g

    def grams(self, g: np.ndarray) -> list[np.ndarray]:
        out = []
        for block in self.blocks:
            values = g[block.offset : block.offset + block.num_variables]
            gram = np.zeros((block.size, block.size))
            gram[np.triu_indices(block.size)] = values
            out.append(gram + np.triu(gram, 1).T)
        return out

    def pack(self, grams: list[np.ndarray]) -> np.ndarray:
        """Inverse of grams()."""
        return np.concatenate(
            [gram[np.triu_indices(gram.shape[0])] for gram in grams]
        )

    def certificate(self, g: np.ndarray) -> PutinarCertificate:
        grams = self.grams(g)
        return PutinarCertificate(r0=grams[0], faces=tuple(grams[1:]))

    def lmi_blocks(self) -> tuple[LmiBlock, ...]:
        out = []
        for block in self.blocks:
            k = block.size
            coefficients = np.zeros((self.num_variables, k, k))
            rows, cols = np.triu_indices(k)
            for v, (a, b) in enumerate(zip(rows, cols, strict=True)):
                coefficients[block.offset + v, a, b] = 1.0
                coefficients[block.offset + v, b, a] = 1.0
            out.append(LmiBlock(constant=np.zeros((k, k)), coefficients=coefficients))
        return tuple(out)

    def to_sdp(self, points: np.ndarray) -> SdpProblem:
        """
        Scenario SDP: minimize the box integral of q with q >= 1 at the points.

        Args:
            points: (N, n) samples inside the box

        Returns:
            SdpProblem over the Gram entries
        """
        basis = self.basis
        q_map = self.coefficient_map[: len(basis)]
        objective = box_moments(self.box, self.degree) @ q_map
        values = basis.evaluate(points) @ q_map
        excess = self.excess_map
        return SdpProblem(
            objective=objective,
            blocks=self.lmi_blocks(),
            inequality_matrix=-values,
            inequality_rhs=-np.ones(values.shape[0]),
            equality_matrix=excess if excess.shape[0] else None,
            equality_rhs=np.zeros(excess.shape[0]) if excess.shape[0] else None,
        )


def multiplier_half_degrees(
    degree: int, multipliers: MultiplierPolicy | str
) -> tuple[int, int | None]:
    """Half-degrees of r0 and of the face multipliers (None when faces drop out)."""
    policy = MultiplierPolicy(multipliers)
    k0 = degree // 2
    if policy is MultiplierPolicy.MATCHED:
        return k0, k0
    k1 = (degree - 1) // 2
    return k0, (k1 if k1 >= 0 else None)


def assemble_putinar(
    box: Box,
    degree: int,
    multipliers: MultiplierPolicy | str = MultiplierPolicy.MATCHED,
) -> PutinarTemplate:
    """
    Build the Gram parameterization of degree-sigma Putinar certificates on a box.

    Args:
        box: Box S with positive volume
        degree: Degree sigma of q
        multipliers: Face multiplier degree rule

    Returns:
        PutinarTemplate with one PSD block per multiplier

    Raises:
        InvalidSetError: If the box is degenerate or the degree is negative
    """
    if degree < 0:
        raise InvalidSetError(f"Negative PAS degree {degree}")
    if box.is_degenerate:
        raise InvalidSetError("PAS bounding box must have positive volume")
    policy = MultiplierPolicy(multipliers)
    n = box.dimension
    k0, k1 = multiplier_half_degrees(degree, policy)
    target_degree = max(degree, 2 * k0, -1 if k1 is None else 2 * k1 + 1)
    target = MonomialBasis(n, target_degree)

    blocks = [_GramBlock(offset=0, half=MonomialBasis(n, k0))]
    faces = box_faces(box) if k1 is not None else []
    for _ in faces:
        offset = blocks[-1].offset + blocks[-1].num_variables
        blocks.append(_GramBlock(offset=offset, half=MonomialBasis(n, k1 or 0)))
    num_variables = blocks[-1].offset + blocks[-1].num_variables

    columns = np.zeros((len(target), num_variables))
    for position, block in enumerate(blocks):
        exps = block.half.exponents
        rows, cols = np.triu_indices(block.size)
        for v, (a, b) in enumerate(zip(rows, cols, strict=True)):
            column = np.zeros(len(target))
            column[target.index(tuple(exps[a] + exps[b]))] = 1.0 if a == b else 2.0
            if position > 0:
                j, constant, slope = faces[position - 1]
                column = multiply_affine(column, target, j, constant, slope)
            columns[:, block.offset + v] = column
    logger.debug(
        f"Putinar template: n={n}, degree={degree}, {policy.value} multipliers, "
        f"{len(blocks)} blocks, {num_variables} variables"
    )
    return PutinarTemplate(
        box=box,
        degree=degree,
        multipliers=policy,
        blocks=tuple(blocks),
        target=target,
        coefficient_map=columns,
    )


def auto_box(
    points: np.ndarray, factor: float = ApproximationDefaults.AUTO_BOX_FACTOR
) -> Box:
    """Sample bounding box scaled by factor, with flat coordinates widened."""
    bounds = Box.bounding(points)
    half = np.maximum(bounds.widths * factor, degeneracy_floor(points)) / 2.0
    return Box(bounds.center - half, bounds.center + half)


def _clip_psd(gram: np.ndarray) -> np.ndarray:
    eigenvalues, eigenvectors = np.linalg.eigh((gram + gram.T) / 2.0)
    if eigenvalues[0] >= 0.0:
        return (gram + gram.T) / 2.0
    clipped = (eigenvectors * np.maximum(eigenvalues, 0.0)) @ eigenvectors.T
    return (clipped + clipped.T) / 2.0


class PasFitter(BaseSetFitter):
    """Scenario fit of a polynomial superlevel set on a box."""

    family = SetFamily.PAS

    def __init__(
        self,
        box: Box | None = None,
        degree: int = ApproximationDefaults.PAS_DEGREE,
        tol: float = SolverDefaults.PAS_TOL,
        multipliers: MultiplierPolicy | str = MultiplierPolicy.MATCHED,
        auto_inflate: bool = False,
        **kwargs: Any,
    ):
        """
        Initialize the fitter.

        Args:
            box: Bounding box S; the inflated sample bounding box when None
            degree: Degree sigma of q
            tol: SDP tolerance
            multipliers: Face multiplier degree rule
            auto_inflate: Grow S to cover points outside it instead of failing
        """
        super().__init__(**kwargs)
        self.box = box
        self.degree = degree
        self.tol = tol
        self.multipliers = MultiplierPolicy(multipliers)
        self.auto_inflate = auto_inflate

    def design_dimension(self, n: int) -> int:
        return design_dimension(self.family, n, self.degree)

    def resolve_box(self, cloud: np.ndarray) -> Box:
        """
        Box the fit runs on.

        Raises:
            PointsOutsideDomainError: If points leave S and auto_inflate is off
        """
        if self.box is None:
            return auto_box(cloud)
        outside = np.flatnonzero(~self.box.contains(cloud, Tolerances.MEMBERSHIP))
        if outside.size == 0:
            return self.box
        grown = auto_box(cloud)
        suggested = Box(
            np.minimum(self.box.lower, grown.lower),
            np.maximum(self.box.upper, grown.upper),
        )
        if self.auto_inflate:
            self.logger.warning(
                f"{outside.size} points lie outside S; growing S to {suggested!r}"
            )
            return suggested
        raise PointsOutsideDomainError(
            f"{outside.size} of {cloud.shape[0]} points lie outside S = {self.box!r}; "
            f"try S = {suggested!r}",
            offenders=outside.tolist(),
            suggested_box=suggested,
        )

    def fit_detailed(self, points: Any) -> FitOutcome:
        """
        Solve the scenario SDP and return a certified PasSet.

        Raises:
            PointsOutsideDomainError: If points leave S (see resolve_box)
            SolverError: If the SDP does not reach optimality
        """
        cloud = self._prepare(points)
        n = cloud.shape[1]
        box = self.resolve_box(cloud)
        if box.is_degenerate:
            raise InvalidSetError("PAS bounding box must have positive volume")
        scale = 2.0 / box.widths
        shift = -(box.upper + box.lower) / box.widths
        unit = Box(-np.ones(n), np.ones(n))
        template = assemble_putinar(unit, self.degree, self.multipliers)
        normalized = np.clip(cloud * scale + shift, -1.0, 1.0)
        report = solve_sdp(template.to_sdp(normalized), tol=self.tol)
        report.raise_for_status(f"pas fit (degree {self.degree})")
        assert report.solution is not None

        grams = [_clip_psd(g) for g in template.grams(report.solution)]
        coefficients = template.coefficients(template.pack(grams))
        fitted = self._to_raw(box, template, coefficients, grams, scale, shift)
        outside = self._check_containment(fitted, cloud)
        objective = float(box_moments(box, self.degree) @ fitted.coefficients)
        details = dict(report.details)
        details["integral"] = objective
        details["multipliers"] = self.multipliers.value
        raw_report = SolveReport(
            status=report.status,
            objective=objective,
            solution=fitted.coefficients,
            residual=report.residual,
            iterations=report.iterations,
            solver=report.solver,
            details=details,
        )
        return FitOutcome(fitted=fitted, report=raw_report, points_outside=outside)

    def _to_raw(
        self,
        box: Box,
        template: PutinarTemplate,
        coefficients: np.ndarray,
        grams: list[np.ndarray],
        scale: np.ndarray,
        shift: np.ndarray,
    ) -> PasSet:
        """Map a normalized-coordinate fit back through x~ = scale * x + shift."""
        M = substitution_matrix(template.basis, scale, shift)
        raw_coefficients = M.T @ coefficients
        first = template.blocks[0].half
        M0 = substitution_matrix(first, scale, shift)
        r0 = M0.T @ grams[0] @ M0
        faces = []
        if len(template.blocks) > 1:
            half = template.blocks[1].half
            Mf = substitution_matrix(half, scale, shift)
            for (j, _, _), gram in zip(box_faces(box), grams[1:], strict=True):
                faces.append(scale[j] * (Mf.T @ gram @ Mf))
        certificate = PutinarCertificate(r0=r0, faces=tuple(faces))
        return PasSet(
            box=box,
            degree=self.degree,
            coefficients=raw_coefficients,
            certificate=certificate,
        )


def fit_pas(
    points: Any,
    box: Box,
    degree: int,
    tol: float = SolverDefaults.PAS_TOL,
    multipliers: MultiplierPolicy | str = MultiplierPolicy.MATCHED,
) -> PasSet:
    """
    Fit a polynomial superlevel set {x in S : q(x) >= 1} to a cloud.

    Args:
        points: (N, n) samples inside S
        box: Bounding box S
        degree: Degree sigma of q
        tol: SDP tolerance
        multipliers: Face multiplier degree rule

    Returns:
        Certified PasSet

    Raises:
        PointsOutsideDomainError: If a point lies outside S
        SolverError: If the SDP fails
    """
    fitter = PasFitter(box=box, degree=degree, tol=tol, multipliers=multipliers)
    fitted = fitter.fit(points)
    assert isinstance(fitted, PasSet)
    return fitted


@dataclass(frozen=True)
class VolumeEstimate:
    """Monte Carlo volume of a PasSet with its standard error."""

    value: float
    standard_error: float
    samples: int


def pas_volume_estimate(U: PasSet, stream: SampleStream, count: int) -> VolumeEstimate:
    """
    vol(S) times the fraction of uniform samples of S with q >= 1.

    Raises:
        InvalidDataError: If count < 1
    """
    if count < 1:
        raise InvalidDataError(f"Volume estimate needs a positive count, got {count}")
    draws = sample_box(U.box, stream, count)
    fraction = float(np.mean(U.evaluate(draws) >= 1.0))
    volume = U.box.volume
    return VolumeEstimate(
        value=volume * fraction,
        standard_error=volume * float(np.sqrt(fraction * (1.0 - fraction) / count)),
        samples=count,
    )
