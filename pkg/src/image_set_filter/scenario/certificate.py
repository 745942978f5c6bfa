"""Scenario certificates attached to every fitted set."""

import logging
from enum import Enum

from pydantic import BaseModel, Field, model_validator

from .bounds import (
    SetFamily,
    design_dimension,
    implied_epsilon,
    required_samples_exact,
    violation_tail,
)

logger = logging.getLogger(__name__)

_TAIL_SLACK = 1e-12


class CertificateMethod(str, Enum):
    """Rule that produced the sample size."""

    EXPLICIT_BOUND = "explicit-bound"
    TAIL_INVERSION = "tail-inversion"


class ScenarioCertificate(BaseModel):
    """(eps, delta, d, N) with Phi(eps, N, d) <= delta."""

    epsilon: float = Field(..., gt=0.0, lt=1.0, description="Violation level")
    delta: float = Field(..., gt=0.0, lt=1.0, description="Confidence parameter")
    dimension: int = Field(..., ge=1, description="Design dimension d")
    sample_size: int = Field(..., ge=1, description="Number of samples N")
    method: CertificateMethod = Field(..., description="Rule that produced N")

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def check_tail(self) -> "ScenarioCertificate":
        """Reject certificates whose tail exceeds delta."""
        tail = violation_tail(self.epsilon, self.sample_size, self.dimension)
        if tail > self.delta * (1.0 + _TAIL_SLACK):
            raise ValueError(
                f"Phi({self.epsilon}, {self.sample_size}, {self.dimension}) = "
                f"{tail:.6g} exceeds delta = {self.delta}"
            )
        return self

    @property
    def tail(self) -> float:
        return violation_tail(self.epsilon, self.sample_size, self.dimension)


def certify(
    family: SetFamily | str,
    n: int,
    epsilon: float,
    delta: float,
    degree: int | None = None,
    sample_size: int | None = None,
) -> ScenarioCertificate:
    """
    Build the certificate of a scenario fit.

    Without a sample size, N is the exact tail inversion at (epsilon, delta).
    With a fixed N the certificate carries the implied epsilon instead; when N
    is smaller than the design dimension a warning is logged and d is capped
    at N.

    Args:
        family: Set family being fitted
        n: State dimension
        epsilon: Requested violation level (ignored when sample_size is given)
        delta: Confidence parameter
        degree: PAS degree
        sample_size: Fixed N override

    Returns:
        A validated ScenarioCertificate
    """
    d = design_dimension(family, n, degree)
    if sample_size is None:
        N = required_samples_exact(epsilon, delta, d)
        return ScenarioCertificate(
            epsilon=epsilon,
            delta=delta,
            dimension=d,
            sample_size=N,
            method=CertificateMethod.TAIL_INVERSION,
        )
    method = CertificateMethod.TAIL_INVERSION
    if sample_size < d:
        logger.warning(
            f"Sample size {sample_size} is below the design dimension {d}; "
            "capping d at N"
        )
        d = sample_size
        method = CertificateMethod.EXPLICIT_BOUND
    implied = implied_epsilon(sample_size, delta, d)
    implied = min(implied, 1.0 - 1e-12)
    logger.info(f"Fixed N={sample_size} implies epsilon={implied:.6g} at delta={delta}")
    return ScenarioCertificate(
        epsilon=implied,
        delta=delta,
        dimension=d,
        sample_size=sample_size,
        method=method,
    )
