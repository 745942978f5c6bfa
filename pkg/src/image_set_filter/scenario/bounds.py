"""
Sample-complexity arithmetic for scenario programs.

The violation tail Phi(eps, N, d) = sum_{j<d} C(N, j) eps^j (1 - eps)^(N - j)
bounds the probability that a scenario solution with d design variables,
built from N samples, violates more than a fraction eps of unseen samples.
"""

import math
from enum import Enum

import numpy as np
from scipy.special import gammaln, logsumexp

from ..exceptions import ValidationError

_EXACT_LOG_BINOMIAL_LIMIT = 1000
_EPSILON_BISECTION_STEPS = 200


class SetFamily(str, Enum):
    """Approximating set families."""

    ELLIPSOID = "ellipsoid"
    PARALLELOTOPE = "parallelotope"
    BOX = "box"
    L1 = "l1"
    PAS = "pas"

    @classmethod
    def _missing_(cls, value: object) -> "SetFamily | None":
        text = str(value).strip().lower()
        for member in cls:
            if member.value == text:
                return member
        aliases = {
            "hyperrectangle": cls.BOX,
            "l1-diag": cls.L1,
            "cross-polytope": cls.L1,
        }
        return aliases.get(text)

    @property
    def is_nas(self) -> bool:
        return self is not SetFamily.PAS


def _check_probability(name: str, value: float, closed: bool = False) -> None:
    ok = 0.0 <= value <= 1.0 if closed else 0.0 < value < 1.0
    if not ok:
        interval = "[0, 1]" if closed else "(0, 1)"
        raise ValidationError(f"{name} must lie in {interval}, got {value}")


def _log_binomials(N: int, j: np.ndarray) -> np.ndarray:
    if N <= _EXACT_LOG_BINOMIAL_LIMIT:
        return np.array([math.log(math.comb(N, int(k))) for k in j])
    return gammaln(N + 1.0) - gammaln(j + 1.0) - gammaln(N - j + 1.0)


def violation_tail(epsilon: float, N: int, d: int) -> float:
    """
    Binomial tail Phi(eps, N, d), evaluated in log space and clamped to [0, 1].

    Raises:
        ValidationError: If a parameter is out of range
    """
    _check_probability("epsilon", epsilon, closed=True)
    if N < 1 or d < 1:
        raise ValidationError(f"Need N >= 1 and d >= 1, got N={N}, d={d}")
    top = min(d - 1, N)
    if epsilon == 0.0 or top == N:
        return 1.0
    if epsilon == 1.0:
        return 0.0
    j = np.arange(top + 1, dtype=float)
    log_terms = (
        _log_binomials(N, j) + j * math.log(epsilon) + (N - j) * math.log1p(-epsilon)
    )
    return float(min(1.0, max(0.0, math.exp(logsumexp(log_terms)))))


def required_samples_explicit(epsilon: float, delta: float, d: int) -> int:
    """Smallest N with N >= e/(e-1) * (1/eps) * (d + ln(1/delta))."""
    _check_probability("epsilon", epsilon)
    _check_probability("delta", delta)
    if d < 1:
        raise ValidationError(f"Design dimension must be >= 1, got {d}")
    bound = math.e / (math.e - 1.0) / epsilon * (d + math.log(1.0 / delta))
    return math.ceil(bound)


def required_samples_exact(epsilon: float, delta: float, d: int) -> int:
    """
    Minimal N with violation_tail(eps, N, d) <= delta.

    Phi is nonincreasing in N, so an exponential search for a feasible N is
    followed by a binary search for the smallest one.
    """
    _check_probability("epsilon", epsilon)
    _check_probability("delta", delta)
    if d < 1:
        raise ValidationError(f"Design dimension must be >= 1, got {d}")
    low, high = 0, max(1, d)
    while violation_tail(epsilon, high, d) > delta:
        low, high = high, 2 * high
    while high - low > 1:
        middle = (low + high) // 2
        if violation_tail(epsilon, middle, d) <= delta:
            high = middle
        else:
            low = middle
    return high


def implied_epsilon(N: int, delta: float, d: int) -> float:
    """
    Smallest eps with violation_tail(eps, N, d) <= delta, found by bisection.

    Returns 1.0 when no eps < 1 works (d > N).
    """
    _check_probability("delta", delta)
    if N < 1 or d < 1:
        raise ValidationError(f"Need N >= 1 and d >= 1, got N={N}, d={d}")
    if d > N:
        return 1.0
    low, high = 0.0, 1.0
    for _ in range(_EPSILON_BISECTION_STEPS):
        middle = 0.5 * (low + high)
        if middle in (low, high):
            break
        if violation_tail(middle, N, d) <= delta:
            high = middle
        else:
            low = middle
    return high


def design_dimension(family: SetFamily | str, n: int, degree: int | None = None) -> int:
    """
    Number of free decision variables of the scenario program.

    ellipsoid / parallelotope: n(n+1)/2 + n; box and l1 (diagonal P): 2n;
    pas: C(n + degree, n), the number of coefficients of q.

    Raises:
        ValidationError: If n < 1 or the PAS degree is missing
    """
    family = SetFamily(family)
    if n < 1:
        raise ValidationError(f"State dimension must be >= 1, got {n}")
    if family is SetFamily.PAS:
        if degree is None or degree < 0:
            raise ValidationError("The pas family needs a nonnegative degree")
        return math.comb(n + degree, n)
    if family in (SetFamily.BOX, SetFamily.L1):
        return 2 * n
    return n * (n + 1) // 2 + n
