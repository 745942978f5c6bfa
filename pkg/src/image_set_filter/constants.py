"""
Constants used throughout the image-set-filter package.

This module centralizes tolerances, solver defaults and artifact formats so
that every module agrees on the same numbers.
"""

from enum import IntEnum
from typing import Final


# === Numerical Tolerances ===
class Tolerances:
    """Tolerances shared by geometry, fitting and filtering."""

    MEMBERSHIP: Final[float] = 1e-9  # Default absolute membership slack
    CONTAINMENT_CHECK: Final[float] = 1e-6  # Fitted sets must contain their cloud
    SYMMETRY_RTOL: Final[float] = 1e-12  # Relative asymmetry allowed in P
    GRAM_EIG_RTOL: Final[float] = 1e-8  # min eig >= -rtol * (1 + trace)
    COEFFICIENT_MATCH: Final[float] = 1e-8  # Gram reconstruction vs coefficients
    DEGENERACY_FLOOR: Final[float] = 1e-9  # Width floor relative to max(1, |x|)
    RANK_RTOL: Final[float] = 1e-9  # Singular values below rtol * s_max are zero


# === Solver Defaults ===
class SolverDefaults:
    """Defaults for the in-repo convex kernels."""

    SDP_TOL: Final[float] = 1e-7
    SDP_MAX_ITERATIONS: Final[int] = 200
    SDP_STEP_FRACTION: Final[float] = 0.95  # Fraction of the distance to the boundary
    SDP_DIVERGENCE: Final[float] = 1e10  # Iterate norm signalling infeasibility
    PAS_TOL: Final[float] = 1e-9

    LP_TOL: Final[float] = 1e-9

    MAXDET_GAP_TOL: Final[float] = 1e-10  # Barrier duality gap m / t
    MAXDET_GRADIENT_TOL: Final[float] = 1e-8
    MAXDET_BARRIER_GROWTH: Final[float] = 20.0
    MAXDET_MAX_NEWTON: Final[int] = 100  # Newton steps per centering
    MAXDET_LINE_SEARCH_ALPHA: Final[float] = 0.01
    MAXDET_LINE_SEARCH_BETA: Final[float] = 0.5

    MVEE_TOL: Final[float] = 1e-7
    MVEE_MAX_ITERATIONS: Final[int] = 100_000


# === Sampling Defaults ===
class SamplingDefaults:
    """Defaults for the counter-based samplers."""

    CHUNK_SIZE: Final[int] = 8192  # Samples per substream chunk
    MAX_REJECTION_DRAWS: Final[int] = 10_000_000
    MIN_VALIDATION_SAMPLES: Final[int] = 10_000  # Smaller M logs a warning


# === Approximation Defaults ===
class ApproximationDefaults:
    """Defaults for image-set approximation."""

    PAS_DEGREE: Final[int] = 4
    AUTO_BOX_FACTOR: Final[float] = 1.1  # Sample bounding box inflation for PAS
    PAS_VOLUME_SAMPLES: Final[int] = 100_000  # Monte Carlo draws for vol(U)


# === Filter Defaults ===
class FilterDefaults:
    """Defaults for the randomized prediction-correction filter."""

    EPSILON: Final[float] = 0.1
    DELTA: Final[float] = 1e-3
    REJECTION_TOLERANCE: Final[float] = 1e-9
    MAX_RESAMPLE_ATTEMPTS: Final[int] = 50
    MVEE_TOL: Final[float] = 1e-6


# === CSV / JSON Artifacts ===
class CSVConstants:
    """CSV writing conventions."""

    FLOAT_FORMAT: Final[str] = "%.17g"  # Full double precision
    DEFAULT_SEPARATOR: Final[str] = ","


class ArtifactNames:
    """Default artifact file names."""

    MANIFEST_SUFFIX: Final[str] = ".manifest.json"
    TRUTH_FILE: Final[str] = "truth.csv"
    MEASUREMENTS_FILE: Final[str] = "measurements.csv"


class ExitCode(IntEnum):
    """Process exit codes of the CLI."""

    SUCCESS = 0
    CONFIGURATION_ERROR = 2
    NUMERICAL_FAILURE = 3
