"""Image Set Filter - probabilistic image-set approximation and set-based filtering."""

__version__ = "0.3.0"

from . import (
    constants,
    data,
    exceptions,
    fitting,
    geometry,
    models,
    sampling,
    scenario,
    services,
    solvers,
    systems,
)
from .fitting import create_fitter, fit_ellipsoid, fit_pas
from .geometry import Box, NasSet, PasSet, PutinarCertificate
from .models import FilterConfig, RunManifest, ViolationEstimate
from .pipeline import ExperimentPipeline, compute_bounds
from .sampling import SampleStream
from .scenario import (
    ScenarioCertificate,
    SetFamily,
    certify,
    design_dimension,
    required_samples_exact,
    required_samples_explicit,
    violation_tail,
)
from .services import (
    ApproximationResult,
    FilterTrace,
    StepRecord,
    approximate_image_set,
    estimate_violation,
    predict,
    rpcf_step,
    run_filter,
)
from .systems import Model, builtin_model, parse_expression


def get_version() -> str:
    """Get the current version of image_set_filter."""
    return __version__


def get_package_info() -> dict[str, str]:
    """Get package information including name and version."""
    return {
        "name": "image-set-filter",
        "version": __version__,
        "description": (
            "Probabilistic minimum-volume image-set approximation and "
            "randomized prediction-correction filtering"
        ),
    }


__all__ = [
    # Version & Info
    "get_version",
    "get_package_info",
    # Sets
    "Box",
    "NasSet",
    "PasSet",
    "PutinarCertificate",
    # Scenario
    "ScenarioCertificate",
    "SetFamily",
    "certify",
    "design_dimension",
    "required_samples_exact",
    "required_samples_explicit",
    "violation_tail",
    # Sampling & Fitting
    "SampleStream",
    "create_fitter",
    "fit_ellipsoid",
    "fit_pas",
    # Models
    "FilterConfig",
    "Model",
    "RunManifest",
    "ViolationEstimate",
    "builtin_model",
    "parse_expression",
    # Services
    "ApproximationResult",
    "FilterTrace",
    "StepRecord",
    "approximate_image_set",
    "estimate_violation",
    "predict",
    "rpcf_step",
    "run_filter",
    # Pipeline
    "ExperimentPipeline",
    "compute_bounds",
    # Modules
    "constants",
    "data",
    "exceptions",
    "fitting",
    "geometry",
    "models",
    "sampling",
    "scenario",
    "services",
    "solvers",
    "systems",
]
