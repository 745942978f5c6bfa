"""
Service layer for the approximation and filtering algorithms.

This package contains the services that combine sampling, models and fitters
into image-set approximations and prediction-correction filter runs.
"""

from .approximation_service import (
    ApproximationResult,
    ApproximationService,
    approximate_image_set,
    draw_noise,
    estimate_violation,
    propagate_samples,
)
from .filter_service import (
    FilterService,
    FilterTrace,
    StepRecord,
    make_fitter,
    predict,
    predict_m_steps,
    rpcf_step,
    run_filter,
    simulate_truth,
)

__all__ = [
    "ApproximationResult",
    "ApproximationService",
    "FilterService",
    "FilterTrace",
    "StepRecord",
    "approximate_image_set",
    "draw_noise",
    "estimate_violation",
    "make_fitter",
    "predict",
    "predict_m_steps",
    "propagate_samples",
    "rpcf_step",
    "run_filter",
    "simulate_truth",
]
