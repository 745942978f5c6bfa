"""
Sampling layer.

Deterministic, counter-based uniform samplers for boxes, p-balls, NAS and PAS
sets.
"""

from .samplers import (
    SetSampler,
    rejection_sample,
    sample_ball,
    sample_box,
    sample_nas,
    sample_pas,
    sample_set,
)
from .streams import SamplePurpose, SampleStream, chunk_sizes, run_ordered

__all__ = [
    "SamplePurpose",
    "SampleStream",
    "SetSampler",
    "chunk_sizes",
    "rejection_sample",
    "run_ordered",
    "sample_ball",
    "sample_box",
    "sample_nas",
    "sample_pas",
    "sample_set",
]
