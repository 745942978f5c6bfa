"""
Data access layer.

This package contains modules for loading experiment inputs and writing
reproducible artifacts.
"""

from .loader import (
    DataLoaderProtocol,
    ExperimentDataLoader,
    file_digest,
    load_filter_config,
    resolve_model,
)
from .writer import ArtifactWriter, cloud_frame, dumps, read_manifest

__all__ = [
    "ArtifactWriter",
    "DataLoaderProtocol",
    "ExperimentDataLoader",
    "cloud_frame",
    "dumps",
    "file_digest",
    "load_filter_config",
    "read_manifest",
    "resolve_model",
]
