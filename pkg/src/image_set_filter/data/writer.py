"""
Artifact writing.

JSON is written sorted and indented with shortest round-trip floats; CSV uses
pandas with 17 significant digits. Numeric artifacts never contain timings,
so re-running a command reproduces them byte for byte.
"""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from ..constants import ArtifactNames, CSVConstants
from ..exceptions import DataLoadError
from ..models import RunManifest

logger = logging.getLogger(__name__)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def dumps(data: Any) -> str:
    """Deterministic JSON text with a trailing newline."""
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


def cloud_frame(points: np.ndarray, prefix: str = "x") -> pd.DataFrame:
    """One row per point, columns x1..xn."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return pd.DataFrame(
        points, columns=[f"{prefix}{j + 1}" for j in range(points.shape[1])]
    )


class ArtifactWriter:
    """
    Writes the output files of one command and remembers them for the manifest.
    """

    def __init__(self) -> None:
        self.outputs: list[Path] = []
        self.logger = logging.getLogger(__name__)

    def _prepare(self, path: Path) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise DataLoadError(f"Cannot create output directory {path.parent}") from e
        self.outputs.append(path)
        return path

    def write_json(self, path: Path, data: Any) -> Path:
        path = self._prepare(path)
        path.write_text(dumps(data), encoding="utf-8")
        self.logger.info(f"Wrote {path}")
        return path

    def write_csv(self, path: Path, frame: pd.DataFrame) -> Path:
        path = self._prepare(path)
        frame.to_csv(
            path,
            index=False,
            float_format=CSVConstants.FLOAT_FORMAT,
            sep=CSVConstants.DEFAULT_SEPARATOR,
            lineterminator="\n",
        )
        self.logger.info(f"Wrote {path} ({len(frame)} rows)")
        return path

    def write_manifest(self, anchor: Path, manifest: RunManifest) -> Path:
        """
        Write the manifest next to the anchor output (anchor + .manifest.json).

        The manifest lists every file written so far.
        """
        anchor = Path(anchor)
        path = anchor.with_name(anchor.name + ArtifactNames.MANIFEST_SUFFIX)
        manifest = manifest.model_copy(
            update={"outputs": [str(p) for p in self.outputs]}
        )
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(manifest.model_dump(mode="json")), encoding="utf-8")
        self.logger.info(f"Wrote manifest {path}")
        return path


def read_manifest(path: Path) -> RunManifest:
    """
    Load a RunManifest.

    Raises:
        DataLoadError: If the file is missing or malformed
    """
    path = Path(path)
    if not path.exists():
        raise DataLoadError(f"Manifest not found: {path}")
    try:
        return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except ValueError as e:
        raise DataLoadError(f"Malformed manifest {path}: {e}") from e
