"""
Experiment pipeline.

The pipeline binds models, fitters, bounds and the filter into reproducible
runs: it resolves inputs, calls the services, writes the artifacts and a
RunManifest describing how to replay them. Every run is a pure function of
its arguments, so replaying a manifest reproduces the numeric outputs byte
for byte.
"""

import logging
import time
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .constants import ArtifactNames
from .data import (
    ArtifactWriter,
    DataLoaderProtocol,
    ExperimentDataLoader,
    cloud_frame,
    file_digest,
    read_manifest,
    resolve_model,
)
from .exceptions import ConfigurationError, ImageSetFilterError, ProcessingError
from .fitting import MultiplierPolicy
from .geometry import Box
from .models import FilterConfig, RunManifest, box_as_set
from .sampling import SampleStream
from .scenario import (
    SetFamily,
    design_dimension,
    required_samples_exact,
    required_samples_explicit,
    violation_tail,
)
from .services import (
    ApproximationService,
    FilterService,
    make_fitter,
    simulate_truth,
)
from .settings import Settings

logger = logging.getLogger(__name__)


def _optional_path(value: Any) -> Path | None:
    return None if value in (None, "") else Path(value)


def _digests(*paths: Path | None) -> dict[str, str]:
    return {str(p): file_digest(p) for p in paths if p is not None and p.exists()}


def compute_bounds(
    epsilon: float,
    delta: float,
    family: SetFamily | str,
    n: int,
    degree: int | None = None,
) -> dict[str, Any]:
    """Design dimension and both sample-size rules."""
    family = SetFamily(family)
    d = design_dimension(family, n, degree if family is SetFamily.PAS else None)
    logger.debug(f"Design dimension d={d} for {family.value} in n={n}")
    exact = required_samples_exact(epsilon, delta, d)
    explicit = required_samples_explicit(epsilon, delta, d)
    result: dict[str, Any] = {
        "family": family.value,
        "n": n,
        "epsilon": epsilon,
        "delta": delta,
        "d": d,
        "N_exact": exact,
        "N_explicit": explicit,
        "tail_at_N_exact": violation_tail(epsilon, exact, d),
    }
    if family is SetFamily.PAS:
        result["degree"] = degree
    return result


class ExperimentPipeline:
    """
    Orchestrates approximation and filter runs.

    The pipeline stays thin: numerical work is delegated to the services and
    file handling to the data layer.
    """

    def __init__(
        self,
        settings: Settings | None = None,
        loader: DataLoaderProtocol | None = None,
    ):
        """
        Initialize the pipeline.

        Args:
            settings: Run-level defaults (seed, workers, tolerances)
            loader: Input loader (defaults to ExperimentDataLoader)
        """
        self.settings = settings or Settings()
        self.loader: DataLoaderProtocol = loader or ExperimentDataLoader()
        self.logger = logging.getLogger(__name__)

    def _seed(self, seed: int | None) -> int:
        return self.settings.seed if seed is None else int(seed)

    def _workers(self, workers: int | None) -> int:
        return self.settings.workers if workers is None else int(workers)

    def run_approximate(
        self,
        out: str,
        model: str | None = None,
        builtin: str | None = None,
        family: str = SetFamily.ELLIPSOID.value,
        eps: float = 0.1,
        delta: float = 1e-3,
        degree: int | None = None,
        box: str | None = None,
        n_samples: int | None = None,
        seed: int | None = None,
        cloud: str | None = None,
        validate: int | None = None,
        workers: int | None = None,
        multipliers: str = MultiplierPolicy.MATCHED.value,
        arguments: dict[str, Any] | None = None,
    ) -> dict[str, Any]:
        """
        Randomized image-set approximation with artifacts.

        Writes result.json (set, certificate, solver report and validation),
        the optional cloud CSV and the manifest.

        Returns:
            The result document

        Raises:
            ConfigurationError: On invalid inputs
            ImageSetFilterError: From the services (solver, domain errors)
        """
        started = time.perf_counter()
        seed = self._seed(seed)
        workers = self._workers(workers)
        model_path = _optional_path(model)
        system = resolve_model(model_path, builtin, self.loader)
        set_family = SetFamily(family)
        fitter_options: dict[str, Any] = {}
        if set_family is SetFamily.PAS:
            degree = 4 if degree is None else degree
            fitter_options["multipliers"] = multipliers
            fitter_options["tol"] = self.settings.sdp_tol
            if box is not None and box.strip().lower() != "auto":
                fitter_options["box"] = Box.parse(box)
        elif set_family is SetFamily.ELLIPSOID:
            fitter_options["tol"] = self.settings.mvee_tol

        try:
            self.logger.info("=" * 60)
            self.logger.info(f"Approximation run: {system.name}, {set_family.value}")
            self.logger.info("=" * 60)
            service = ApproximationService(workers, fitter_options)
            result = service.approximate(
                system,
                set_family,
                eps,
                delta,
                degree if set_family is SetFamily.PAS else None,
                seed,
                n_samples,
            )
            if validate is not None:
                t0 = time.perf_counter()
                result.violation = service.estimate_violation(
                    result.fitted, system, validate, seed
                )
                result.timings["validation"] = time.perf_counter() - t0
        except ImageSetFilterError:
            raise
        except Exception as e:
            self.logger.error(f"Approximation failed: {e}")
            raise ProcessingError(f"Approximation run failed: {e}") from e

        document = result.to_dict()
        document["model"] = system.to_dict()
        document["seed"] = seed

        writer = ArtifactWriter()
        out_path = Path(out)
        writer.write_json(out_path, document)
        if cloud is not None:
            writer.write_csv(Path(cloud), result.cloud_frame())
        timings = dict(result.timings)
        timings["total"] = time.perf_counter() - started
        manifest = RunManifest(
            tool_version=__version__,
            command="approximate",
            arguments=arguments or {},
            configuration={
                "model": system.to_dict(),
                "family": set_family.value,
                "epsilon": eps,
                "delta": delta,
                "degree": degree,
                "sample_size": result.certificate.sample_size,
                "workers": workers,
            },
            seed=seed,
            input_digests=_digests(model_path),
            timings=timings,
        )
        writer.write_manifest(out_path, manifest)
        self.logger.info("=" * 60)
        self.logger.info(
            f"Approximation complete: N={result.certificate.sample_size}, "
            f"eps={result.certificate.epsilon:.6g}"
        )
        self.logger.info("=" * 60)
        return document

    def run_filter(
        self,
        out: str,
        model: str | None = None,
        builtin: str | None = None,
        config: str | None = None,
        seed: int | None = None,
        summary: str | None = None,
        measurements: str | None = None,
        simulate: bool = False,
        continue_on_inconsistent: bool = False,
        workers: int | None = None,
        arguments: dict[str, Any] | None = None,
    ) -> dict[str, Any]:
        """
        Prediction-correction filter run with artifacts.

        Writes trace.csv, the optional summary JSON, truth and measurement
        CSVs for simulated runs, and the manifest. A run stopped by an
        inconsistent measurement still writes its partial trace.

        Returns:
            The summary document

        Raises:
            ConfigurationError: On invalid inputs
            MeasurementInconsistentError: Unless continuing is allowed
        """
        started = time.perf_counter()
        seed = self._seed(seed)
        model_path = _optional_path(model)
        config_path = _optional_path(config)
        measurement_path = _optional_path(measurements)
        system = resolve_model(model_path, builtin, self.loader)
        cfg = (
            self.loader.load_filter_config(config_path)
            if config_path is not None
            else FilterConfig()
        )
        updates: dict[str, Any] = {}
        if continue_on_inconsistent:
            updates["continue_on_inconsistent"] = True
        if workers is not None or self.settings.workers != 1:
            updates["workers"] = self._workers(workers)
        if updates:
            cfg = cfg.model_copy(update=updates)

        if cfg.initial_set is not None:
            initial = cfg.initial_set.to_set()
        elif system.initial_box is not None:
            initial = box_as_set(system.initial_box)
        else:
            raise ConfigurationError("No initial set: give initial_set or X0")

        writer = ArtifactWriter()
        out_path = Path(out)
        truth = None
        Y = None
        if simulate:
            K = cfg.horizon
            if K is None:
                raise ConfigurationError("--simulate needs a horizon in the config")
            truth, Y = simulate_truth(
                system, cfg.initial_state, K, SampleStream(seed)
            )
            truth_frame = cloud_frame(truth)
            truth_frame.insert(0, "k", np.arange(truth.shape[0]))
            writer.write_csv(out_path.parent / ArtifactNames.TRUTH_FILE, truth_frame)
            if system.n_y:
                y_frame = cloud_frame(Y, prefix="y")
                y_frame.insert(0, "k", np.arange(1, Y.shape[0] + 1))
                writer.write_csv(
                    out_path.parent / ArtifactNames.MEASUREMENTS_FILE, y_frame
                )
        elif measurement_path is not None:
            Y = self.loader.load_measurements(measurement_path, system.n_y)
        elif system.n_y:
            raise ConfigurationError("Give --measurements or --simulate")

        self.logger.info("=" * 60)
        self.logger.info(f"Filter run: {system.name}, {cfg.family.value}")
        self.logger.info("=" * 60)
        fitter = make_fitter(cfg.family, self.settings.filter_mvee_tol)
        service = FilterService(cfg.family, cfg.workers, fitter)
        manifest = RunManifest(
            tool_version=__version__,
            command="filter",
            arguments=arguments or {},
            configuration={
                "model": system.to_dict(),
                "filter": cfg.model_dump(mode="json"),
            },
            seed=seed,
            input_digests=_digests(model_path, config_path, measurement_path),
        )
        try:
            trace = service.run(system, initial, Y, cfg, seed)
        except ImageSetFilterError as e:
            partial = getattr(e, "trace", None)
            if partial is not None and len(partial):
                writer.write_csv(out_path, partial.to_frame())
                writer.write_manifest(out_path, manifest)
            raise
        except Exception as e:
            self.logger.error(f"Filter failed: {e}")
            raise ProcessingError(f"Filter run failed: {e}") from e

        writer.write_csv(out_path, trace.to_frame())
        document = trace.summary(truth)
        document["model"] = system.name
        document["family"] = cfg.family.value
        document["seed"] = seed
        if summary is not None:
            writer.write_json(Path(summary), document)
        step_times = [r.wall_time for r in trace.records]
        manifest.timings = {
            "total": time.perf_counter() - started,
            "steps": float(np.sum(step_times)),
        }
        writer.write_manifest(out_path, manifest)
        self.logger.info("=" * 60)
        self.logger.info(
            f"Filter complete: {len(trace)} steps, final log-volume "
            f"{document['final_log_volume']:.4f}"
        )
        self.logger.info("=" * 60)
        return document

    def replay(
        self,
        manifest_path: Path,
        output_dir: Path | None = None,
        workers: int | None = None,
    ) -> dict[str, Any]:
        """
        Re-run the command recorded in a manifest.

        Args:
            manifest_path: Manifest to replay
            output_dir: Redirect every output file into this directory
            workers: Override the worker count (results do not depend on it)

        Raises:
            ConfigurationError: If the manifest names an unknown command
        """
        manifest = read_manifest(manifest_path)
        arguments = dict(manifest.arguments)
        if manifest.seed is not None:
            arguments["seed"] = manifest.seed
        if workers is not None:
            arguments["workers"] = workers
        if output_dir is not None:
            for key in ("out", "cloud", "summary"):
                if arguments.get(key):
                    arguments[key] = str(Path(output_dir) / Path(arguments[key]).name)
        self.logger.info(f"Replaying '{manifest.command}' from {manifest_path}")
        recorded = dict(manifest.arguments)
        if manifest.command == "approximate":
            return self.run_approximate(**arguments, arguments=recorded)
        if manifest.command == "filter":
            return self.run_filter(**arguments, arguments=recorded)
        raise ConfigurationError(f"Cannot replay command '{manifest.command}'")
