"""
Randomized image-set approximation.

Draws N states from X and N noise samples from W, maps them through the
dynamics and fits the configured set family to the image cloud. The sample
size comes from the scenario tail inversion unless fixed by the caller, in
which case the certificate carries the implied epsilon.
"""

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from ..constants import ApproximationDefaults, SamplingDefaults, Tolerances
from ..exceptions import ConfigurationError, InvalidDataError, ModelDomainError
from ..fitting import VolumeEstimate, create_fitter, pas_volume_estimate
from ..geometry import ApproximatingSet, Box, PasSet, set_to_dict
from ..models import ViolationEstimate
from ..sampling import (
    SamplePurpose,
    SampleStream,
    SetSampler,
    chunk_sizes,
    run_ordered,
    sample_box,
    sample_set,
)
from ..scenario import ScenarioCertificate, SetFamily, certify
from ..solvers import SolveReport
from ..systems import BatchEvaluation, Model

logger = logging.getLogger(__name__)


def propagate_samples(
    model: Model,
    states: np.ndarray,
    noise: np.ndarray | None,
    workers: int = 1,
) -> BatchEvaluation:
    """
    Map (x, w) pairs through f chunk by chunk.

    The result does not depend on the worker count: chunks are evaluated
    independently and concatenated in order.
    """
    sizes = chunk_sizes(states.shape[0])
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    def task(c: int) -> BatchEvaluation:
        rows = slice(offsets[c], offsets[c + 1])
        return model.propagate(states[rows], None if noise is None else noise[rows])

    parts = run_ordered(task, range(len(sizes)), workers)
    if len(parts) == 1:
        return parts[0]
    first = next((c for c, p in enumerate(parts) if p.component is not None), None)
    return BatchEvaluation(
        values=np.concatenate([p.values for p in parts], axis=0),
        valid=np.concatenate([p.valid for p in parts]),
        component=None if first is None else parts[first].component,
        subexpression=None if first is None else parts[first].subexpression,
        sample_index=(
            None
            if first is None
            else int(offsets[first]) + int(parts[first].sample_index or 0)
        ),
    )


def draw_noise(
    model: Model, stream: SampleStream, count: int, workers: int = 1
) -> np.ndarray | None:
    """
    Uniform process noise samples, or None for noise-free models.

    Raises:
        ConfigurationError: If the model has noise inputs but no W box
    """
    if model.n_w == 0:
        return None
    if model.noise_box is None:
        raise ConfigurationError(f"Model '{model.name}' has no process noise box W")
    return sample_box(model.noise_box, stream, count, workers)


def _state_box(model: Model) -> Box:
    if model.initial_box is None:
        raise ConfigurationError(f"Model '{model.name}' has no state box X")
    return model.initial_box


@dataclass
class ApproximationResult:
    """
    Fitted image-set approximation with its certificate.

    Attributes:
        fitted: The fitted set
        family: Set family of the fit
        certificate: Scenario certificate (eps, delta, d, N, method)
        cloud: (N, n) mapped sample points the set was fitted to
        report: Solver report of the fit
        degree: PAS degree (None for the norm-based families)
        violation: Monte Carlo violation estimate, when validation ran
        volume_estimate: Monte Carlo vol(U) of a PAS fit
        points_outside: Cloud points the fitter found outside the set
        timings: Wall-clock seconds per phase (kept out of numeric artifacts)
    """

    fitted: ApproximatingSet
    family: SetFamily
    certificate: ScenarioCertificate
    cloud: np.ndarray
    report: SolveReport
    degree: int | None = None
    violation: ViolationEstimate | None = None
    volume_estimate: VolumeEstimate | None = None
    points_outside: int = 0
    timings: dict[str, float] = field(default_factory=dict)

    def cloud_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            self.cloud, columns=[f"x{j + 1}" for j in range(self.cloud.shape[1])]
        )

    def to_dict(self) -> dict[str, Any]:
        """Result document without timings."""
        data: dict[str, Any] = {
            "family": self.family.value,
            "set": set_to_dict(self.fitted),
            "certificate": self.certificate.model_dump(mode="json"),
            "certificate_tail": self.certificate.tail,
            "solver": self.report.to_dict(),
            "sample_size": int(self.cloud.shape[0]),
            "points_outside": self.points_outside,
            "all_points_contained": bool(
                np.all(self.fitted.contains(self.cloud, Tolerances.CONTAINMENT_CHECK))
            ),
        }
        if self.degree is not None:
            data["degree"] = self.degree
        log_volume = getattr(self.fitted, "log_volume", None)
        if log_volume is not None:
            data["log_volume"] = log_volume
            data["volume"] = float(np.exp(log_volume))
        certificate = getattr(self.fitted, "certificate", None)
        if certificate is not None:
            data["gram_min_eigenvalue_margins"] = certificate.min_eigenvalue_margins()
        if self.volume_estimate is not None:
            data["volume_estimate"] = asdict(self.volume_estimate)
        if self.violation is not None:
            data["validation"] = self.violation.model_dump(mode="json")
        return data


class ApproximationService:
    """
    Runs randomized image-set approximations and their validation.

    The service holds only run-independent options; each call is a pure
    function of its arguments and seed.
    """

    def __init__(
        self,
        workers: int = 1,
        fitter_options: dict[str, Any] | None = None,
        sampler: SetSampler | None = None,
    ):
        """
        Initialize the service.

        Args:
            workers: Threads for sampling and mapping
            fitter_options: Extra keyword options for the set fitter
            sampler: Replaces uniform sampling of the state box X
        """
        self.workers = workers
        self.sampler = sampler
        self.fitter_options = dict(fitter_options or {})
        self.logger = logging.getLogger(__name__)

    def approximate(
        self,
        model: Model,
        family: SetFamily | str,
        epsilon: float,
        delta: float,
        degree: int | None = None,
        seed: int = 0,
        sample_size: int | None = None,
    ) -> ApproximationResult:
        """
        Approximate the image of X x W under f.

        Args:
            model: System model with its X and W boxes
            family: Set family to fit
            epsilon: Violation level
            delta: Confidence parameter
            degree: PAS degree (required for the pas family)
            seed: Root seed
            sample_size: Fixed N; the certificate then reports the implied eps

        Returns:
            ApproximationResult

        Raises:
            ModelDomainError: If f fails at a sample (x and w are reported)
            PointsOutsideDomainError: If PAS points leave S
            SolverError: If the fit does not converge
        """
        family = SetFamily(family)
        if family is SetFamily.PAS and degree is None:
            raise ConfigurationError("The pas family needs a degree")
        timings: dict[str, float] = {}
        started = time.perf_counter()
        certificate = certify(
            family,
            model.n,
            epsilon,
            delta,
            degree if family is SetFamily.PAS else None,
            sample_size,
        )
        N = certificate.sample_size
        self.logger.info(
            f"Approximating the image of '{model.name}' with a {family.value} "
            f"from N={N} samples (d={certificate.dimension}, "
            f"eps={certificate.epsilon:.6g}, delta={certificate.delta:g})"
        )
        stream = SampleStream(seed)
        states = sample_set(
            _state_box(model),
            stream.at(purpose=SamplePurpose.STATE),
            N,
            self.workers,
            self.sampler,
        )
        noise = draw_noise(
            model, stream.at(purpose=SamplePurpose.PROCESS_NOISE), N, self.workers
        )
        mapped = propagate_samples(model, states, noise, self.workers)
        if mapped.component is not None:
            i = mapped.sample_index or 0
            w = "" if noise is None else f", w={noise[i].tolist()}"
            raise ModelDomainError(
                f"Domain error in {mapped.component}: {mapped.subexpression} at "
                f"sample {i} (x={states[i].tolist()}{w})",
                component=mapped.component,
                subexpression=mapped.subexpression,
                sample_index=i,
            )
        timings["sampling"] = time.perf_counter() - started

        started = time.perf_counter()
        options = dict(self.fitter_options)
        if family is SetFamily.PAS:
            options["degree"] = degree
        fitter = create_fitter(family, **options)
        outcome = fitter.fit_detailed(mapped.values)
        timings["fit"] = time.perf_counter() - started
        self.logger.info(
            f"Fit finished with status {outcome.report.status.value} "
            f"({outcome.report.solver}, {outcome.report.iterations} iterations)"
        )
        volume_estimate = None
        if isinstance(outcome.fitted, PasSet):
            started = time.perf_counter()
            volume_estimate = pas_volume_estimate(
                outcome.fitted,
                stream.at(purpose=SamplePurpose.VOLUME_ESTIMATE),
                ApproximationDefaults.PAS_VOLUME_SAMPLES,
            )
            timings["volume"] = time.perf_counter() - started
        return ApproximationResult(
            fitted=outcome.fitted,
            family=family,
            certificate=certificate,
            cloud=mapped.values,
            report=outcome.report,
            degree=degree if family is SetFamily.PAS else None,
            volume_estimate=volume_estimate,
            points_outside=outcome.points_outside,
            timings=timings,
        )

    def estimate_violation(
        self, fitted: ApproximatingSet, model: Model, M: int, seed: int = 0
    ) -> ViolationEstimate:
        """
        Fraction of M fresh mapped samples outside the set.

        Samples whose evaluation fails count as violations. The binomial
        standard error is unreliable below 10^4 samples; a warning is logged.

        Raises:
            InvalidDataError: If M < 1
        """
        if M < 1:
            raise InvalidDataError(f"Validation needs M >= 1, got {M}")
        stream = SampleStream(seed)
        states = sample_set(
            _state_box(model),
            stream.at(purpose=SamplePurpose.VALIDATION_STATE),
            M,
            self.workers,
            self.sampler,
        )
        noise = draw_noise(
            model, stream.at(purpose=SamplePurpose.VALIDATION_NOISE), M, self.workers
        )
        mapped = propagate_samples(model, states, noise, self.workers)
        violated = ~mapped.valid
        if np.any(mapped.valid):
            violated[mapped.valid] = ~np.asarray(
                fitted.contains(mapped.values[mapped.valid])
            )
        domain_errors = mapped.n_errors
        if domain_errors:
            self.logger.warning(
                f"{domain_errors} validation samples failed in {mapped.component}; "
                "counted as violations"
            )
        fraction = float(np.mean(violated))
        standard_error = float(np.sqrt(fraction * (1.0 - fraction) / M))
        if M < SamplingDefaults.MIN_VALIDATION_SAMPLES:
            self.logger.warning(
                f"Standard error from M={M} < "
                f"{SamplingDefaults.MIN_VALIDATION_SAMPLES} samples is unreliable"
            )
        self.logger.info(f"Empirical violation {fraction:.6g} from M={M} samples")
        return ViolationEstimate(
            fraction=fraction,
            standard_error=standard_error,
            samples=M,
            domain_errors=domain_errors,
        )


def approximate_image_set(
    model: Model,
    family: SetFamily | str,
    epsilon: float,
    delta: float,
    degree: int | None = None,
    seed: int = 0,
    sample_size: int | None = None,
    workers: int = 1,
    sampler: SetSampler | None = None,
    **fitter_options: Any,
) -> ApproximationResult:
    """Functional form of ApproximationService.approximate."""
    service = ApproximationService(
        workers=workers, fitter_options=fitter_options, sampler=sampler
    )
    return service.approximate(model, family, epsilon, delta, degree, seed, sample_size)


def estimate_violation(
    fitted: ApproximatingSet, model: Model, M: int, seed: int = 0, workers: int = 1
) -> tuple[float, float]:
    """(fraction, standard error) of M fresh mapped samples outside the set."""
    estimate = ApproximationService(workers=workers).estimate_violation(
        fitted, model, M, seed
    )
    return estimate.fraction, estimate.standard_error
