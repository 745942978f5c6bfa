"""
Randomized prediction and prediction-correction filtering.

Each step treats the current set A_k as carrying a uniform state
distribution: N states are drawn from A_k, mapped through f with fresh
process noise, tested against the measurement (y - g(x) must lie in the
noise box V) and a minimum-volume set of the configured family is fitted to
the survivors. No weights are carried from step to step.

Substream layout of step k (epoch k): round r of the correction step draws
states from (STATE, index r) and noise from (PROCESS_NOISE, index r);
noise step j of an m-step prediction uses (PROCESS_NOISE, index j - 1).
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from ..constants import FilterDefaults, Tolerances
from ..exceptions import (
    ConfigurationError,
    DimensionMismatchError,
    FilterError,
    InvalidDataError,
    MeasurementInconsistentError,
)
from ..fitting import (
    BaseSetFitter,
    EllipsoidFitter,
    SetFitterProtocol,
    create_fitter,
)
from ..geometry import Box, NasSet, as_points
from ..models import FilterConfig, StepStatus
from ..sampling import (
    SamplePurpose,
    SampleStream,
    SetSampler,
    sample_box,
    sample_set,
)
from ..scenario import ScenarioCertificate, SetFamily
from ..systems import Model
from .approximation_service import draw_noise, propagate_samples

logger = logging.getLogger(__name__)


@dataclass
class StepRecord:
    """
    Bookkeeping of one filter step.

    n_used = n_drawn - n_rejected + n_resampled holds for every step except
    an inconsistent one that fell back to the prediction, where n_used counts
    the valid predicted points instead.

    Attributes:
        k: Step index (the set is A_k)
        fitted: Fitted set (None when the step failed)
        n_drawn: Candidates of the first round (reused plus fresh)
        n_rejected: Candidates dropped in all rounds (measurement or domain)
        n_resampled: Candidates drawn in resample rounds
        n_used: Points the set was fitted to
        n_domain_errors: Subset of n_rejected dropped for domain errors
        n_reused: Survivors of the previous step propagated again
        n_fresh: States freshly drawn from A_{k-1} in the first round
        n_noise_draws: Process noise samples drawn
        resample_rounds: Resample rounds performed
        status: Step outcome
        wall_time: Wall-clock seconds (kept out of numeric artifacts)
        survivors: (n_used, n) points the set was fitted to
    """

    k: int
    fitted: NasSet | None
    n_drawn: int
    n_rejected: int = 0
    n_resampled: int = 0
    n_used: int = 0
    n_domain_errors: int = 0
    n_reused: int = 0
    n_fresh: int = 0
    n_noise_draws: int = 0
    resample_rounds: int = 0
    status: StepStatus = StepStatus.OK
    wall_time: float = 0.0
    survivors: np.ndarray | None = field(default=None, repr=False)

    @property
    def bookkeeping_holds(self) -> bool:
        if self.status is StepStatus.INCONSISTENT:
            return self.n_used <= self.n_drawn
        return self.n_used == self.n_drawn - self.n_rejected + self.n_resampled

    @property
    def log_volume(self) -> float:
        return float("nan") if self.fitted is None else self.fitted.log_volume

    @property
    def volume(self) -> float:
        return float(np.exp(self.log_volume))

    def spans(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis [min, max] of the fitted set."""
        if self.fitted is None:
            raise FilterError(f"Step {self.k} has no fitted set")
        return self.fitted.spans()

    def to_row(self) -> dict[str, Any]:
        """One trace.csv row (no wall time)."""
        row: dict[str, Any] = {"k": self.k}
        if self.fitted is not None:
            n = self.fitted.dimension
            for j in range(n):
                row[f"c{j + 1}"] = self.fitted.center[j]
            for i in range(n):
                for j in range(n):
                    row[f"P{i + 1}{j + 1}"] = self.fitted.shape[i, j]
            row["logvol"] = self.log_volume
            lower, upper = self.fitted.spans()
            for j in range(n):
                row[f"span_lo{j + 1}"] = lower[j]
                row[f"span_hi{j + 1}"] = upper[j]
        row.update(
            {
                "N_drawn": self.n_drawn,
                "N_rejected": self.n_rejected,
                "N_resampled": self.n_resampled,
                "N_used": self.n_used,
                "N_domain_errors": self.n_domain_errors,
                "N_reused": self.n_reused,
                "status": self.status.value,
            }
        )
        return row


@dataclass
class FilterTrace:
    """Per-step records of a filter run."""

    initial: NasSet
    certificate: ScenarioCertificate
    sample_size: int
    records: list[StepRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def log_volumes(self) -> np.ndarray:
        return np.array([r.log_volume for r in self.records])

    def _truth_rows(self, truth: Any) -> np.ndarray:
        states = np.atleast_2d(np.asarray(truth, dtype=float))
        K = len(self.records)
        if states.shape[0] == K + 1:
            return states[1:]
        if states.shape[0] == K:
            return states
        raise DimensionMismatchError(
            f"Truth has {states.shape[0]} states for a trace of {K} steps"
        )

    def containment(self, truth: Any) -> np.ndarray:
        """
        Whether x_k lies in A_k for k = 1..K.

        Args:
            truth: States x_0..x_K or x_1..x_K
        """
        states = self._truth_rows(truth)
        return np.array(
            [
                r.fitted is not None and bool(r.fitted.contains(x))
                for r, x in zip(self.records, states, strict=True)
            ]
        )

    def span_containment(self, truth: Any, axis: int = 0) -> np.ndarray:
        """Whether x_k along `axis` lies within the span of A_k."""
        states = self._truth_rows(truth)
        inside = []
        for r, x in zip(self.records, states, strict=True):
            if r.fitted is None:
                inside.append(False)
                continue
            lower, upper = r.fitted.spans()
            tol = Tolerances.MEMBERSHIP
            inside.append(bool(lower[axis] - tol <= x[axis] <= upper[axis] + tol))
        return np.array(inside)

    def to_frame(self) -> pd.DataFrame:
        """trace.csv table, one row per step."""
        return pd.DataFrame([r.to_row() for r in self.records])

    def summary(self, truth: Any = None) -> dict[str, Any]:
        """Run summary; containment figures need the true states."""
        statuses: dict[str, int] = {}
        for r in self.records:
            statuses[r.status.value] = statuses.get(r.status.value, 0) + 1
        data: dict[str, Any] = {
            "steps": len(self.records),
            "sample_size": self.sample_size,
            "certificate": self.certificate.model_dump(mode="json"),
            "initial_log_volume": self.initial.log_volume,
            "final_log_volume": (
                self.records[-1].log_volume if self.records else None
            ),
            "log_volumes": self.log_volumes.tolist(),
            "status_counts": statuses,
            "total_rejected": int(sum(r.n_rejected for r in self.records)),
            "total_domain_errors": int(sum(r.n_domain_errors for r in self.records)),
        }
        if truth is not None:
            contained = self.containment(truth)
            spans = self.span_containment(truth, 0)
            data["containment"] = contained.tolist()
            data["containment_frequency"] = float(np.mean(contained))
            data["span_containment_frequency"] = float(np.mean(spans))
        return data


def make_fitter(
    family: SetFamily | str, mvee_tol: float = FilterDefaults.MVEE_TOL
) -> BaseSetFitter:
    """Fitter of a norm-based family, with the filter's MVEE tolerance."""
    family = SetFamily(family)
    if not family.is_nas:
        raise ConfigurationError("The filter supports the norm-based families only")
    if family is SetFamily.ELLIPSOID:
        return EllipsoidFitter(tol=mvee_tol)
    return create_fitter(family)


class FilterService:
    """
    Runs prediction and prediction-correction steps.

    The service is stateless between calls; everything a step needs is passed
    in, so steps are pure functions of their stream.
    """

    def __init__(
        self,
        family: SetFamily | str = SetFamily.ELLIPSOID,
        workers: int = 1,
        fitter: SetFitterProtocol | None = None,
        sampler: SetSampler | None = None,
    ):
        """
        Initialize the service.

        Args:
            family: Norm-based family fitted at every step
            workers: Threads for sampling and propagation
            fitter: Fitter override (defaults to make_fitter(family))
            sampler: Replaces uniform sampling of the current set
        """
        self.family = SetFamily(family)
        self.workers = workers
        self.fitter: SetFitterProtocol = fitter or make_fitter(self.family)
        self.sampler = sampler
        self.logger = logging.getLogger(__name__)

    def _fit(self, points: np.ndarray) -> NasSet:
        fitted = self.fitter.fit(points)
        assert isinstance(fitted, NasSet)
        return fitted

    def predict(
        self, A: NasSet, model: Model, N: int, stream: SampleStream, k: int = 1
    ) -> StepRecord:
        """
        One-step randomized prediction: sample A, map through f, refit.

        Samples whose evaluation fails are dropped and counted.
        """
        return self.predict_m_steps(A, model, N, 1, stream, k)

    def predict_m_steps(
        self,
        A: NasSet,
        model: Model,
        N: int,
        m_steps: int,
        stream: SampleStream,
        k: int | None = None,
    ) -> StepRecord:
        """
        m-step prediction in one shot.

        Each of the N states is propagated through m_steps noise draws (m N
        noise samples in total) and a single set is fitted at the end.

        Raises:
            InvalidDataError: If N < 1 or m_steps < 1
            FilterError: If every sample hits a domain error
        """
        if N < 1 or m_steps < 1:
            raise InvalidDataError(f"Need N >= 1 and m_steps >= 1, got {N}, {m_steps}")
        started = time.perf_counter()
        states = sample_set(
            A,
            stream.at(purpose=SamplePurpose.STATE, index=0),
            N,
            self.workers,
            self.sampler,
        )
        alive = np.ones(N, dtype=bool)
        for j in range(1, m_steps + 1):
            noise = draw_noise(
                model,
                stream.at(purpose=SamplePurpose.PROCESS_NOISE, index=j - 1),
                N,
                self.workers,
            )
            mapped = propagate_samples(model, states, noise, self.workers)
            alive &= mapped.valid
            states = np.where(alive[:, None], mapped.values, 0.0)
        dropped = int(N - np.sum(alive))
        if dropped:
            self.logger.warning(
                f"Prediction dropped {dropped} samples on domain errors"
            )
        if not np.any(alive):
            raise FilterError("Every predicted sample failed to evaluate")
        cloud = states[alive]
        fitted = self._fit(cloud)
        return StepRecord(
            k=m_steps if k is None else k,
            fitted=fitted,
            n_drawn=N,
            n_rejected=dropped,
            n_used=cloud.shape[0],
            n_domain_errors=dropped,
            n_fresh=N,
            n_noise_draws=m_steps * N if model.n_w else 0,
            status=StepStatus.DOMAIN_ERRORS if dropped else StepStatus.OK,
            wall_time=time.perf_counter() - started,
            survivors=cloud,
        )

    def _round(
        self,
        model: Model,
        states: np.ndarray,
        stream: SampleStream,
        index: int,
        y: np.ndarray | None,
        V: Box | None,
        tol: float,
    ) -> tuple[np.ndarray, np.ndarray, int, int]:
        """Propagate and test one batch; returns (points, accepted, domain, slab)."""
        noise = draw_noise(
            model,
            stream.at(purpose=SamplePurpose.PROCESS_NOISE, index=index),
            states.shape[0],
            self.workers,
        )
        mapped = propagate_samples(model, states, noise, self.workers)
        valid = mapped.valid.copy()
        accepted = valid.copy()
        if y is not None and V is not None and np.any(valid):
            idx = np.flatnonzero(valid)
            measured = model.measure(mapped.values[idx])
            consistent = np.asarray(V.contains(y[None, :] - measured.values, tol))
            valid[idx[~measured.valid]] = False
            accepted[idx] = consistent & measured.valid
        domain = int(np.sum(~valid))
        slab = int(np.sum(valid & ~accepted))
        return mapped.values, accepted, domain, slab

    def rpcf_step(
        self,
        A: NasSet,
        y: Any,
        model: Model,
        config: FilterConfig,
        stream: SampleStream,
        N: int,
        k: int = 1,
        V: Box | None = None,
        survivors: np.ndarray | None = None,
    ) -> StepRecord:
        """
        One prediction-correction step.

        Propagated samples with y - g(x) outside V are rejected; with
        resampling on, rejected ones are redrawn from A until N survive or
        the round cap is reached. With reuse on, the previous survivors are
        propagated again and only the remaining N - N_good states are drawn.

        Args:
            A: Current set A_{k-1}
            y: Measurement y_k (None for unmeasured systems)
            model: System model
            config: Filter configuration
            stream: Substream of the step
            N: Sample size
            k: Step index
            V: Measurement noise box (defaults to the model's)
            survivors: Previous step's survivors (used with reuse on)

        Returns:
            StepRecord of A_k

        Raises:
            MeasurementInconsistentError: If no sample survives and the config
                does not allow falling back to the prediction
        """
        started = time.perf_counter()
        V = V if V is not None else model.measurement_box
        y_vec = None
        if model.n_y and y is not None:
            y_vec = np.asarray(y, dtype=float).reshape(-1)
            if y_vec.shape[0] != model.n_y:
                raise DimensionMismatchError(
                    f"Measurement of length {y_vec.shape[0]} for n_y={model.n_y}"
                )
            if V is None:
                raise ConfigurationError(
                    f"Model '{model.name}' has no measurement noise box V"
                )
        tol = config.rejection_tolerance

        n_reused = 0
        parts = []
        if config.reuse and survivors is not None and survivors.shape[0] > 0:
            reused, _ = as_points(survivors, model.n)
            reused = reused[:N]
            n_reused = reused.shape[0]
            parts.append(reused)
        n_fresh = N - n_reused
        if n_fresh > 0:
            parts.append(
                sample_set(
                    A,
                    stream.at(purpose=SamplePurpose.STATE, index=0),
                    n_fresh,
                    self.workers,
                    self.sampler,
                )
            )
        states = np.vstack(parts)
        points, accepted, domain, slab = self._round(
            model, states, stream, 0, y_vec, V, tol
        )
        prediction = points[np.isfinite(points).all(axis=1)]
        kept = [points[accepted]]
        good = int(np.sum(accepted))
        n_rejected = domain + slab
        n_domain = domain
        n_resampled = 0
        n_noise = N if model.n_w else 0
        rounds = 0
        while config.resample and good < N and rounds < config.max_resample_attempts:
            rounds += 1
            need = N - good
            fresh = sample_set(
                A,
                stream.at(purpose=SamplePurpose.STATE, index=rounds),
                need,
                self.workers,
                self.sampler,
            )
            points, accepted, domain, slab = self._round(
                model, fresh, stream, rounds, y_vec, V, tol
            )
            kept.append(points[accepted])
            good += int(np.sum(accepted))
            n_rejected += domain + slab
            n_domain += domain
            n_resampled += need
            n_noise += need if model.n_w else 0

        record = StepRecord(
            k=k,
            fitted=None,
            n_drawn=N,
            n_rejected=n_rejected,
            n_resampled=n_resampled,
            n_used=good,
            n_domain_errors=n_domain,
            n_reused=n_reused,
            n_fresh=n_fresh,
            n_noise_draws=n_noise,
            resample_rounds=rounds,
        )
        if n_domain:
            self.logger.warning(
                f"Step {k}: {n_domain} samples rejected on domain errors"
            )

        if good == 0:
            record.status = StepStatus.INCONSISTENT
            if not config.continue_on_inconsistent or prediction.shape[0] == 0:
                record.wall_time = time.perf_counter() - started
                raise MeasurementInconsistentError(
                    f"Step {k}: every propagated sample is inconsistent with the "
                    f"measurement y={None if y_vec is None else y_vec.tolist()}",
                    record=record,
                )
            self.logger.warning(
                f"Step {k}: measurement inconsistent; keeping the prediction"
            )
            cloud = prediction
        else:
            cloud = np.vstack(kept)
            if good < N and config.resample:
                record.status = StepStatus.RESAMPLE_CAP
                self.logger.warning(
                    f"Step {k}: only {good} of {N} samples survived after "
                    f"{rounds} resample rounds"
                )
            elif n_domain:
                record.status = StepStatus.DOMAIN_ERRORS

        record.fitted = self._fit(cloud)
        record.n_used = cloud.shape[0]
        record.survivors = cloud
        record.wall_time = time.perf_counter() - started
        self.logger.debug(
            f"Step {k}: drawn={N} rejected={n_rejected} resampled={n_resampled} "
            f"used={record.n_used} logvol={record.log_volume:.4f}"
        )
        return record

    def run(
        self,
        model: Model,
        initial: NasSet,
        measurements: Any,
        config: FilterConfig,
        seed: int,
    ) -> FilterTrace:
        """
        Iterate prediction-correction steps over y_1..y_K.

        Raises:
            ConfigurationError: If the horizon and measurements disagree
            MeasurementInconsistentError: Carrying the partial trace
        """
        if initial.dimension != model.n:
            raise DimensionMismatchError(
                f"Initial set of dimension {initial.dimension} for n={model.n}"
            )
        Y = None
        if model.n_y:
            if measurements is None:
                raise ConfigurationError("A measured model needs measurements")
            Y = np.atleast_2d(np.asarray(measurements, dtype=float))
            if Y.shape[1] != model.n_y:
                raise DimensionMismatchError(
                    f"Measurements have {Y.shape[1]} columns for n_y={model.n_y}"
                )
        K = config.horizon
        if K is None and Y is not None:
            K = Y.shape[0]
        if K is None:
            raise ConfigurationError("Give a horizon for an unmeasured model")
        if Y is not None and Y.shape[0] < K:
            raise ConfigurationError(
                f"{Y.shape[0]} measurements for a horizon of {K} steps"
            )
        schedule = config.measurement_noise_schedule
        if schedule is not None and len(schedule) < K:
            raise ConfigurationError(
                f"Measurement noise schedule covers {len(schedule)} of {K} steps"
            )
        certificate = config.certificate(model.n)
        N = certificate.sample_size
        trace = FilterTrace(initial=initial, certificate=certificate, sample_size=N)
        self.logger.info(
            f"Running {K} filter steps on '{model.name}' with N={N} "
            f"({self.family.value}, eps={certificate.epsilon:.6g}, "
            f"delta={certificate.delta:g})"
        )
        A = initial
        survivors = None
        for k in range(1, K + 1):
            stream = SampleStream(seed, epoch=k)
            V = config.measurement_box(k, model.measurement_box)
            y = None if Y is None else Y[k - 1]
            try:
                record = self.rpcf_step(
                    A, y, model, config, stream, N, k=k, V=V, survivors=survivors
                )
            except MeasurementInconsistentError as e:
                e.trace = trace
                raise
            trace.records.append(record)
            assert record.fitted is not None
            A = record.fitted
            survivors = record.survivors
        self.logger.info(
            f"Filter finished: final log-volume {trace.records[-1].log_volume:.4f}"
        )
        return trace


def simulate_truth(
    model: Model, x0: Any, K: int, stream: SampleStream
) -> tuple[np.ndarray, np.ndarray]:
    """
    Realized trajectory x_0..x_K and measurements y_1..y_K.

    w_k and v_k are drawn uniformly from W and V. When x0 is None it is drawn
    uniformly from X0.

    Raises:
        InvalidDataError: If x0 lies outside X0
        ModelDomainError: If the dynamics or measurement fail (with the step)
    """
    if K < 1:
        raise InvalidDataError(f"Horizon must be at least 1, got {K}")
    if x0 is None:
        if model.initial_box is None:
            raise ConfigurationError(f"Model '{model.name}' has no X0 to draw from")
        x = sample_box(
            model.initial_box, stream.at(purpose=SamplePurpose.TRUTH_INITIAL_STATE), 1
        )[0]
    else:
        x = np.asarray(x0, dtype=float).reshape(-1)
        if x.shape[0] != model.n:
            raise DimensionMismatchError(f"x0 of length {x.shape[0]} for n={model.n}")
        if model.initial_box is not None and not model.initial_box.contains(x):
            raise InvalidDataError(f"x0={x.tolist()} lies outside X0")
    if model.n_y and model.measurement_box is None:
        raise ConfigurationError(f"Model '{model.name}' has no measurement box V")
    states = [x]
    outputs = []
    for k in range(1, K + 1):
        noise = draw_noise(
            model,
            stream.at(epoch=k, purpose=SamplePurpose.TRUTH_PROCESS_NOISE),
            1,
        )
        step = model.propagate(x[None, :], noise)
        step.raise_for_errors(step=k)
        x = step.values[0]
        states.append(x)
        if model.n_y:
            measured = model.measure(x[None, :])
            measured.raise_for_errors(step=k)
            assert model.measurement_box is not None
            v = sample_box(
                model.measurement_box,
                stream.at(epoch=k, purpose=SamplePurpose.TRUTH_MEASUREMENT_NOISE),
                1,
            )[0]
            outputs.append(measured.values[0] + v)
    Y = np.array(outputs) if outputs else np.zeros((K, 0))
    return np.array(states), Y


def predict(
    A: NasSet,
    model: Model,
    N: int,
    stream: SampleStream,
    family: SetFamily | str = SetFamily.ELLIPSOID,
    workers: int = 1,
) -> NasSet:
    """A_{k+1} from one randomized prediction step."""
    record = FilterService(family, workers).predict(A, model, N, stream)
    assert record.fitted is not None
    return record.fitted


def predict_m_steps(
    A: NasSet,
    model: Model,
    N: int,
    m_steps: int,
    stream: SampleStream,
    family: SetFamily | str = SetFamily.ELLIPSOID,
    workers: int = 1,
) -> NasSet:
    """A_{k+m} from one m-step prediction."""
    record = FilterService(family, workers).predict_m_steps(
        A, model, N, m_steps, stream
    )
    assert record.fitted is not None
    return record.fitted


def rpcf_step(
    A: NasSet,
    y: Any,
    model: Model,
    config: FilterConfig,
    stream: SampleStream,
    N: int | None = None,
) -> tuple[NasSet, StepRecord]:
    """One prediction-correction step; N defaults to the config's rule."""
    N = N if N is not None else config.certificate(model.n).sample_size
    service = FilterService(config.family, config.workers)
    record = service.rpcf_step(A, y, model, config, stream, N)
    assert record.fitted is not None
    return record.fitted, record


def run_filter(
    model: Model,
    initial: NasSet,
    measurements: Any,
    config: FilterConfig,
    seed: int,
) -> FilterTrace:
    """Full prediction-correction run."""
    service = FilterService(config.family, config.workers)
    return service.run(model, initial, measurements, config, seed)
