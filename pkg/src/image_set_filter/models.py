"""
Data models for the image-set-filter package.

This module defines the validated records exchanged between the CLI, the
services and the artifact writer: model files, filter configuration, initial
sets, violation estimates and run manifests.
"""

from enum import Enum
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import FilterDefaults
from .exceptions import ConfigurationError
from .geometry import Box, NasSet, NormType
from .scenario import ScenarioCertificate, SetFamily, certify
from .systems import Model, builtin_model


class NPolicy(str, Enum):
    """How the per-step sample size is chosen."""

    FROM_BOUNDS = "from-bounds"
    FIXED = "fixed"


class StepStatus(str, Enum):
    """Outcome of one prediction-correction step."""

    OK = "ok"
    RESAMPLE_CAP = "resample-cap"
    INCONSISTENT = "inconsistent"
    DOMAIN_ERRORS = "domain-errors"


BoxLike = list[list[float]] | dict[str, list[float]]


def _to_box(value: BoxLike | None) -> Box | None:
    return None if value is None else Box.from_dict(value)


class ModelFile(BaseModel):
    """
    Model file contents.

    Either names a built-in system (optionally overriding its boxes) or spells
    out the dynamics and measurement expressions.
    """

    model_config = ConfigDict(extra="forbid")

    builtin: str | None = Field(None, description="Name of a built-in system")
    name: str = Field("custom", description="Label used in logs and artifacts")
    n: int | None = Field(None, ge=1, description="State dimension")
    n_w: int = Field(0, ge=0, description="Process noise dimension")
    n_y: int = Field(0, ge=0, description="Measurement dimension")
    dynamics: list[str] = Field(default_factory=list, description="f expressions")
    measurement: list[str] = Field(default_factory=list, description="g expressions")
    X0: BoxLike | None = Field(None, description="State box or initial set box")
    W: BoxLike | None = Field(None, description="Process noise box")
    V: BoxLike | None = Field(None, description="Measurement noise box")

    @model_validator(mode="after")
    def check_source(self) -> "ModelFile":
        """Require either a built-in name or a full expression list."""
        if self.builtin is None and not self.dynamics:
            raise ValueError("Model file needs either 'builtin' or 'dynamics'")
        if self.builtin is not None and self.dynamics:
            raise ValueError("'builtin' and 'dynamics' are mutually exclusive")
        return self

    def to_model(self) -> Model:
        """Build the Model, resolving built-in names."""
        if self.builtin is not None:
            model = builtin_model(self.builtin)
            model = model.with_noise_boxes(_to_box(self.W), _to_box(self.V))
            initial = _to_box(self.X0)
            return model if initial is None else model.with_initial_box(initial)
        return Model(
            name=self.name,
            n=self.n if self.n is not None else len(self.dynamics),
            n_w=self.n_w,
            n_y=self.n_y,
            dynamics=tuple(self.dynamics),
            measurement=tuple(self.measurement),
            initial_box=_to_box(self.X0),
            noise_box=_to_box(self.W),
            measurement_box=_to_box(self.V),
        )


class InitialSetConfig(BaseModel):
    """
    Initial set A_0 of the filter.

    kind "ellipsoid": disc/ball of `radius` (P = I / radius) or explicit `shape`;
    kind "box": the box `box` as a p = inf NasSet.
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["ellipsoid", "box"] = Field("ellipsoid", description="Set kind")
    center: list[float] | None = Field(None, description="Center c")
    radius: float | None = Field(None, gt=0.0, description="Ball radius")
    shape: list[list[float]] | None = Field(None, description="Shape matrix P")
    box: BoxLike | None = Field(None, description="Box for kind 'box'")

    @model_validator(mode="after")
    def check_kind(self) -> "InitialSetConfig":
        """Each kind needs its own fields."""
        if self.kind == "box":
            if self.box is None:
                raise ValueError("Initial set of kind 'box' needs 'box'")
        else:
            if self.center is None:
                raise ValueError("Ellipsoidal initial set needs 'center'")
            if (self.radius is None) == (self.shape is None):
                raise ValueError("Give exactly one of 'radius' and 'shape'")
        return self

    def to_set(self) -> NasSet:
        if self.kind == "box":
            return box_as_set(Box.from_dict(self.box))
        center = np.asarray(self.center, dtype=float)
        if self.radius is not None:
            shape = np.eye(center.size) / self.radius
        else:
            shape = np.asarray(self.shape, dtype=float)
        return NasSet(center=center, shape=shape, norm=NormType.TWO)


def box_as_set(box: Box) -> NasSet:
    """The box as {x : ||P(x - c)||_inf <= 1}."""
    if box.is_degenerate:
        raise ConfigurationError(f"Box {box!r} has no interior")
    return NasSet(
        center=box.center, shape=np.diag(2.0 / box.widths), norm=NormType.INF
    )


class FilterConfig(BaseModel):
    """Configuration of the randomized prediction-correction filter."""

    model_config = ConfigDict(extra="forbid")

    family: SetFamily = Field(SetFamily.ELLIPSOID, description="Fitted set family")
    epsilon: float = Field(FilterDefaults.EPSILON, gt=0.0, lt=1.0)
    delta: float = Field(FilterDefaults.DELTA, gt=0.0, lt=1.0)
    n_policy: NPolicy = Field(NPolicy.FROM_BOUNDS, description="Sample size rule")
    n_fixed: int | None = Field(None, ge=1, description="N for the fixed policy")
    rejection_tolerance: float = Field(
        FilterDefaults.REJECTION_TOLERANCE,
        ge=0.0,
        description="Slack of the measurement-noise box test",
    )
    resample: bool = Field(True, description="Redraw rejected samples")
    reuse: bool = Field(False, description="Carry survivors into the next step")
    max_resample_attempts: int = Field(
        FilterDefaults.MAX_RESAMPLE_ATTEMPTS, description="Resample rounds per step"
    )
    horizon: int | None = Field(None, ge=1, description="Number of steps K")
    measurement_noise_schedule: list[BoxLike] | None = Field(
        None, description="Per-step measurement noise boxes V_1..V_K"
    )
    initial_set: InitialSetConfig | None = Field(
        None, description="A_0; the model's X0 box when absent"
    )
    initial_state: list[float] | None = Field(
        None, description="True x_0 for simulated runs"
    )
    continue_on_inconsistent: bool = Field(
        False, description="Fall back to the prediction when all samples fail"
    )
    workers: int = Field(1, ge=1, description="Threads for sample propagation")

    @field_validator("family")
    @classmethod
    def check_family(cls, v: SetFamily) -> SetFamily:
        """Filtering runs on norm-based sets only."""
        if not v.is_nas:
            raise ValueError("The filter supports the norm-based families only")
        return v

    @field_validator("max_resample_attempts")
    @classmethod
    def check_attempts(cls, v: int) -> int:
        if v < 1:
            raise ValueError("max_resample_attempts must be at least 1")
        return v

    @model_validator(mode="after")
    def check_policy(self) -> "FilterConfig":
        """Exactly one sample size rule."""
        if self.n_policy is NPolicy.FIXED and self.n_fixed is None:
            raise ValueError("n_policy 'fixed' needs n_fixed")
        if self.n_policy is NPolicy.FROM_BOUNDS and self.n_fixed is not None:
            raise ValueError("n_fixed is only allowed with n_policy 'fixed'")
        if (
            self.horizon is not None
            and self.measurement_noise_schedule is not None
            and len(self.measurement_noise_schedule) < self.horizon
        ):
            raise ValueError("measurement_noise_schedule is shorter than the horizon")
        return self

    def certificate(self, n: int) -> ScenarioCertificate:
        """Unconditioned scenario certificate of a single fit."""
        return certify(
            self.family,
            n,
            self.epsilon,
            self.delta,
            sample_size=self.n_fixed if self.n_policy is NPolicy.FIXED else None,
        )

    def measurement_box(self, k: int, default: Box | None) -> Box | None:
        """V for the measurement y_k (k = 1..K)."""
        if self.measurement_noise_schedule is None:
            return default
        return Box.from_dict(self.measurement_noise_schedule[k - 1])


class ViolationEstimate(BaseModel):
    """Monte Carlo estimate of Viol(A)."""

    fraction: float = Field(..., ge=0.0, le=1.0, description="Violating fraction")
    standard_error: float = Field(
        ..., ge=0.0, description="Binomial standard error sqrt(p(1 - p) / M)"
    )
    samples: int = Field(..., ge=1, description="Fresh samples M")
    domain_errors: int = Field(0, ge=0, description="Samples counted as violations")


class RunManifest(BaseModel):
    """Everything needed to replay a command."""

    tool_version: str = Field(..., description="Package version")
    command: str = Field(..., description="CLI command name")
    arguments: dict[str, Any] = Field(..., description="CLI arguments as given")
    configuration: dict[str, Any] = Field(
        default_factory=dict, description="Resolved configuration"
    )
    seed: int | None = Field(None, description="Seed of the run")
    input_digests: dict[str, str] = Field(
        default_factory=dict, description="SHA-256 of every input file"
    )
    outputs: list[str] = Field(default_factory=list, description="Written files")
    timings: dict[str, float] = Field(
        default_factory=dict, description="Wall-clock seconds per phase"
    )
