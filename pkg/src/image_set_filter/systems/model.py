"""
Nonlinear discrete-time system models.

A Model holds the dynamics x+ = f(x, w), the measurement y = g(x) + v and the
boxes the state, process noise and measurement noise range over. Expressions
are parsed once; evaluation is vectorized over samples.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from ..exceptions import DimensionMismatchError, ModelDomainError, ModelError
from ..geometry import Box, as_points
from .expressions import Expression, evaluate, parse_expression, to_text, variables

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BatchEvaluation:
    """
    Result of evaluating a vector expression over a batch.

    Attributes:
        values: (N, k) outputs, NaN rows where evaluation failed
        valid: (N,) mask of samples evaluated without domain errors
        component: Name of the first failing component ("f1", "g2", ...)
        subexpression: Text of the first failing sub-expression
        sample_index: First failing sample
    """

    values: np.ndarray
    valid: np.ndarray
    component: str | None = None
    subexpression: str | None = None
    sample_index: int | None = None

    @property
    def n_errors(self) -> int:
        return int(np.sum(~self.valid))

    def raise_for_errors(self, step: int | None = None) -> None:
        """Raise ModelDomainError if any sample failed."""
        if self.component is None:
            return
        where = f" at step {step}" if step is not None else ""
        raise ModelDomainError(
            f"Domain error in {self.component}{where}: {self.subexpression} "
            f"(sample {self.sample_index}, {self.n_errors} failing)",
            component=self.component,
            subexpression=self.subexpression,
            sample_index=self.sample_index,
            step=step,
        )


def _vector_eval(
    prefix: str,
    expressions: tuple[Expression, ...],
    env: dict[str, np.ndarray],
    size: int,
) -> BatchEvaluation:
    columns = []
    valid = np.ones(size, dtype=bool)
    component = subexpression = None
    sample_index = None
    for i, expression in enumerate(expressions):
        result = evaluate(expression, env, size)
        columns.append(result.values)
        if component is None and not result.ok:
            component = f"{prefix}{i + 1}"
            culprit = result.culprit if result.culprit is not None else expression
            subexpression = to_text(culprit)
            sample_index = int(np.flatnonzero(~result.valid)[0])
        valid &= result.valid
    values = np.column_stack(columns) if columns else np.zeros((size, 0))
    return BatchEvaluation(values, valid, component, subexpression, sample_index)


@dataclass(frozen=True, eq=False)
class Model:
    """
    System x+ = f(x, w), y = g(x) + v with its uncertainty boxes.

    Attributes:
        name: Label used in logs and artifacts
        n: State dimension
        n_w: Process noise dimension
        n_y: Measurement dimension (0 when the system is not measured)
        dynamics: Source text of f, one expression per state
        measurement: Source text of g, one expression per output
        initial_box: State box X (or the initial set X0)
        noise_box: Process noise box W
        measurement_box: Measurement noise box V
    """

    name: str
    n: int
    n_w: int
    n_y: int
    dynamics: tuple[str, ...]
    measurement: tuple[str, ...] = ()
    initial_box: Box | None = None
    noise_box: Box | None = None
    measurement_box: Box | None = None
    _f: tuple[Expression, ...] = field(init=False, repr=False)
    _g: tuple[Expression, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dynamics", tuple(self.dynamics))
        object.__setattr__(self, "measurement", tuple(self.measurement))
        if self.n < 1 or self.n_w < 0 or self.n_y < 0:
            raise ModelError(
                f"Invalid dimensions n={self.n}, n_w={self.n_w}, n_y={self.n_y}"
            )
        if len(self.dynamics) != self.n:
            raise ModelError(
                f"Model '{self.name}' declares n={self.n} but has "
                f"{len(self.dynamics)} dynamics expressions"
            )
        if len(self.measurement) != self.n_y:
            raise ModelError(
                f"Model '{self.name}' declares n_y={self.n_y} but has "
                f"{len(self.measurement)} measurement expressions"
            )
        f = tuple(parse_expression(text) for text in self.dynamics)
        g = tuple(parse_expression(text) for text in self.measurement)
        self._check_variables("f", f, allow_noise=True)
        self._check_variables("g", g, allow_noise=False)
        object.__setattr__(self, "_f", f)
        object.__setattr__(self, "_g", g)
        for label, box, dim in (
            ("initial", self.initial_box, self.n),
            ("noise", self.noise_box, self.n_w),
            ("measurement noise", self.measurement_box, self.n_y),
        ):
            if box is not None and box.dimension != dim:
                raise DimensionMismatchError(
                    f"{label} box has dimension {box.dimension}, expected {dim}"
                )
        if self.n_w > 0 and self.noise_box is None:
            raise ModelError(f"Model '{self.name}' has noise but no noise box W")
        self._check_centers()

    def _check_variables(
        self, prefix: str, expressions: tuple[Expression, ...], allow_noise: bool
    ) -> None:
        for i, expression in enumerate(expressions):
            for var in variables(expression):
                limit = self.n if var.kind == "x" else (self.n_w if allow_noise else 0)
                if var.index > limit:
                    raise ModelError(
                        f"{prefix}{i + 1} of model '{self.name}' references "
                        f"{var.name}, outside the declared dimensions"
                    )

    def _check_centers(self) -> None:
        if self.initial_box is None:
            return
        x = self.initial_box.center
        w = self.noise_box.center if self.noise_box is not None else np.zeros(0)
        result = self.propagate(x[None, :], w[None, :])
        if not result.valid[0] or (self.n_y and not self.measure(x[None, :]).valid[0]):
            raise ModelError(
                f"Model '{self.name}' is not finite at the center of its boxes"
            )

    def _env(
        self, states: np.ndarray, noise: np.ndarray | None
    ) -> dict[str, np.ndarray]:
        env = {f"x{j + 1}": states[:, j] for j in range(self.n)}
        if noise is not None:
            env.update({f"w{j + 1}": noise[:, j] for j in range(self.n_w)})
        return env

    def propagate(self, states: Any, noise: Any = None) -> BatchEvaluation:
        """
        Evaluate f over a batch of (x, w) pairs.

        Args:
            states: (N, n) states
            noise: (N, n_w) noise samples; may be omitted when n_w = 0

        Returns:
            BatchEvaluation of the successor states
        """
        X, _ = as_points(states, self.n)
        if self.n_w:
            if noise is None:
                raise DimensionMismatchError(f"Model '{self.name}' needs noise samples")
            Wn, _ = as_points(noise, self.n_w)
            if Wn.shape[0] != X.shape[0]:
                raise DimensionMismatchError(
                    f"{X.shape[0]} states but {Wn.shape[0]} noise samples"
                )
        else:
            Wn = None
        return _vector_eval("f", self._f, self._env(X, Wn), X.shape[0])

    def measure(self, states: Any) -> BatchEvaluation:
        """Evaluate the noise-free measurement g over a batch of states."""
        X, _ = as_points(states, self.n)
        return _vector_eval("g", self._g, self._env(X, None), X.shape[0])

    def eval_dynamics(self, x: Any, w: Any = None) -> np.ndarray:
        """
        x+ = f(x, w) for a single point.

        Raises:
            ModelDomainError: Naming the failing component and sub-expression
        """
        x = np.asarray(x, dtype=float).reshape(1, -1)
        noise = None if w is None else np.asarray(w, dtype=float).reshape(1, -1)
        result = self.propagate(x, noise)
        result.raise_for_errors()
        return result.values[0]

    def eval_measurement(self, x: Any) -> np.ndarray:
        """
        g(x) for a single point.

        Raises:
            ModelDomainError: Naming the failing component and sub-expression
        """
        result = self.measure(np.asarray(x, dtype=float).reshape(1, -1))
        result.raise_for_errors()
        return result.values[0]

    def with_noise_boxes(
        self, noise: Box | None = None, measurement: Box | None = None
    ) -> "Model":
        """Copy with the process and/or measurement noise boxes replaced."""
        return replace(
            self,
            noise_box=self.noise_box if noise is None else noise,
            measurement_box=(
                self.measurement_box if measurement is None else measurement
            ),
        )

    def with_initial_box(self, box: Box) -> "Model":
        return replace(self, initial_box=box)

    def to_dict(self) -> dict[str, Any]:
        """Model file representation."""
        data: dict[str, Any] = {
            "name": self.name,
            "n": self.n,
            "n_w": self.n_w,
            "n_y": self.n_y,
            "dynamics": list(self.dynamics),
            "measurement": list(self.measurement),
        }
        for key, box in (
            ("X0", self.initial_box),
            ("W", self.noise_box),
            ("V", self.measurement_box),
        ):
            if box is not None:
                data[key] = box.to_dict()
        return data


def eval_dynamics(m: Model, x: Any, w: Any = None) -> np.ndarray:
    return m.eval_dynamics(x, w)


def eval_measurement(m: Model, x: Any) -> np.ndarray:
    return m.eval_measurement(x)
