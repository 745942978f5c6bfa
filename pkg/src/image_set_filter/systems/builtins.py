"""
Built-in example systems.

- sysF: two-state map with trigonometric and logarithmic terms, state box
  [0, 1]^2 and process noise in [-0.2, 0.2]^2
- abrc08: polynomial-exponential two-state system measured through
  y = x1 + x2 + v, with |w|_inf <= 0.1, |v| <= 0.2 and X0 = [-3, 3]^2
- identity: x+ = x on [0, 1]^2, without noise
"""

from collections.abc import Callable

from ..exceptions import ConfigurationError
from ..geometry import Box
from .model import Model


def sys_f() -> Model:
    return Model(
        name="sysF",
        n=2,
        n_w=2,
        n_y=0,
        dynamics=(
            "sin(x2) + 3*cos(x2) + w1",
            "3*x1 - 20*log(1 + x2) + w2",
        ),
        initial_box=Box.from_pairs([[0.0, 1.0], [0.0, 1.0]]),
        noise_box=Box.from_pairs([[-0.2, 0.2], [-0.2, 0.2]]),
    )


def abrc08() -> Model:
    return Model(
        name="abrc08",
        n=2,
        n_w=2,
        n_y=1,
        dynamics=(
            "-0.7*x2 + 0.1*x2^2 + 0.1*x1*x2 + 0.1*exp(x1) + w1",
            "x1 + x2 - 0.1*x1^2 + 0.2*x1*x2 + w2",
        ),
        measurement=("x1 + x2",),
        initial_box=Box.from_pairs([[-3.0, 3.0], [-3.0, 3.0]]),
        noise_box=Box.from_pairs([[-0.1, 0.1], [-0.1, 0.1]]),
        measurement_box=Box.from_pairs([[-0.2, 0.2]]),
    )


def identity() -> Model:
    return Model(
        name="identity",
        n=2,
        n_w=0,
        n_y=0,
        dynamics=("x1", "x2"),
        initial_box=Box.from_pairs([[0.0, 1.0], [0.0, 1.0]]),
    )


BUILTIN_MODELS: dict[str, Callable[[], Model]] = {
    "sysF": sys_f,
    "abrc08": abrc08,
    "identity": identity,
}


def builtin_model(name: str) -> Model:
    """
    Look up a built-in model by name (case-insensitive).

    Raises:
        ConfigurationError: If no built-in has that name
    """
    for key, factory in BUILTIN_MODELS.items():
        if key.lower() == name.strip().lower():
            return factory()
    raise ConfigurationError(
        f"Unknown built-in model '{name}'; available: {', '.join(BUILTIN_MODELS)}"
    )
