"""
Command-line interface for the image-set-filter package.

This module provides the commands that turn models and configuration files
into reproducible runs: sample-size bounds, image-set approximations,
prediction-correction filter runs and manifest replays.
"""

import functools
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, NoReturn

import click
from click import Group

from .constants import ExitCode
from .data import dumps
from .exceptions import (
    ConfigurationError,
    DataLoadError,
    ImageSetFilterError,
    PointsOutsideDomainError,
    ValidationError,
)
from .fitting import MultiplierPolicy
from .pipeline import ExperimentPipeline, compute_bounds
from .scenario import SetFamily
from .settings import Settings, load_settings

# Failures caused by the inputs; everything else is numerical
_CONFIGURATION_ERRORS = (
    ConfigurationError,
    DataLoadError,
    ValidationError,
    PointsOutsideDomainError,
)

_FAMILIES = [f.value for f in SetFamily]
_PROBABILITY = click.FloatRange(0.0, 1.0, min_open=True, max_open=True)


# Custom command class to show full help text
class CustomGroup(Group):
    """Custom Click group that shows full command help without truncation."""

    def format_commands(self, ctx, formatter):
        """Format commands with full descriptions."""
        commands = []
        for subcommand in self.list_commands(ctx):
            cmd = self.get_command(ctx, subcommand)
            if cmd is None:
                continue
            help_text = cmd.get_short_help_str(limit=999)
            commands.append((subcommand, help_text))

        if commands:
            with formatter.section("Commands"):
                formatter.write_dl(commands)


# Configure basic logging
def configure_logging(verbose: bool = False) -> None:
    """Configure logging with appropriate level."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )


def exit_code_for(error: BaseException) -> ExitCode:
    """Exit code of a failed command."""
    if isinstance(error, _CONFIGURATION_ERRORS):
        return ExitCode.CONFIGURATION_ERROR
    return ExitCode.NUMERICAL_FAILURE


def _fail(error: ImageSetFilterError) -> NoReturn:
    logger = logging.getLogger(__name__)
    logger.error(f"{type(error).__name__}: {error}")
    click.echo(f"Error: {error}", err=True)
    sys.exit(int(exit_code_for(error)))


def common_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Add --settings and --verbose/--quiet to a command."""

    @click.option(
        "--settings",
        "settings_file",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        help="YAML file with run defaults (seed, workers, tolerances)",
    )
    @click.option(
        "--verbose/--quiet",
        default=False,
        help="Enable verbose output",
    )
    @functools.wraps(command)
    def wrapper(settings_file: Path | None, verbose: bool, **kwargs: Any) -> Any:
        configure_logging(verbose)
        try:
            settings = load_settings(settings_file)
        except Exception as e:
            _fail(ConfigurationError(f"Cannot load settings: {e}"))
        return command(settings=settings, **kwargs)

    return wrapper


def _recorded(**arguments: Any) -> dict[str, Any]:
    """CLI arguments as stored in a manifest."""
    return {
        key: str(value) if isinstance(value, Path) else value
        for key, value in arguments.items()
    }


@click.group(cls=CustomGroup, context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Probabilistic image-set approximation and randomized set-based filtering.

    Quick start: image-set-filter approximate --builtin sysF --out result.json
    """


@main.command()
@click.option("--eps", type=_PROBABILITY, required=True, help="Violation level")
@click.option("--delta", type=_PROBABILITY, required=True, help="Confidence")
@click.option(
    "--family",
    type=click.Choice(_FAMILIES, case_sensitive=False),
    default=SetFamily.ELLIPSOID.value,
    show_default=True,
    help="Set family",
)
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Dimension")
@click.option("--degree", type=click.IntRange(min=1), help="PAS degree")
@common_options
def bounds(
    settings: Settings,
    eps: float,
    delta: float,
    family: str,
    n: int,
    degree: int | None,
) -> None:
    """
    Print the design dimension and both sample-size rules as JSON.
    """
    try:
        result = compute_bounds(eps, delta, family, n, degree)
    except ImageSetFilterError as e:
        _fail(e)
    click.echo(dumps(result), nl=False)


@main.command()
@click.option(
    "--model",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Model file (JSON or YAML)",
)
@click.option("--builtin", help="Built-in model name (sysF, abrc08, identity)")
@click.option(
    "--family",
    type=click.Choice(_FAMILIES, case_sensitive=False),
    default=SetFamily.ELLIPSOID.value,
    show_default=True,
    help="Set family",
)
@click.option("--eps", type=_PROBABILITY, default=0.1, show_default=True)
@click.option("--delta", type=_PROBABILITY, default=1e-3, show_default=True)
@click.option("--degree", type=click.IntRange(min=1), help="PAS degree (default 4)")
@click.option("--box", help='PAS domain "l1,u1;l2,u2" or "auto"')
@click.option(
    "--N", "n_samples", type=click.IntRange(min=1), help="Fixed sample size"
)
@click.option("--seed", type=click.IntRange(min=0), help="Root seed")
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Result JSON (default <output_dir>/result.json)",
)
@click.option(
    "--cloud",
    type=click.Path(dir_okay=False, path_type=Path),
    help="CSV of the mapped sample cloud",
)
@click.option(
    "--validate",
    type=click.IntRange(min=1),
    help="Estimate the violation probability from M fresh samples",
)
@click.option("--workers", type=click.IntRange(min=1), help="Worker threads")
@click.option(
    "--multipliers",
    type=click.Choice([p.value for p in MultiplierPolicy]),
    default=MultiplierPolicy.MATCHED.value,
    show_default=True,
    help="PAS face multiplier degrees",
)
@common_options
def approximate(settings: Settings, out: Path | None, **options: Any) -> None:
    """
    Approximate the image of X x W under the model dynamics.

    Writes the fitted set with its scenario certificate and solver report,
    the optional sample cloud and a replay manifest.
    """
    out = out or settings.output_dir / "result.json"
    arguments = _recorded(out=out, **options)
    try:
        document = ExperimentPipeline(settings).run_approximate(
            **arguments, arguments=arguments
        )
    except ImageSetFilterError as e:
        _fail(e)

    certificate = document["certificate"]
    click.echo("\n" + "=" * 50)
    click.echo("APPROXIMATION COMPLETE")
    click.echo("=" * 50)
    click.echo(f"\nFamily: {document['family']}")
    click.echo(f"Samples: {document['sample_size']}")
    click.echo(f"Epsilon: {certificate['epsilon']:.6g}")
    if "log_volume" in document:
        click.echo(f"Log-volume: {document['log_volume']:.6f}")
    if "volume_estimate" in document:
        estimate = document["volume_estimate"]
        click.echo(
            f"Volume estimate: {estimate['value']:.6g} "
            f"(+/- {estimate['standard_error']:.2g})"
        )
    if "validation" in document:
        click.echo(f"Empirical violation: {document['validation']['fraction']:.6g}")
    click.echo(f"\nResult saved to: {out}")


@main.command(name="filter")
@click.option(
    "--model",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Model file (JSON or YAML)",
)
@click.option("--builtin", help="Built-in model name (sysF, abrc08, identity)")
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Filter configuration (JSON or YAML)",
)
@click.option("--seed", type=click.IntRange(min=0), help="Root seed")
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Trace CSV (default <output_dir>/trace.csv)",
)
@click.option(
    "--summary",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Summary JSON",
)
@click.option(
    "--measurements",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Measurement CSV (columns y1..)",
)
@click.option(
    "--simulate/--no-simulate",
    default=False,
    help="Simulate the true trajectory and its measurements first",
)
@click.option(
    "--continue-on-inconsistent/--stop-on-inconsistent",
    default=False,
    help="Fall back to the prediction when a measurement rejects every sample",
)
@click.option("--workers", type=click.IntRange(min=1), help="Worker threads")
@common_options
def filter_command(settings: Settings, out: Path | None, **options: Any) -> None:
    """
    Run the randomized prediction-correction filter.

    Writes the per-step trace, the optional summary, the simulated truth and
    measurements when simulating, and a replay manifest.
    """
    out = out or settings.output_dir / "trace.csv"
    arguments = _recorded(out=out, **options)
    try:
        document = ExperimentPipeline(settings).run_filter(
            **arguments, arguments=arguments
        )
    except ImageSetFilterError as e:
        _fail(e)

    click.echo("\n" + "=" * 50)
    click.echo("FILTER COMPLETE")
    click.echo("=" * 50)
    click.echo(f"\nSteps: {document['steps']}")
    click.echo(f"Final log-volume: {document['final_log_volume']:.6f}")
    if document.get("containment_frequency") is not None:
        click.echo(f"Containment frequency: {document['containment_frequency']:.3f}")
    click.echo(f"\nTrace saved to: {out}")


@main.command()
@click.argument(
    "manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
@click.option(
    "--output-dir",
    type=click.Path(file_okay=False, path_type=Path),
    help="Write the replayed outputs here instead of their recorded paths",
)
@click.option("--workers", type=click.IntRange(min=1), help="Worker threads")
@common_options
def replay(
    settings: Settings,
    manifest: Path,
    output_dir: Path | None,
    workers: int | None,
) -> None:
    """
    Re-run a command from its manifest.
    """
    try:
        ExperimentPipeline(settings).replay(manifest, output_dir, workers)
    except ImageSetFilterError as e:
        _fail(e)
    click.echo(f"Replayed {manifest}")


if __name__ == "__main__":
    main()
