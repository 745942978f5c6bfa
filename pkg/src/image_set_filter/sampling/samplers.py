"""
Uniform samplers over boxes, p-balls, NAS sets and PAS sets.

All samplers draw chunk by chunk from counter-based substreams. p = 2 balls use
Gaussian directions with radius U^(1/n); p = inf balls are cubes; p = 1 balls
and PAS sets use rejection, which is practical only in low dimension (the
acceptance rate of the p = 1 ball is 1/n!).
"""

import logging
from collections.abc import Callable
from typing import Protocol

import numpy as np

from ..constants import SamplingDefaults
from ..exceptions import AcceptanceRateError, SamplingError
from ..geometry import ApproximatingSet, Box, NasSet, NormType, PasSet
from .streams import SampleStream, chunk_sizes, run_ordered

logger = logging.getLogger(__name__)


class SetSampler(Protocol):
    """Extension point for user-supplied samplers."""

    def __call__(
        self, region: ApproximatingSet | Box, stream: SampleStream, count: int
    ) -> np.ndarray:
        """Return a (count, n) array of samples of region."""
        ...


def _check_count(count: int) -> None:
    if count < 1:
        raise SamplingError(f"Sample count must be at least 1, got {count}")


def _chunked(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    stream: SampleStream,
    count: int,
    workers: int,
) -> np.ndarray:
    sizes = chunk_sizes(count)
    parts = run_ordered(
        lambda c: draw(stream.generator(c), sizes[c]), range(len(sizes)), workers
    )
    return np.concatenate(parts, axis=0)


def rejection_sample(
    propose: Callable[[np.random.Generator, int], np.ndarray],
    accept: Callable[[np.ndarray], np.ndarray],
    stream: SampleStream,
    count: int,
    max_draws: int = SamplingDefaults.MAX_REJECTION_DRAWS,
    workers: int = 1,
) -> tuple[np.ndarray, int]:
    """
    Draw proposals chunk by chunk and keep the accepted ones.

    Args:
        propose: Draws a batch of candidates from a generator
        accept: Boolean mask of accepted candidates
        stream: Substream key
        count: Number of points to accept
        max_draws: Proposal budget
        workers: Chunks evaluated concurrently

    Returns:
        Tuple of the (count, n) accepted points and the number of proposals
        consumed up to and including the last accepted one

    Raises:
        AcceptanceRateError: If the budget runs out first
    """
    _check_count(count)
    chunk_size = SamplingDefaults.CHUNK_SIZE
    batch = max(1, workers)
    accepted: list[np.ndarray] = []
    n_accepted = 0
    draws = 0
    next_chunk = 0

    def evaluate(chunk: int) -> tuple[np.ndarray, np.ndarray]:
        candidates = propose(stream.generator(chunk), chunk_size)
        return candidates, np.asarray(accept(candidates), dtype=bool)

    while True:
        ids = range(next_chunk, next_chunk + batch)
        next_chunk += batch
        for candidates, mask in run_ordered(evaluate, ids, workers):
            remaining = max_draws - draws
            candidates, mask = candidates[:remaining], mask[:remaining]
            need = count - n_accepted
            hits = np.flatnonzero(mask)
            if hits.size >= need:
                accepted.append(candidates[hits[:need]])
                draws += int(hits[need - 1]) + 1
                return np.concatenate(accepted, axis=0), draws
            accepted.append(candidates[hits])
            n_accepted += hits.size
            draws += candidates.shape[0]
            if draws >= max_draws:
                raise AcceptanceRateError(
                    f"Accepted {n_accepted} of {count} requested points after "
                    f"{draws} draws"
                )


def sample_box(
    box: Box, stream: SampleStream, count: int, workers: int = 1
) -> np.ndarray:
    """Uniform samples on a box; zero-width coordinates are constant."""
    _check_count(count)
    widths = box.widths

    def draw(gen: np.random.Generator, m: int) -> np.ndarray:
        return box.lower + widths * gen.random((m, box.dimension))

    return _chunked(draw, stream, count, workers)


def sample_ball(
    n: int, norm: NormType, stream: SampleStream, count: int, workers: int = 1
) -> np.ndarray:
    """Uniform samples on the unit p-ball in n dimensions."""
    _check_count(count)
    norm = NormType.parse(norm)

    def cube(gen: np.random.Generator, m: int) -> np.ndarray:
        return gen.uniform(-1.0, 1.0, size=(m, n))

    if norm is NormType.INF:
        return _chunked(cube, stream, count, workers)

    if norm is NormType.TWO:

        def disc(gen: np.random.Generator, m: int) -> np.ndarray:
            directions = gen.standard_normal((m, n))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            radii = gen.random(m) ** (1.0 / n)
            return directions * radii[:, None]

        return _chunked(disc, stream, count, workers)

    points, _ = rejection_sample(
        cube,
        lambda z: np.sum(np.abs(z), axis=1) <= 1.0,
        stream,
        count,
        workers=workers,
    )
    return points


def sample_nas(
    A: NasSet, stream: SampleStream, count: int, workers: int = 1
) -> np.ndarray:
    """Uniform samples on a NasSet via x = c + P^-1 z, z uniform in the p-ball."""
    z = sample_ball(A.dimension, A.norm, stream, count, workers)
    return A.center + z @ A.inverse_shape.T


def sample_pas(
    U: PasSet,
    stream: SampleStream,
    count: int,
    max_attempts: int = SamplingDefaults.MAX_REJECTION_DRAWS,
    workers: int = 1,
) -> np.ndarray:
    """
    Uniform samples on a PasSet by rejection from its box.

    Raises:
        AcceptanceRateError: If fewer than count points are accepted within
            max_attempts draws
    """
    points, draws = rejection_sample(
        lambda gen, m: U.box.lower + U.box.widths * gen.random((m, U.dimension)),
        lambda x: U.basis.evaluate(x) @ U.coefficients >= 1.0,
        stream,
        count,
        max_draws=max_attempts,
        workers=workers,
    )
    logger.debug(f"PAS rejection sampling accepted {count} of {draws} draws")
    return points


def sample_set(
    A: ApproximatingSet | Box,
    stream: SampleStream,
    count: int,
    workers: int = 1,
    sampler: SetSampler | None = None,
) -> np.ndarray:
    """
    Dispatch to the sampler of the set family.

    A user-supplied sampler replaces the uniform ones; its output must be a
    (count, n) array of finite points.

    Raises:
        SamplingError: If no sampler fits A or a custom sampler returns a
            malformed array
    """
    if sampler is not None:
        _check_count(count)
        points = np.asarray(sampler(A, stream, count), dtype=float)
        if points.shape != (count, A.dimension) or not np.all(np.isfinite(points)):
            raise SamplingError(
                f"Custom sampler returned shape {points.shape}, expected "
                f"({count}, {A.dimension}) finite points"
            )
        return points
    if isinstance(A, Box):
        return sample_box(A, stream, count, workers)
    if isinstance(A, NasSet):
        return sample_nas(A, stream, count, workers)
    if isinstance(A, PasSet):
        return sample_pas(A, stream, count, workers=workers)
    raise SamplingError(f"No sampler for {type(A).__name__}")
