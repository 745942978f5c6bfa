"""
Counter-based random substreams.

A stream is a value: (seed, epoch, index, purpose). Every chunk of work draws
from its own Philox generator keyed by the stream and the chunk number, so a
result does not depend on evaluation order or on how many workers ran it.
"""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import TypeVar

import numpy as np

from ..constants import SamplingDefaults
from ..exceptions import ConfigurationError

logger = logging.getLogger(__name__)

T = TypeVar("T")

_MAX_SEED = 2**64


class SamplePurpose(IntEnum):
    """Purpose tags separating the random draws of one run."""

    STATE = 0
    PROCESS_NOISE = 1
    MEASUREMENT_NOISE = 2
    VALIDATION_STATE = 3
    VALIDATION_NOISE = 4
    TRUTH_INITIAL_STATE = 5
    TRUTH_PROCESS_NOISE = 6
    TRUTH_MEASUREMENT_NOISE = 7
    VOLUME_ESTIMATE = 8


@dataclass(frozen=True)
class SampleStream:
    """Key of a deterministic substream."""

    seed: int
    epoch: int = 0
    index: int = 0
    purpose: SamplePurpose = SamplePurpose.STATE

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < _MAX_SEED:
            raise ConfigurationError(
                f"Seed must be a 64-bit unsigned integer: {self.seed}"
            )
        if self.epoch < 0 or self.index < 0:
            raise ConfigurationError("Stream epoch and index must be nonnegative")
        object.__setattr__(self, "purpose", SamplePurpose(self.purpose))

    def at(
        self,
        epoch: int | None = None,
        index: int | None = None,
        purpose: SamplePurpose | None = None,
    ) -> "SampleStream":
        """Same seed, different key fields."""
        return replace(
            self,
            epoch=self.epoch if epoch is None else epoch,
            index=self.index if index is None else index,
            purpose=self.purpose if purpose is None else purpose,
        )

    def generator(self, chunk: int = 0) -> np.random.Generator:
        """Philox generator for one chunk of this stream."""
        sequence = np.random.SeedSequence(
            entropy=int(self.seed),
            spawn_key=(int(self.epoch), int(self.index), int(self.purpose), chunk),
        )
        return np.random.Generator(np.random.Philox(sequence))


def run_ordered(
    task: Callable[[int], T], items: Sequence[int], workers: int = 1
) -> list[T]:
    """Apply task to items, optionally on a thread pool, keeping input order."""
    if workers <= 1 or len(items) <= 1:
        return [task(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, items))


def chunk_sizes(count: int, chunk_size: int = SamplingDefaults.CHUNK_SIZE) -> list[int]:
    """Split count into fixed-size chunks (the last one may be shorter)."""
    full, rest = divmod(count, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])
