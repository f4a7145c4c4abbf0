"""Keyed counter-based random streams.

Every trajectory owns independent Philox generators keyed by
``(seed, stream, trajectory_id)``. Draws depend only on that key and on the
position in the stream, never on which worker or in which order trajectories
run, so ensembles are reproducible under any thread budget.
"""

from typing import Dict, Tuple

import numpy as np

from holab.tools.logging_ import RngLogger, assert_and_log_error

logger = RngLogger().setup()

# Stream identifiers
NORMALS = 0
UNIFORMS = 1
MARKS = 2
# Second member of a two-sample experiment (e.g. paths started at y0)
NORMALS_Y = 3

_CHUNK = 256


def keyed_generator(seed: int, stream: int, trajectory_id: int) -> np.random.Generator:
    """Philox generator for one (seed, stream, trajectory) key.

    Args:
        seed: Non-negative run seed.
        stream: Stream identifier, one of the module constants.
        trajectory_id: Index of the trajectory within the ensemble.

    Returns:
        A fresh ``numpy.random.Generator``.

    """
    assert_and_log_error(
        logger, "error", seed >= 0, f"seed must be non-negative, got {seed}"
    )
    assert_and_log_error(
        logger,
        "error",
        trajectory_id >= 0,
        f"trajectory_id must be non-negative, got {trajectory_id}",
    )
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(trajectory_id)))
    return np.random.Generator(np.random.Philox(sequence))


class KeyedStream:
    """Buffered draws from a keyed generator.

    Draws are taken in fixed-shape chunks so the i-th vector returned is the
    same whatever the caller does in between.

    Args:
        seed: Run seed.
        stream: Stream identifier.
        trajectory_id: Trajectory index.
        dim: Length of each returned vector.
        kind: "normal" for standard normals, "uniform" for U(0, 1).

    """

    def __init__(
        self, seed: int, stream: int, trajectory_id: int, dim: int, kind: str = "normal"
    ):
        assert_and_log_error(
            logger, "error", kind in ("normal", "uniform"), f"unknown stream kind '{kind}'"
        )
        self.key: Tuple[int, int, int] = (seed, stream, trajectory_id)
        self.dim = dim
        self.kind = kind
        self._generator = keyed_generator(seed, stream, trajectory_id)
        self._buffer = np.empty((0, dim))
        self._position = 0
        self.draws = 0

    def _refill(self):
        if self.kind == "normal":
            self._buffer = self._generator.standard_normal((_CHUNK, self.dim))
        else:
            self._buffer = self._generator.random((_CHUNK, self.dim))
        self._position = 0

    def next(self) -> np.ndarray:
        """Next vector of length ``dim``."""
        if self._position >= self._buffer.shape[0]:
            self._refill()
        row = self._buffer[self._position]
        self._position += 1
        self.draws += 1
        return row


class MarkStream:
    """Exponential thresholds for jump clocks, one independent sequence per label.

    Used by the skew-product construction: the label is the root's position in
    the jump order, so shared marks give coupled constructions identical clocks.
    """

    def __init__(self, seed: int, trajectory_id: int, rate: float):
        self.seed = seed
        self.trajectory_id = trajectory_id
        self.rate = rate
        self._generators: Dict[int, np.random.Generator] = {}

    def next(self, label: int) -> float:
        """Next Exp(rate) mark for ``label``."""
        if label not in self._generators:
            sequence = np.random.SeedSequence(
                int(self.seed), spawn_key=(MARKS, int(self.trajectory_id), int(label))
            )
            self._generators[label] = np.random.Generator(np.random.Philox(sequence))
        return float(self._generators[label].exponential(1.0 / self.rate))
