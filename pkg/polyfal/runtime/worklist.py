"""Worklists of points processed in rounds."""

from __future__ import annotations

import gc
import logging
import math
import threading
from enum import Enum

import numpy as np
from attrs import define, field
from attrs.converters import optional as optional_converter
from attrs.validators import ge, instance_of, optional

from polyfal.exceptions import DeltaError

_logger = logging.getLogger(__name__)


class WorklistKind(Enum):
    """Scheduling policies of worklists."""

    FIFO = "fifo"
    """Every round processes all points pushed in the previous round."""

    DELTA = "delta"
    """Every round processes the lowest nonempty bucket of keys."""


@define(frozen=True)
class WorklistMode:
    """The scheduling policy and bucket width used for all worklists of a run."""

    kind: WorklistKind = field(default=WorklistKind.FIFO, converter=WorklistKind)

    delta: float | None = field(
        default=None,
        converter=optional_converter(float),
        validator=optional(instance_of(float)),
    )
    """The bucket width. ``None`` selects the average edge weight, at least 1."""

    @delta.validator
    def _validate_delta(self, _, value: float | None) -> None:  # noqa: DOC101, DOC103
        """Validate that the bucket width is positive.

        Raises:
            DeltaError: If the bucket width is zero or negative.
        """
        if value is not None and not value > 0:
            raise DeltaError(f"The bucket width must be positive. Given: {value}.")


@define(eq=False)
class Worklist:
    """A bag of points filled during one round and drained in the next.

    Pushes are thread-safe. A point pushed several times before its round starts
    is processed once.

    Example:
        >>> wl = Worklist(4, WorklistMode("delta", 2))
        >>> wl.add(1, 5); wl.add(2, 3); wl.add(3, 0)
        >>> wl.start_round(), wl.start_round()
        ([3], [2])
    """

    n: int = field(validator=[instance_of(int), ge(0)])
    mode: WorklistMode = field(factory=WorklistMode)
    delta: float = field(default=1.0, converter=float)
    """The effective bucket width of delta scheduling."""

    rounds: int = field(default=0, init=False)
    bucket_trace: list[int] = field(factory=list, init=False)
    """The bucket index of every delta round, in processing order."""

    _pending: dict[int, dict[int, None]] = field(factory=dict, init=False, repr=False)
    _guard: threading.Lock = field(factory=threading.Lock, init=False, repr=False)

    @delta.validator
    def _validate_delta(self, _, value: float) -> None:  # noqa: DOC101, DOC103
        """Validate that the bucket width is positive.

        Raises:
            DeltaError: If the bucket width is zero or negative.
        """
        if not value > 0:
            raise DeltaError(f"The bucket width must be positive. Given: {value}.")

    def _bucket(self, key: float) -> int:
        if self.mode.kind is WorklistKind.FIFO:
            return 0
        return max(0, math.floor(key / self.delta))

    def add(self, point: int, key: float = 0) -> None:
        """Push a point, keyed by ``key`` under delta scheduling."""
        bucket = self._bucket(key)
        with self._guard:
            self._pending.setdefault(bucket, {})[point] = None

    def size(self) -> int:
        """The number of points waiting for a future round."""
        with self._guard:
            return len(set().union(*self._pending.values()))

    def items(self) -> list[int]:
        """The waiting points in ascending order."""
        with self._guard:
            return sorted(set().union(*self._pending.values()))

    def start_round(self) -> list[int]:
        """Remove and return the points of the next round."""
        with self._guard:
            if not self._pending:
                return []
            bucket = min(self._pending)
            items = list(self._pending.pop(bucket))
            # A point may also wait in a higher bucket under an outdated key
            for other in self._pending.values():
                for point in items:
                    other.pop(point, None)
            self._pending = {b: p for b, p in self._pending.items() if p}
        self.rounds += 1
        if self.mode.kind is WorklistKind.DELTA:
            self.bucket_trace.append(bucket)
        _logger.debug("Worklist round %d: %d points", self.rounds, len(items))
        return items


def default_delta(weights: object) -> float:
    """The bucket width used when none is configured: the mean weight, at least 1.

    Example:
        >>> default_delta([1, 2, 6])
        3.0
    """
    values = np.asarray(weights, dtype=float)
    return max(1.0, float(values.mean())) if values.size else 1.0


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
