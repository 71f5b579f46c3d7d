"""Results of executing a plan."""

from __future__ import annotations

import gc
from typing import Any

import numpy as np
import pandas as pd
from attrs import define, field

from polyfal.runtime.device import TransferRecord


@define(frozen=True)
class LaunchWork:
    """The work done by each worker during one kernel launch."""

    kernel: str
    vertices: tuple[int, ...]
    """Points processed per worker."""

    edges: tuple[int, ...]
    """Edges touched per worker, by edge iteration or neighbour visits."""

    cost: float

    @property
    def total_edges(self) -> int:
        return sum(self.edges)


@define(frozen=True)
class CostReport:
    """Simulated execution cost in cost units."""

    total: float
    """The simulated wall-clock time."""

    host: float
    """Cost of host statements."""

    kernels: dict[str, float] = field(factory=dict)
    """Summed launch cost per kernel."""

    transfers: float = 0.0
    devices: dict[int, float] = field(factory=dict)
    """Accumulated cost per device."""

    sections: tuple[float, ...] = ()
    """Duration of every executed parallel section."""


def checksum(values: np.ndarray) -> int:
    """Position-weighted sum of an array, modulo 2^64.

    Example:
        >>> checksum(np.array([3, 1]))
        5
    """
    weights = np.arange(1, len(values) + 1, dtype=object)
    return int(np.sum(weights * np.asarray(values).astype(object))) % 2**64


@define(frozen=True)
class ExecResult:
    """The observable outcome of an execution."""

    properties: dict[str, np.ndarray] = field(repr=False)
    """Final host arrays, keyed by ``graph.property``."""

    globals: dict[str, Any]
    cost: CostReport
    transfer_log: tuple[TransferRecord, ...] = ()
    per_worker_work: tuple[LaunchWork, ...] = field(default=(), repr=False)
    kernel_invocations: int = 0
    """Kernel calls over all launches, after filtering."""

    loop_iterations: int = 0
    bucket_trace: dict[str, tuple[int, ...]] = field(factory=dict)
    """Bucket index of every delta round, per worklist."""

    return_value: Any = None

    @property
    def transfer_count(self) -> int:
        """The number of executed transfers."""
        return len(self.transfer_log)

    def checksums(self) -> dict[str, int]:
        """The checksum of every property array."""
        return {name: checksum(values) for name, values in self.properties.items()}

    def work_table(self) -> pd.DataFrame:
        """Per-worker work of every launch, one row per launch and worker."""
        rows = [
            {
                "launch": index,
                "kernel": work.kernel,
                "worker": worker,
                "vertices": vertices,
                "edges": edges,
            }
            for index, work in enumerate(self.per_worker_work)
            for worker, (vertices, edges) in enumerate(zip(work.vertices, work.edges))
        ]
        columns = ["launch", "kernel", "worker", "vertices", "edges"]
        return pd.DataFrame(rows, columns=columns)

    def transfer_table(self) -> pd.DataFrame:
        """The transfer log as a table."""
        rows = [
            {
                "device": r.device,
                "obj": r.obj,
                "direction": r.direction.value,
                "elements": r.elements,
                "cost": r.cost,
            }
            for r in self.transfer_log
        ]
        columns = ["device", "obj", "direction", "elements", "cost"]
        return pd.DataFrame(rows, columns=columns)


def load_imbalance(result: ExecResult) -> float:
    """The coefficient of variation of per-worker edge work.

    The launch with the largest total edge work is inspected. The population
    standard deviation is divided by the mean; a launch without edge work has no
    imbalance.

    Example:
        >>> work = LaunchWork("k", (1, 1), (3, 1), 3.0)
        >>> result = ExecResult({}, {}, CostReport(0, 0), per_worker_work=(work,))
        >>> load_imbalance(result)
        0.5
    """
    if not result.per_worker_work:
        return 0.0
    largest = max(result.per_worker_work, key=lambda w: w.total_edges)
    edges = np.asarray(largest.edges, dtype=float)
    mean = edges.mean()
    return 0.0 if mean == 0 else float(edges.std() / mean)


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
