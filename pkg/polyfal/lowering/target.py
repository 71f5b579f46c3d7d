"""Execution targets and their cost model."""

from __future__ import annotations

import gc
from enum import Enum
from typing import Any

from attrs import define, field
from attrs.validators import ge, instance_of

from polyfal.serialization import SerialMixin

BYTES_PER_ELEMENT = 8
"""Size of one transferred array element or scalar."""


class TargetKind(Enum):
    """The kinds of execution targets."""

    HOST_THREADS = "cpu"
    """Kernels run on host worker threads; there is no device memory."""

    SIM_DEVICE = "sim-gpu"
    """Kernels run on one simulated device with private memory."""

    SIM_MULTI_DEVICE = "sim-multi-gpu"
    """Parallel sections run on separate simulated devices."""


@define(frozen=True)
class CostModel(SerialMixin):
    """Abstract cost units charged by the simulated targets."""

    per_edge_work: float = field(default=1.0, converter=float, validator=ge(0.0))
    """Cost of touching one edge."""

    per_vertex_work: float = field(default=1.0, converter=float, validator=ge(0.0))
    """Cost of processing one point or worklist item."""

    transfer_latency: float = field(default=100.0, converter=float, validator=ge(0.0))
    """Fixed cost of every transfer."""

    transfer_per_byte: float = field(default=0.01, converter=float, validator=ge(0.0))
    """Cost of every transferred byte."""

    def kernel_cost(self, vertices: int, edges: int) -> float:
        """The cost of a worker that processed the given amount of work."""
        return self.per_vertex_work * vertices + self.per_edge_work * edges

    def transfer_cost(self, elements: int) -> float:
        """The cost of transferring an object of the given number of elements."""
        return (
            self.transfer_latency
            + self.transfer_per_byte * BYTES_PER_ELEMENT * elements
        )


@define(frozen=True)
class Target(SerialMixin):
    """An execution target.

    Example:
        >>> Target.sim_multi_device(2).device_count
        2
    """

    kind: TargetKind = field(converter=TargetKind, validator=instance_of(TargetKind))
    """The kind of target."""

    thread_count: int = field(default=1, validator=[instance_of(int), ge(1)])
    """The number of host worker threads."""

    device_count: int = field(default=1, validator=[instance_of(int), ge(1)])
    """The number of simulated devices."""

    cost: CostModel = field(factory=CostModel, validator=instance_of(CostModel))
    """The cost parameters."""

    @device_count.validator
    def _validate_device_count(self, _: Any, value: int) -> None:  # noqa: DOC101, DOC103
        """Validate that the device count fits the target kind.

        Raises:
            ValueError: If a single-device target has several devices or a
                multi-device target has fewer than two.
        """
        if self.kind is TargetKind.SIM_MULTI_DEVICE and value < 2:
            raise ValueError(
                f"A multi-device target needs at least two devices. Given: {value}."
            )
        if self.kind is not TargetKind.SIM_MULTI_DEVICE and value != 1:
            raise ValueError(
                f"Target '{self.kind.value}' has exactly one device. Given: {value}."
            )

    @classmethod
    def host_threads(cls, thread_count: int = 1, cost: CostModel | None = None):
        """Create a host-threads target."""
        return cls(TargetKind.HOST_THREADS, thread_count, 1, cost or CostModel())

    @classmethod
    def sim_device(cls, cost: CostModel | None = None):
        """Create a target with one simulated device."""
        return cls(TargetKind.SIM_DEVICE, 1, 1, cost or CostModel())

    @classmethod
    def sim_multi_device(cls, device_count: int = 2, cost: CostModel | None = None):
        """Create a target with several simulated devices."""
        return cls(TargetKind.SIM_MULTI_DEVICE, 1, device_count, cost or CostModel())

    @property
    def has_devices(self) -> bool:
        """Whether kernels run in device memory separate from the host."""
        return self.kind is not TargetKind.HOST_THREADS


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
