"""Simulated devices and their transfer logs."""

from __future__ import annotations

import gc
import threading

from attrs import define, field
from attrs.validators import ge, instance_of

from polyfal.lowering.plan import Direction
from polyfal.runtime.memory import Memory


@define(frozen=True)
class TransferRecord:
    """An executed transfer."""

    device: int
    obj: str
    direction: Direction
    elements: int
    cost: float


@define(eq=False)
class DeviceSim:
    """A simulated device with its own memory.

    The accumulated cost only grows during execution.
    """

    device_id: int = field(validator=[instance_of(int), ge(0)])
    memory: Memory = field()
    cost_accumulated: float = field(default=0.0, init=False)
    transfer_log: list[TransferRecord] = field(factory=list, init=False)
    _guard: threading.Lock = field(factory=threading.Lock, init=False, repr=False)

    @memory.default
    def _default_memory(self) -> Memory:
        return Memory(f"device {self.device_id}")

    def charge(self, cost: float) -> None:
        """Add the cost of work done by or for this device."""
        if cost < 0:
            raise ValueError(f"Costs are nonnegative. Given: {cost}.")
        with self._guard:
            self.cost_accumulated += cost

    def log(self, record: TransferRecord) -> None:
        """Record an executed transfer and charge its cost."""
        with self._guard:
            self.transfer_log.append(record)
        self.charge(record.cost)


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
