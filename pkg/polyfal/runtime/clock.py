"""Discrete-event clock of simulated execution time."""

from __future__ import annotations

import gc
from collections.abc import Iterable

from attrs import define, field
from attrs.validators import ge


@define
class SimClock:
    """A clock measuring cost units.

    Concurrent activities run on forked clocks and are joined at the latest
    finish time.

    Example:
        >>> clock = SimClock()
        >>> a, b = clock.fork(), clock.fork()
        >>> a.advance(3); b.advance(5)
        >>> clock.join([a, b]).now
        5.0
    """

    now: float = field(default=0.0, converter=float, validator=ge(0.0))

    def advance(self, cost: float) -> None:
        """Move the clock forward by ``cost``."""
        if cost < 0:
            raise ValueError(f"Cannot advance the clock by a negative cost: {cost}.")
        self.now += cost

    def fork(self) -> SimClock:
        """A clock starting at the current time."""
        return SimClock(self.now)

    def join(self, clocks: Iterable[SimClock]) -> SimClock:
        """Move the clock to the latest time of ``clocks``."""
        self.now = max([self.now, *(c.now for c in clocks)])
        return self


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
