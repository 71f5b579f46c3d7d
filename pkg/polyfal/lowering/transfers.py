"""Residency tracking and insertion of host/device transfers."""

from __future__ import annotations

import gc
import logging
from collections.abc import Iterable

import attrs
from attrs import define, field

from polyfal.dsl.ast import Break, IntLit, Stmt, While
from polyfal.exceptions import LoweringError
from polyfal.lowering.plan import (
    Branch,
    DeviceAlloc,
    Direction,
    ExecutionPlan,
    HostStmt,
    LaunchGroup,
    Loop,
    PlanStep,
    Section,
    Sections,
    Transfer,
    iter_steps,
    object_names,
)

_logger = logging.getLogger(__name__)

Key = tuple[int, str]
"""A device id together with an object name."""

_MAX_PASSES = 32
"""Upper bound on the passes needed to stabilize residency over a loop."""


@define
class ResidencyMap:
    """Which copy of every allocated object is current.

    A key is dirty on the device if the device copy is newer than the host copy,
    and dirty on the host if the host copy is newer than the device copy.
    """

    allocated: set[Key] = field(factory=set)
    dirty_on_device: set[Key] = field(factory=set)
    dirty_on_host: set[Key] = field(factory=set)

    def copy(self) -> ResidencyMap:
        return ResidencyMap(
            set(self.allocated), set(self.dirty_on_device), set(self.dirty_on_host)
        )

    def join(self, other: ResidencyMap) -> ResidencyMap:
        """The map describing either of two control-flow paths."""
        return ResidencyMap(
            self.allocated | other.allocated,
            self.dirty_on_device | other.dirty_on_device,
            self.dirty_on_host | other.dirty_on_host,
        )

    @property
    def conflicts(self) -> set[Key]:
        """The keys dirty on both sides, which a join can produce."""
        return self.dirty_on_device & self.dirty_on_host

    def devices_of(self, obj: str) -> list[int]:
        """The devices holding a copy of an object."""
        return sorted(d for d, o in self.allocated if o == obj)

    def allocate(self, device: int, obj: str) -> None:
        """Register a fresh device copy, which is stale until written."""
        self.allocated.add((device, obj))
        self.dirty_on_host.add((device, obj))

    def to_host(self, device: int, obj: str) -> None:
        self.dirty_on_device.discard((device, obj))
        for other in self.devices_of(obj):
            if other != device:
                self.dirty_on_host.add((other, obj))

    def to_device(self, device: int, obj: str) -> None:
        self.dirty_on_host.discard((device, obj))

    def host_write(self, obj: str) -> None:
        for device in self.devices_of(obj):
            self.dirty_on_host.add((device, obj))

    def device_write(self, device: int, obj: str) -> None:
        self.dirty_on_device.add((device, obj))
        for other in self.devices_of(obj):
            if other != device:
                self.dirty_on_host.add((other, obj))


def breaks_loop(stmt: Stmt) -> bool:
    """Whether a host statement contains a ``break`` of the enclosing loop."""
    if isinstance(stmt, Break):
        return True
    if isinstance(stmt, While):
        return False
    return any(breaks_loop(c) for c in stmt.children() if isinstance(c, Stmt))


class _Inserter:
    """Walks a plan while keeping a residency map, adding the needed copies."""

    def __init__(self, plan: ExecutionPlan):
        self._plan = plan
        self._breaks: list[list[ResidencyMap]] = []

    def _sorted(self, names: Iterable[str]) -> list[str]:
        return sorted(names, key=self._plan.sort_key)

    def _transfer(
        self, state: ResidencyMap, device: int, obj: str, direction: Direction
    ) -> Transfer:
        if direction is Direction.TO_HOST:
            state.to_host(device, obj)
        else:
            state.to_device(device, obj)
        return Transfer(device, obj, direction)

    def _to_host(self, names: Iterable[str], state: ResidencyMap) -> list[PlanStep]:
        steps: list[PlanStep] = []
        for obj in self._sorted(names):
            for device in state.devices_of(obj):
                if (device, obj) in state.dirty_on_device:
                    steps.append(
                        self._transfer(state, device, obj, Direction.TO_HOST)
                    )
        return steps

    def _key_order(self, key: Key) -> tuple[int, int, str]:
        return (key[0], *self._plan.sort_key(key[1]))

    def _clean(self, keys: Iterable[Key], state: ResidencyMap) -> list[PlanStep]:
        """Transfers making the given keys clean in ``state``."""
        steps: list[PlanStep] = []
        for device, obj in sorted(keys, key=self._key_order):
            if (device, obj) in state.dirty_on_device:
                steps.append(self._transfer(state, device, obj, Direction.TO_HOST))
            elif (device, obj) in state.dirty_on_host:
                steps.append(self._transfer(state, device, obj, Direction.TO_DEVICE))
        return steps

    ##### Steps #####

    def block(
        self,
        steps: Iterable[PlanStep],
        state: ResidencyMap,
        allocs: list[PlanStep] | None = None,
    ) -> list[PlanStep]:
        """Process a step list.

        Allocations are hoisted to the list passed as ``allocs``, or placed in
        front of the top-level step that needs them if there is none.
        """
        out: list[PlanStep] = []
        for step in steps:
            pending: list[PlanStep] = [] if allocs is None else allocs
            produced = self._step(step, state, pending)
            if allocs is None:
                out += pending
            out += produced
        return out

    def _step(
        self, step: PlanStep, state: ResidencyMap, allocs: list[PlanStep]
    ) -> list[PlanStep]:
        match step:
            case HostStmt():
                return self._host(step, state)
            case LaunchGroup(device=None):
                return [step]
            case LaunchGroup():
                return self._launch(step, state, allocs)
            case Loop():
                return self._loop(step, state, allocs)
            case Branch():
                return self._branch(step, state, allocs)
            case Sections():
                return self._sections(step, state)
        return [step]

    def _host(self, step: HostStmt, state: ResidencyMap) -> list[PlanStep]:
        writes = object_names(step.writes)
        out = self._to_host(object_names(step.reads) | writes, state)
        for obj in writes:
            state.host_write(obj)
        if self._breaks and breaks_loop(step.stmt):
            self._breaks[-1].append(state.copy())
        return [*out, step]

    def _launch(
        self, step: LaunchGroup, state: ResidencyMap, allocs: list[PlanStep]
    ) -> list[PlanStep]:
        device = step.device
        assert device is not None
        writes = object_names(step.writes)
        out: list[PlanStep] = []
        for obj in self._sorted(object_names(step.reads) | writes):
            if (device, obj) not in state.allocated:
                allocs.append(DeviceAlloc(device, obj))
                state.allocate(device, obj)
            for other in state.devices_of(obj):
                if other != device and (other, obj) in state.dirty_on_device:
                    out.append(self._transfer(state, other, obj, Direction.TO_HOST))
            if (device, obj) in state.dirty_on_host:
                out.append(self._transfer(state, device, obj, Direction.TO_DEVICE))
        for obj in writes:
            state.device_write(device, obj)
        return [*out, step]

    def _loop(
        self, step: Loop, state: ResidencyMap, allocs: list[PlanStep]
    ) -> list[PlanStep]:
        entry = state.copy()
        pre: list[PlanStep] = []
        head = entry.copy()
        for _ in range(_MAX_PASSES):
            mark = len(allocs)
            self._breaks.append([])
            inner = head.copy()
            cond = self._to_host(object_names(step.reads), inner)
            body = self.block(step.body, inner, allocs)
            breaks = self._breaks.pop()

            # Hoisted allocations happen before the loop
            fresh = allocs[mark:]
            for alloc in fresh:
                assert isinstance(alloc, DeviceAlloc)
                entry.allocate(alloc.device, alloc.obj)
            crossed = _loop_invariant(entry, inner, step.body)
            pre += self._clean(crossed, entry)
            joined = entry.join(inner)
            if not fresh and not crossed and joined == head:
                break
            head = joined
        else:
            raise LoweringError("Residency of loop variables does not stabilize.")

        exits = list(breaks)
        if not _always_true(step.stmt):
            exits.append(head)
        after = exits[0] if exits else head
        for other in exits[1:]:
            after = after.join(other)
        if after.conflicts:
            raise LoweringError(
                f"Objects {sorted(o for _, o in after.conflicts)} are current on "
                f"different sides depending on how the loop is left."
            )
        _replace(state, after)
        return [*pre, attrs.evolve(step, head=cond, body=body)]

    def _branch(
        self, step: Branch, state: ResidencyMap, allocs: list[PlanStep]
    ) -> list[PlanStep]:
        pre = self._to_host(object_names(step.reads), state)
        then_state, else_state = state.copy(), state.copy()
        then = self.block(step.then, then_state, allocs)
        orelse = self.block(step.orelse, else_state, allocs)
        crossed = then_state.join(else_state).conflicts
        then += self._clean(crossed, then_state)
        orelse += self._clean(crossed, else_state)
        _replace(state, then_state.join(else_state))
        return [*pre, attrs.evolve(step, then=then, orelse=orelse)]

    def _sections(self, step: Sections, state: ResidencyMap) -> list[PlanStep]:
        sections = []
        after = state.copy()
        for section in step.sections:
            local = state.copy()
            steps = self.block(section.steps, local)
            sections.append(attrs.evolve(section, steps=steps))
            after = after.join(local)
        if after.conflicts:
            raise LoweringError(
                f"Objects {sorted(o for _, o in after.conflicts)} are written on "
                f"more than one device in independent sections."
            )
        _replace(state, after)
        return [Sections(sections)]

    def epilogue(self, state: ResidencyMap) -> list[PlanStep]:
        """Transfers bringing every device-dirty object back to the host."""
        return self._clean(set(state.dirty_on_device), state)


def _loop_invariant(
    entry: ResidencyMap, end: ResidencyMap, body: Iterable[PlanStep]
) -> set[Key]:
    """The keys to make current before a loop instead of inside it.

    These are the keys that are current on opposite sides at the loop entry and
    at the end of the body, and the keys a single iteration makes current for
    good because the body never makes the other side newer again.
    """
    host_writes: set[str] = set()
    device_writes: set[Key] = set()
    for step in iter_steps(tuple(body)):
        if isinstance(step, HostStmt):
            host_writes |= object_names(step.writes)
        elif isinstance(step, LaunchGroup) and step.device is not None:
            device_writes |= {(step.device, o) for o in object_names(step.writes)}
    crossed = (entry.dirty_on_host & end.dirty_on_device) | (
        entry.dirty_on_device & end.dirty_on_host
    )
    crossed |= {
        key
        for key in entry.dirty_on_host - end.dirty_on_host
        if key[1] not in host_writes
    }
    crossed |= {
        key
        for key in entry.dirty_on_device - end.dirty_on_device
        if key not in device_writes
    }
    return crossed


def _replace(state: ResidencyMap, other: ResidencyMap) -> None:
    state.allocated = set(other.allocated)
    state.dirty_on_device = set(other.dirty_on_device)
    state.dirty_on_host = set(other.dirty_on_host)


def insert_transfers(plan: ExecutionPlan) -> ExecutionPlan:
    """Add device allocations and host/device transfers to a plan.

    Objects are allocated on a device before the first launch group using them,
    hoisted out of enclosing loops and branches. A host statement accessing an
    object whose device copy is newer is preceded by a copy to the host. A launch
    group using an object whose host copy is newer is preceded by a copy to its
    device. Every transfer copies the whole object. Objects left newer on a
    device are copied back in the plan's epilogue.

    Args:
        plan: A plan without transfers.

    Returns:
        The plan with allocations, transfers and epilogue.

    Raises:
        LoweringError: If the current copy of an object after a loop or after
            parallel sections depends on the path taken.
    """
    if not plan.target.has_devices:
        return plan
    inserter = _Inserter(plan)
    state = ResidencyMap()
    steps = inserter.block(plan.steps, state)
    epilogue = inserter.epilogue(state)
    result = attrs.evolve(plan, steps=steps, epilogue=(*plan.epilogue, *epilogue))
    _logger.debug(
        "Inserted %d transfers and %d allocations",
        len(result.transfers),
        sum(isinstance(s, DeviceAlloc) for s in result.walk()),
    )
    return result


def replay_residency(plan: ExecutionPlan) -> list[str]:
    """Replay a plan and report every access of a stale copy.

    Loops are replayed for two iterations; branches and sections are replayed on
    all paths and joined. A copy that is newer on the device after the epilogue
    is reported as well.

    Args:
        plan: The plan to check.

    Returns:
        Human-readable violations; empty for a coherent plan.
    """
    violations: list[str] = []
    breaks: list[list[ResidencyMap]] = []

    def host(step: HostStmt, state: ResidencyMap) -> None:
        for obj in sorted(object_names(step.reads) | object_names(step.writes)):
            for device in state.devices_of(obj):
                if (device, obj) in state.dirty_on_device:
                    violations.append(
                        f"host accesses '{obj}' while device {device} holds a newer "
                        f"copy"
                    )
        for obj in object_names(step.writes):
            state.host_write(obj)
        if breaks and breaks_loop(step.stmt):
            breaks[-1].append(state.copy())

    def launch(step: LaunchGroup, state: ResidencyMap) -> None:
        device = step.device
        if device is None:
            return
        for obj in sorted(object_names(step.reads) | object_names(step.writes)):
            if (device, obj) not in state.allocated:
                violations.append(f"'{obj}' is used on device {device} unallocated")
            elif (device, obj) in state.dirty_on_host:
                violations.append(f"device {device} uses a stale copy of '{obj}'")
        for obj in object_names(step.writes):
            state.device_write(device, obj)

    def run(steps: Iterable[PlanStep], state: ResidencyMap) -> ResidencyMap:
        for step in steps:
            match step:
                case DeviceAlloc(device=device, obj=obj):
                    state.allocate(device, obj)
                case Transfer(device=device, obj=obj, direction=Direction.TO_HOST):
                    state.to_host(device, obj)
                case Transfer(device=device, obj=obj):
                    state.to_device(device, obj)
                case HostStmt():
                    host(step, state)
                case LaunchGroup():
                    launch(step, state)
                case Loop():
                    breaks.append([])
                    exits = [] if _always_true(step.stmt) else [state.copy()]
                    for _ in range(2):
                        state = run(step.head, state)
                        state = run(step.body, state)
                    exits += breaks.pop()
                    if exits:
                        state = exits[0]
                        for other in exits[1:]:
                            state = state.join(other)
                case Branch():
                    then = run(step.then, state.copy())
                    state = then.join(run(step.orelse, state))
                case Sections():
                    joined = state.copy()
                    for section in step.sections:
                        joined = joined.join(run(section.steps, state.copy()))
                    state = joined
                case Section():
                    state = run(step.steps, state)
        return state

    state = run((*plan.steps, *plan.epilogue), ResidencyMap())
    for device, obj in sorted(state.dirty_on_device):
        violations.append(f"'{obj}' is never copied back from device {device}")
    return violations


def _always_true(stmt: While) -> bool:
    return isinstance(stmt.cond, IntLit) and stmt.cond.value != 0


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
