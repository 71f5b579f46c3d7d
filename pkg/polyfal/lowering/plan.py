"""Execution plans: the lowered form of a program's ``main``."""

from __future__ import annotations

import gc
from abc import ABC
from collections.abc import Iterator
from enum import Enum
from typing import Any

from attrs import define, field
from attrs.validators import deep_iterable, ge, instance_of, optional

from polyfal.dsl.ast import (
    Foreach,
    If,
    MethodCall,
    Name,
    Program,
    Stmt,
    VarDecl,
    While,
)
from polyfal.lowering.target import Target
from polyfal.semantic.access import EMPTY, WEIGHT, AccessSet
from polyfal.utils.basic import to_tuple


class Direction(Enum):
    """Directions of transfers between host and device memory."""

    TO_HOST = "toHost"
    TO_DEVICE = "toDevice"


def object_names(sets: AccessSet) -> frozenset[str]:
    """The names of the transferable objects an access set touches.

    Globals keep their name, properties become ``graph.property`` and edge weights
    belong to the topology of their graph.

    Example:
        >>> sets = AccessSet({"lev"}, {("g", "dist"), ("g", "weight")})
        >>> sorted(object_names(sets))
        ['g', 'g.dist', 'lev']
    """
    names = set(sets.globals) | set(sets.objects)
    for graph, prop in sets.properties:
        names.add(graph if prop == WEIGHT else f"{graph}.{prop}")
    return frozenset(names)


@define(frozen=True)
class PlanStep(ABC):
    """Base class of all plan steps."""

    @property
    def children(self) -> tuple[tuple[PlanStep, ...], ...]:
        """The nested step lists."""
        return ()


def _steps() -> Any:
    return field(
        factory=tuple,
        converter=to_tuple,
        validator=deep_iterable(instance_of(PlanStep)),
    )


@define(frozen=True)
class DeviceAlloc(PlanStep):
    """Allocation of a device copy of an object."""

    device: int = field(validator=[instance_of(int), ge(0)])
    obj: str = field(validator=instance_of(str))


@define(frozen=True)
class Transfer(PlanStep):
    """A copy of an object between host memory and a device."""

    device: int = field(validator=[instance_of(int), ge(0)])
    obj: str = field(validator=instance_of(str))
    direction: Direction = field(validator=instance_of(Direction))
    whole: bool = field(default=True, validator=instance_of(bool))
    """Whether the whole array is copied."""


@define(frozen=True)
class HostStmt(PlanStep):
    """A statement executed by the host."""

    stmt: Stmt = field(validator=instance_of(Stmt))
    reads: AccessSet = field(default=EMPTY, eq=False)
    writes: AccessSet = field(default=EMPTY, eq=False)


@define(frozen=True)
class LaunchGroup(PlanStep):
    """Kernel launches executed together, optionally followed by a barrier."""

    device: int | None = field(validator=optional([instance_of(int), ge(0)]))
    """The device, or ``None`` for host threads."""

    launches: tuple[Foreach, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(Foreach))
    )
    kernels: tuple[str, ...] = field(converter=to_tuple)
    """The launched function of every launch."""

    barrier_after: bool = field(default=True, validator=instance_of(bool))
    reads: AccessSet = field(default=EMPTY, eq=False)
    writes: AccessSet = field(default=EMPTY, eq=False)

    @kernels.validator
    def _validate_kernels(self, _, kernels: tuple[str, ...]) -> None:  # noqa: DOC101, DOC103
        """Validate that there is one kernel name per launch.

        Raises:
            ValueError: If the group is empty or the lengths differ.
        """
        if not kernels or len(kernels) != len(self.launches):
            raise ValueError("A launch group needs one kernel name per launch.")

    @property
    def device_label(self) -> str:
        """The device as rendered in plan text."""
        return "host" if self.device is None else str(self.device)


@define(frozen=True)
class Loop(PlanStep):
    """A host ``while`` loop whose body contains launches."""

    stmt: While = field(validator=instance_of(While))
    head: tuple[PlanStep, ...] = _steps()
    """Steps executed before every evaluation of the condition."""

    body: tuple[PlanStep, ...] = _steps()
    reads: AccessSet = field(default=EMPTY, eq=False)
    """The reads of the condition."""

    @property
    def children(self) -> tuple[tuple[PlanStep, ...], ...]:
        return (self.head, self.body)


@define(frozen=True)
class Branch(PlanStep):
    """A host ``if`` statement whose branches contain launches."""

    stmt: If = field(validator=instance_of(If))
    then: tuple[PlanStep, ...] = _steps()
    orelse: tuple[PlanStep, ...] = _steps()
    reads: AccessSet = field(default=EMPTY, eq=False)
    """The reads of the condition."""

    @property
    def children(self) -> tuple[tuple[PlanStep, ...], ...]:
        return (self.then, self.orelse)


@define(frozen=True)
class Section(PlanStep):
    """One section of a parallel-sections statement."""

    device: int | None = field(validator=optional([instance_of(int), ge(0)]))
    steps: tuple[PlanStep, ...] = _steps()

    @property
    def children(self) -> tuple[tuple[PlanStep, ...], ...]:
        return (self.steps,)


@define(frozen=True)
class Sections(PlanStep):
    """Independent sections executed concurrently."""

    sections: tuple[Section, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(Section))
    )

    @property
    def children(self) -> tuple[tuple[PlanStep, ...], ...]:
        return (self.sections,)


def iter_steps(steps: tuple[PlanStep, ...]) -> Iterator[PlanStep]:
    """Iterate over steps and all nested steps in pre-order."""
    for step in steps:
        yield step
        for child in step.children:
            yield from iter_steps(child)


def declaration_order(program: Program) -> tuple[str, ...]:
    """The transferable objects of a program in declaration order.

    Globals come first, followed by the variables and properties declared in
    ``main`` in the order of their declaration.
    """
    names = [g.name for g in program.globals]
    for node in program.main.body.walk():
        match node:
            case VarDecl(name=name):
                names.append(name)
            case MethodCall(
                obj=Name(id=graph),
                method="addPointProperty" | "addEdgeProperty",
                args=(Name(id=prop), *_),
            ):
                names.append(f"{graph}.{prop}")
    return tuple(dict.fromkeys(names))


@define(frozen=True)
class ExecutionPlan:
    """A lowered program ready for execution."""

    program: Program = field(validator=instance_of(Program), eq=False, repr=False)
    """The program the plan was lowered from."""

    target: Target = field(validator=instance_of(Target))
    steps: tuple[PlanStep, ...] = _steps()

    epilogue: tuple[PlanStep, ...] = _steps()
    """Steps executed after ``main`` finished, also after an early return."""

    objects: tuple[str, ...] = field(factory=tuple, converter=to_tuple)
    """The declaration order of transferable objects."""

    def walk(self) -> Iterator[PlanStep]:
        """Iterate over all steps, including nested and epilogue steps."""
        yield from iter_steps(self.steps)
        yield from iter_steps(self.epilogue)

    @property
    def launch_groups(self) -> list[LaunchGroup]:
        """All launch groups in plan order."""
        return [s for s in self.walk() if isinstance(s, LaunchGroup)]

    @property
    def transfers(self) -> list[Transfer]:
        """All transfer steps in plan order."""
        return [s for s in self.walk() if isinstance(s, Transfer)]

    def sort_key(self, name: str) -> tuple[int, str]:
        """Order objects by declaration, then by name."""
        try:
            return self.objects.index(name), name
        except ValueError:
            return len(self.objects), name


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
