"""Compile options shared by the command-line commands."""

from __future__ import annotations

import gc
import warnings
from collections.abc import Iterable
from enum import Enum
from typing import Any

from attrs import define, field
from attrs.validators import ge, instance_of, optional

from polyfal.exceptions import ForcedTargetWarning, OptionsError
from polyfal.lowering.target import CostModel, Target, TargetKind
from polyfal.runtime.worklist import WorklistKind, WorklistMode
from polyfal.transforms.pipeline import Mode


class DumpKind(Enum):
    """Intermediate representations that can be dumped by ``compile``."""

    AST = "ast"
    CFG = "cfg"
    PLAN = "plan"


def _to_dumps(value: Iterable[DumpKind | str]) -> frozenset[DumpKind]:
    return frozenset(DumpKind(v) for v in value)


@define(frozen=True)
class CompileOptions:
    """How a program is compiled.

    Example:
        >>> CompileOptions(mode="edge", target="sim-gpu").target_spec().kind.value
        'sim-gpu'
    """

    mode: Mode = field(default=Mode.NATIVE, converter=Mode)
    """The processing mode the kernels are transformed into."""

    asynchronous: bool = field(default=False, validator=instance_of(bool))
    """Whether independent launches may run without a barrier between them."""

    target: TargetKind = field(default=TargetKind.HOST_THREADS, converter=TargetKind)
    """The execution target."""

    threads: int = field(default=1, validator=[instance_of(int), ge(1)])
    """The number of host worker threads."""

    devices: int = field(default=2, validator=[instance_of(int), ge(2)])
    """The number of devices of a multi-device target."""

    delta: float | None = field(
        default=None,
        converter=lambda x: None if x is None else float(x),
        validator=optional(instance_of(float)),
    )
    """The bucket width of delta-stepping worklists."""

    worklist: WorklistKind | None = field(
        default=None, converter=lambda x: None if x is None else WorklistKind(x)
    )
    """The worklist scheduling. Delta-stepping if a delta is given, else FIFO."""

    dumps: frozenset[DumpKind] = field(factory=frozenset, converter=_to_dumps)
    """The representations written by ``compile``."""

    force: bool = field(default=False, validator=instance_of(bool))
    """Whether restricted mode/target combinations are compiled anyway."""

    allow_fallback: bool = field(default=False, validator=instance_of(bool))
    """Whether inapplicable transforms keep the program in its original mode."""

    cost: CostModel = field(factory=CostModel, validator=instance_of(CostModel))
    """The cost parameters of the target."""

    @delta.validator
    def _validate_delta(self, _: Any, value: float | None) -> None:  # noqa: DOC101, DOC103
        """Validate the bucket width.

        Raises:
            OptionsError: If the width is not positive or no worklist is compiled.
        """
        if value is None:
            return
        if value <= 0:
            raise OptionsError(f"The delta must be positive. Given: {value}.")
        if self.mode is not Mode.WORKLIST:
            raise OptionsError("A delta can only be given in worklist mode.")
        if self.worklist is WorklistKind.FIFO:
            raise OptionsError("A delta can only be given with delta scheduling.")

    @worklist.validator
    def _validate_worklist(self, _: Any, value: WorklistKind | None) -> None:  # noqa: DOC101, DOC103
        """Validate that a scheduling is only chosen for worklist programs.

        Raises:
            OptionsError: If a scheduling is given outside worklist mode.
        """
        if value is not None and self.mode is not Mode.WORKLIST:
            raise OptionsError(
                "A worklist scheduling can only be given in worklist mode."
            )

    def __attrs_post_init__(self) -> None:
        if self.mode is Mode.WORKLIST and self.target is TargetKind.SIM_DEVICE:
            message = (
                "Worklist mode is not supported on target 'sim-gpu': worklist "
                "kernels do not benefit from a single device, where the "
                "topology-driven variants run faster."
            )
            if not self.force:
                raise OptionsError(message + " Use --force to compile anyway.")
            warnings.warn(message, ForcedTargetWarning, stacklevel=3)

    def target_spec(self) -> Target:
        """The execution target described by these options."""
        match self.target:
            case TargetKind.HOST_THREADS:
                return Target.host_threads(self.threads, self.cost)
            case TargetKind.SIM_DEVICE:
                return Target.sim_device(self.cost)
            case TargetKind.SIM_MULTI_DEVICE:
                return Target.sim_multi_device(self.devices, self.cost)

    @property
    def worklist_mode(self) -> WorklistMode:
        """The worklist scheduling described by these options.

        Example:
            >>> CompileOptions(mode="worklist", worklist="delta").worklist_mode
            WorklistMode(kind=<WorklistKind.DELTA: 'delta'>, delta=None)
        """
        kind = self.worklist
        if kind is None:
            kind = WorklistKind.FIFO if self.delta is None else WorklistKind.DELTA
        if kind is WorklistKind.FIFO:
            return WorklistMode(WorklistKind.FIFO)
        return WorklistMode(WorklistKind.DELTA, self.delta)


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
