"""Lowering of scheduled programs to execution plans."""

from __future__ import annotations

import logging

from polyfal.analysis.schedule import ConcurrentGroup, Schedule
from polyfal.dsl.ast import (
    Block,
    Foreach,
    If,
    ParallelSections,
    Program,
    Stmt,
    While,
)
from polyfal.exceptions import LoweringError
from polyfal.lowering.plan import (
    Branch,
    ExecutionPlan,
    HostStmt,
    LaunchGroup,
    Loop,
    PlanStep,
    Section,
    Sections,
    declaration_order,
    iter_steps,
    object_names,
)
from polyfal.lowering.target import Target, TargetKind
from polyfal.lowering.transfers import insert_transfers
from polyfal.semantic.access import EMPTY, AccessAnalyzer
from polyfal.semantic.targets import launched_function

_logger = logging.getLogger(__name__)


def _has_launch(stmt: Stmt, program: Program) -> bool:
    """Whether the statement is or structurally contains a kernel launch."""
    match stmt:
        case Block(stmts=stmts):
            return any(_has_launch(s, program) for s in stmts)
        case If(then=then, orelse=orelse):
            return _has_launch(then, program) or (
                orelse is not None and _has_launch(orelse, program)
            )
        case While(body=body):
            return _has_launch(body, program)
        case ParallelSections():
            return True
        case Foreach():
            return launched_function(stmt, program) is not None
    return False


class _Lowerer:
    def __init__(self, program: Program, schedule: Schedule, target: Target):
        self._program = program
        self._schedule = schedule
        self._target = target
        self._analyzer = AccessAnalyzer(program)

    @property
    def _default_device(self) -> int | None:
        return 0 if self._target.has_devices else None

    def block(self, stmts: tuple[Stmt, ...], device: int | None) -> list[PlanStep]:
        steps: list[PlanStep] = []
        for stmt in stmts:
            steps += self.stmt(stmt, device)
        return steps

    def stmt(self, stmt: Stmt, device: int | None) -> list[PlanStep]:
        group = self._schedule.group_of(stmt)
        if group is not None:
            if not self._schedule.is_leader(stmt):
                # Emitted together with the first launch of its group
                return []
            return self._group(group, device)
        if not _has_launch(stmt, self._program):
            return [self._host(stmt)]
        match stmt:
            case Block(stmts=stmts):
                return self.block(stmts, device)
            case If(cond=cond, then=then, orelse=orelse):
                reads, _ = self._analyzer.expr_sets(cond)
                else_steps = [] if orelse is None else self.stmt(orelse, device)
                return [Branch(stmt, self.stmt(then, device), else_steps, reads)]
            case While(cond=cond, body=body):
                reads, _ = self._analyzer.expr_sets(cond)
                return [Loop(stmt, (), self.stmt(body, device), reads)]
            case ParallelSections(sections=sections):
                return [self._sections(sections)]
        raise LoweringError(
            f"The launch at {stmt.loc} is not part of the schedule of 'main'."
        )

    def _host(self, stmt: Stmt) -> HostStmt:
        reads, writes = self._analyzer.stmt_sets(stmt)
        return HostStmt(stmt, reads, writes)

    def _group(self, group: ConcurrentGroup, device: int | None) -> list[PlanStep]:
        launches = self._schedule.launch_stmts(group)
        reads, writes = EMPTY, EMPTY
        kernels = []
        for launch in launches:
            r, w = self._analyzer.stmt_sets(launch)
            reads, writes = reads | r, writes | w
            fn = launched_function(launch, self._program)
            assert fn is not None
            kernels.append(fn.name)
        serial = (
            self._target.kind is TargetKind.HOST_THREADS
            and self._target.thread_count == 1
        )
        step = LaunchGroup(
            device,
            launches,
            kernels,
            group.barrier_after or serial,
            reads,
            writes,
        )
        plains = [self._host(s) for s in self._schedule.plain_stmts(group)]
        return [step, *plains]

    def _sections(self, sections: tuple[Block, ...]) -> Sections:
        multi = self._target.kind is TargetKind.SIM_MULTI_DEVICE
        if multi and len(sections) > self._target.device_count:
            raise LoweringError(
                f"{len(sections)} parallel sections do not fit on "
                f"{self._target.device_count} devices."
            )
        lowered = []
        for index, section in enumerate(sections):
            device = index if multi else self._default_device
            lowered.append(Section(device, self.block(section.stmts, device)))
        return Sections(lowered)


def _check_launch_sites(program: Program) -> None:
    for fn in program.functions:
        for node in fn.body.walk():
            if isinstance(node, Foreach) and node.outer:
                if launched_function(node, program) is not None:
                    raise LoweringError(
                        f"Function '{fn.name}' launches kernels. Only 'main' can "
                        f"launch kernels."
                    )


def _check_device_writes(plan: ExecutionPlan) -> None:
    """Reject objects accessed by the host and written on more than one device."""
    host: set[str] = set()
    writers: dict[str, set[int]] = {}
    for step in plan.walk():
        match step:
            case HostStmt(reads=reads, writes=writes):
                host |= object_names(reads) | object_names(writes)
            case Loop(reads=reads) | Branch(reads=reads):
                host |= object_names(reads)
            case LaunchGroup(device=int(device), writes=writes):
                for obj in object_names(writes):
                    writers.setdefault(obj, set()).add(device)
    for obj in sorted(host):
        if len(writers.get(obj, ())) > 1:
            raise LoweringError(
                f"'{obj}' is accessed by the host and written on devices "
                f"{sorted(writers[obj])}. Sections must be independent."
            )


def lower(program: Program, schedule: Schedule, target: Target) -> ExecutionPlan:
    """Lower the ``main`` function of a program to an execution plan.

    Statements of ``main`` without kernel launches become host statements. The
    launches of every concurrent group of the schedule become one launch group,
    followed by the group's plain statements. Loops, branches and parallel
    sections containing launches keep their structure. On device targets, all
    launches run on device 0, except that section ``i`` of a parallel-sections
    statement runs on device ``i`` of a multi-device target. Allocations and
    transfers are added by :func:`~polyfal.lowering.transfers.insert_transfers`.

    Args:
        program: The resolved, transformed program.
        schedule: The schedule of ``main``.
        target: The execution target.

    Returns:
        The execution plan.

    Raises:
        LoweringError: If a multi-device target gets a program without parallel
            sections, a function other than ``main`` launches kernels, or an
            object accessed by the host is written on two devices.
    """
    if target.kind is TargetKind.SIM_MULTI_DEVICE and not any(
        isinstance(node, ParallelSections) for node in program.main.body.walk()
    ):
        raise LoweringError(
            "A multi-device target requires 'main' to contain parallel sections."
        )
    _check_launch_sites(program)

    lowerer = _Lowerer(program, schedule, target)
    device = 0 if target.has_devices else None
    steps = lowerer.block(program.main.body.stmts, device)
    plan = ExecutionPlan(program, target, steps, (), declaration_order(program))
    if target.kind is TargetKind.SIM_MULTI_DEVICE:
        _check_device_writes(plan)
    plan = insert_transfers(plan)

    _logger.debug(
        "Lowered 'main' for target '%s': %d steps, %d launch groups",
        target.kind.value,
        sum(1 for _ in iter_steps(plan.steps)),
        len(plan.launch_groups),
    )
    return plan
