"""Execution of plans on host threads and simulated devices."""

from __future__ import annotations

import gc
import logging
import threading
from collections.abc import Sequence
from typing import Any

import numpy as np
from attrs import define, field
from joblib import Parallel, delayed

from polyfal.dsl.ast import Foreach, IteratorKind
from polyfal.dsl.types import TypeKind
from polyfal.exceptions import DivergenceError, DslRuntimeError
from polyfal.lowering.plan import (
    Branch,
    DeviceAlloc,
    Direction,
    ExecutionPlan,
    HostStmt,
    LaunchGroup,
    Loop,
    PlanStep,
    Sections,
    Transfer,
)
from polyfal.lowering.target import TargetKind
from polyfal.runtime.clock import SimClock
from polyfal.runtime.device import DeviceSim, TransferRecord
from polyfal.runtime.interpreter import (
    Env,
    Frame,
    FunctionReturn,
    HostGlobals,
    LoopBreak,
    Overlay,
    Runtime,
)
from polyfal.runtime.memory import Memory, split_object
from polyfal.runtime.result import CostReport, ExecResult, LaunchWork
from polyfal.runtime.store import GraphStore
from polyfal.runtime.worklist import Worklist, WorklistMode
from polyfal.utils.basic import ceil_div
from polyfal.utils.environment import (
    default_threads,
    iteration_cap_factor,
    parallel_sections,
)

_logger = logging.getLogger(__name__)


@define(eq=False)
class _Strand:
    """A sequential thread of host control: ``main`` or one parallel section."""

    frame: Frame
    clock: SimClock
    host: Env

    def fork(self) -> _Strand:
        host = Env(self.host.runtime, self.host.memory, self.host.globals)
        return _Strand(dict(self.frame), self.clock.fork(), host)


@define(eq=False)
class _Totals:
    """Counters accumulated over the whole execution."""

    host: float = 0.0
    transfers: float = 0.0
    kernels: dict[str, float] = field(factory=dict)
    work: list[LaunchWork] = field(factory=list)
    transfer_log: list[TransferRecord] = field(factory=list)
    sections: list[float] = field(factory=list)
    invocations: int = 0
    loop_iterations: int = 0
    guard: threading.Lock = field(factory=threading.Lock)


class PlanExecutor:
    """Runs an execution plan against graph stores.

    Host statements run sequentially on the host memory. The launches of a launch
    group run concurrently, each split into contiguous chunks processed by a pool
    of worker threads. On devices, kernels read and write the device
    memory, which is synchronized with the host only by the plan's transfers.
    """

    def __init__(
        self,
        plan: ExecutionPlan,
        stores: Sequence[GraphStore],
        threads: int,
        worklist: WorklistMode,
        cap_factor: int,
    ):
        if threads < 1:
            raise ValueError(
                f"The number of threads must be positive. Given: {threads}."
            )
        self.plan = plan
        self.threads = threads
        largest = max((s.n for s in stores), default=0)
        self.runtime = Runtime(
            plan.program,
            tuple(stores),
            Memory("host"),
            worklist,
            cap_factor * max(largest, 10),
        )
        target = plan.target
        self.cost = target.cost
        self.devices = (
            {d: DeviceSim(d) for d in range(target.device_count)}
            if target.has_devices
            else {}
        )
        self.totals = _Totals()

    ##### Entry point #####

    def run(self) -> ExecResult:
        """Execute ``main`` followed by the plan's epilogue."""
        runtime = self.runtime
        host = runtime.host
        env = Env(runtime, host, HostGlobals(host.globals))
        for decl in self.plan.program.globals:
            init = decl.init
            value = 0 if init is None else runtime.compiler.expr(init, {})(env, {})
            host.globals[decl.name] = (
                float(value) if decl.dtype.kind is TypeKind.FLOAT else value
            )

        strand = _Strand(self._main_frame(), SimClock(), env)
        return_value = None
        try:
            self._steps(self.plan.steps, strand)
        except FunctionReturn as ret:
            return_value = ret.value
        self._steps(self.plan.epilogue, strand)
        return self._result(strand.clock, return_value)

    def _main_frame(self) -> Frame:
        params = self.plan.program.main.params
        frame: Frame = {}
        if len(params) == 2:
            frame[params[0].name] = len(self.runtime.stores) + 1
            frame[params[1].name] = None
        return frame

    ##### Steps #####

    def _steps(self, steps: Sequence[PlanStep], strand: _Strand) -> None:
        for step in steps:
            self._step(step, strand)

    def _step(self, step: PlanStep, strand: _Strand) -> None:
        match step:
            case HostStmt(stmt=stmt):
                self._host(stmt, strand)
            case LaunchGroup():
                self._launch_group(step, strand)
            case DeviceAlloc(device=device, obj=obj):
                self._allocate(device, obj)
            case Transfer():
                self._transfer(step, strand)
            case Loop():
                self._loop(step, strand)
            case Branch(stmt=stmt, then=then, orelse=orelse):
                cond = self.runtime.compiler.expr(stmt.cond, {})
                taken = then if cond(strand.host, strand.frame) else orelse
                self._steps(taken, strand)
            case Sections():
                self._sections(step, strand)
            case _:
                raise TypeError(f"Cannot execute plan step '{type(step).__name__}'.")

    def _host(self, stmt: Any, strand: _Strand) -> None:
        env = strand.host
        compiled = self.runtime.compiler.stmt(stmt, {})
        try:
            compiled(env, strand.frame)
        finally:
            cost = self.cost.per_vertex_work * env.host_items
            strand.clock.advance(cost)
            with self.totals.guard:
                self.totals.host += cost
                self.totals.loop_iterations += env.loop_iterations
            env.host_items = 0
            env.loop_iterations = 0

    def _loop(self, loop: Loop, strand: _Strand) -> None:
        cond = self.runtime.compiler.expr(loop.stmt.cond, {})
        cap = self.runtime.iteration_cap
        count = 0
        try:
            while True:
                self._steps(loop.head, strand)
                if not cond(strand.host, strand.frame):
                    break
                count += 1
                if count > cap:
                    raise DivergenceError(
                        f"The loop at {loop.stmt.loc} exceeded {cap} iterations. "
                        f"Raise the cap with the iteration cap factor if the "
                        f"computation converges slowly."
                    )
                try:
                    self._steps(loop.body, strand)
                except LoopBreak:
                    break
        finally:
            with self.totals.guard:
                self.totals.loop_iterations += count
        _logger.debug("Loop at %s ran %d iterations", loop.stmt.loc, count)

    def _sections(self, step: Sections, strand: _Strand) -> None:
        strands = [strand.fork() for _ in step.sections]
        start = strand.clock.now

        def run(index: int) -> None:
            self._steps(step.sections[index].steps, strands[index])

        indices = range(len(strands))
        if parallel_sections() and len(strands) > 1:
            Parallel(n_jobs=len(strands), prefer="threads")(
                delayed(run)(i) for i in indices
            )
        else:
            for i in indices:
                run(i)

        strand.clock.join(s.clock for s in strands)
        before = dict(strand.frame)
        for forked in strands:
            for name, value in forked.frame.items():
                if name not in before or before[name] is not value:
                    strand.frame[name] = value
        with self.totals.guard:
            self.totals.sections += [s.clock.now - start for s in strands]

    ##### Kernels #####

    def _memory(self, device: int | None) -> Memory:
        return self.runtime.host if device is None else self.devices[device].memory

    def _launch_group(self, step: LaunchGroup, strand: _Strand) -> None:
        """Run the launches of a group concurrently.

        The launches of a group share no conflicting accesses, so they run on
        concurrent threads. Their global updates are merged in launch order once
        all of them finish, and the group costs as much as its longest launch.
        The executor joins after every group; ``barrier_after`` only tells
        whether the schedule allows the next group to start earlier, which the
        simulated clock does not model.
        """
        memory = self._memory(step.device)
        header = Env(self.runtime, memory, HostGlobals(memory.globals))
        spaces = [
            self.runtime.compiler.space(launch, {})(header, strand.frame)
            for launch in step.launches
        ]

        def run(index: int) -> list[Env]:
            launch = step.launches[index]
            return self._run_launch(launch, memory, strand.frame, spaces[index])

        indices = range(len(step.launches))
        if len(indices) > 1:
            outcomes = Parallel(n_jobs=len(indices), prefer="threads")(
                delayed(run)(i) for i in indices
            )
        else:
            outcomes = [run(i) for i in indices]
        costs = [
            self._finish_launch(kernel, envs, memory)
            for kernel, envs in zip(step.kernels, outcomes)
        ]
        cost = max(costs)
        strand.clock.advance(cost)
        if step.device is not None:
            self.devices[step.device].charge(cost)
        _logger.debug(
            "Launched [%s] on %s: cost %.1f",
            ",".join(step.kernels),
            step.device_label,
            cost,
        )

    def _run_launch(
        self,
        launch: Foreach,
        memory: Memory,
        frame: Frame,
        space: tuple[Sequence[int], bool],
    ) -> list[Env]:
        runtime = self.runtime
        compiler = runtime.compiler
        items, edges = space
        filter_ = None if launch.filter is None else compiler.expr(launch.filter, {})
        body = compiler.stmt(launch.body, {})
        var = launch.var

        def work(chunk: Sequence[int]) -> Env:
            env = Env(runtime, memory, Overlay(memory.globals), kernel=True)
            local = dict(frame)
            for item in chunk:
                if edges:
                    env.edge_work += 1
                else:
                    env.vertex_work += 1
                local[var] = item
                if filter_ is not None and not filter_(env, local):
                    continue
                env.token = object()
                env.invocations += 1
                body(env, local)
            return env

        size = ceil_div(len(items), self.threads)
        chunks = [items[i * size : (i + 1) * size] for i in range(self.threads)]
        if self.threads > 1:
            envs = Parallel(n_jobs=self.threads, prefer="threads")(
                delayed(work)(chunk) for chunk in chunks
            )
        else:
            envs = [work(chunk) for chunk in chunks]
        return envs

    def _finish_launch(self, kernel: str, envs: list[Env], memory: Memory) -> float:
        runtime = self.runtime
        for env in envs:
            env.globals.merge_into(memory.globals)
        runtime.singles.release_owners(owner for env in envs for owner in env.owners)

        cost = max(self.cost.kernel_cost(e.vertex_work, e.edge_work) for e in envs)
        record = LaunchWork(
            kernel,
            tuple(e.vertex_work for e in envs),
            tuple(e.edge_work for e in envs),
            cost,
        )
        with self.totals.guard:
            self.totals.work.append(record)
            self.totals.kernels[kernel] = self.totals.kernels.get(kernel, 0.0) + cost
            self.totals.invocations += sum(e.invocations for e in envs)
            self.totals.loop_iterations += sum(e.loop_iterations for e in envs)
        return cost

    ##### Device memory #####

    def _allocate(self, device: int, obj: str) -> None:
        memory = self.devices[device].memory
        graph, prop = split_object(obj)
        if prop is not None:
            values = self.runtime.host.props.get((graph, prop))
            if values is not None:
                memory.props[(graph, prop)] = np.zeros_like(values)
        elif obj in self.runtime.host.globals:
            memory.globals[obj] = 0

    def _transfer(self, step: Transfer, strand: _Strand) -> None:
        runtime = self.runtime
        device = self.devices[step.device]
        host, remote = runtime.host, device.memory
        source, dest = host, remote
        if step.direction is Direction.TO_HOST:
            source, dest = remote, host
        graph, prop = split_object(step.obj)
        if prop is not None:
            key = (graph, prop)
            if key not in source.props:
                raise DslRuntimeError(
                    f"'{step.obj}' is transferred from {source.label} before it "
                    f"exists there."
                )
            if key in dest.props and dest.props[key].shape == source.props[key].shape:
                np.copyto(dest.props[key], source.props[key])
            else:
                dest.props[key] = source.props[key].copy()
        elif step.obj in source.globals:
            dest.globals[step.obj] = source.globals[step.obj]

        elements = runtime.element_count(step.obj)
        cost = self.cost.transfer_cost(elements)
        record = TransferRecord(step.device, step.obj, step.direction, elements, cost)
        device.log(record)
        strand.clock.advance(cost)
        with self.totals.guard:
            self.totals.transfer_log.append(record)
            self.totals.transfers += cost

    ##### Result #####

    def _result(self, clock: SimClock, return_value: Any) -> ExecResult:
        runtime = self.runtime
        totals = self.totals
        properties = {
            f"{graph}.{name}": runtime.host.props[(graph, name)].copy()
            for graph, name in runtime.declared
            if (graph, name) in runtime.host.props
        }
        traces = {
            name: tuple(c.bucket_trace)
            for name, c in runtime.containers.items()
            if isinstance(c, Worklist) and c.bucket_trace
        }
        cost = CostReport(
            clock.now,
            totals.host,
            dict(totals.kernels),
            totals.transfers,
            {d: dev.cost_accumulated for d, dev in self.devices.items()},
            tuple(totals.sections),
        )
        return ExecResult(
            properties,
            dict(runtime.host.globals),
            cost,
            tuple(totals.transfer_log),
            tuple(totals.work),
            totals.invocations,
            totals.loop_iterations,
            traces,
            return_value,
        )


def _as_stores(stores: GraphStore | Sequence[GraphStore]) -> list[GraphStore]:
    return [stores] if isinstance(stores, GraphStore) else list(stores)


def execute(
    plan: ExecutionPlan,
    stores: GraphStore | Sequence[GraphStore],
    threads: int | None = None,
    worklist: WorklistMode | None = None,
    cap_factor: int | None = None,
) -> ExecResult:
    """Execute a plan.

    Args:
        plan: The plan to execute.
        stores: The graph, or the graphs in the order ``argv[1]``, ``argv[2]``, ...
        threads: The number of workers per launch. Defaults to the thread count of
            a host-threads target, else to the configured default.
        worklist: The scheduling of worklists.
        cap_factor: Fixpoint loops fail after ``cap_factor * max(n, 10)``
            iterations, where ``n`` is the largest point count. Defaults to the
            configured factor.

    Returns:
        The final properties and globals with cost and work statistics.

    Raises:
        DslRuntimeError: If the program accesses a property before it exists, or
            fails otherwise at run time.
        DivergenceError: If a loop exceeds the iteration cap.

    Example:
        >>> from polyfal.cli.commands import compile_program
        >>> from polyfal.corpus import corpus_source
        >>> from polyfal.runtime.store import build_graph_store
        >>> plan = compile_program(corpus_source("bfs")).plan
        >>> path = build_graph_store([(i, i + 1, 1) for i in range(4)], 5)
        >>> execute(plan, path).properties["graph.dist"].tolist()
        [0, 1, 2, 3, 4]
    """
    target = plan.target
    if threads is None:
        threads = (
            target.thread_count
            if target.kind is TargetKind.HOST_THREADS
            else default_threads()
        )
    executor = PlanExecutor(
        plan,
        _as_stores(stores),
        threads,
        worklist or WorklistMode(),
        iteration_cap_factor() if cap_factor is None else cap_factor,
    )
    result = executor.run()
    _logger.debug(
        "Executed plan: cost %.1f, %d transfers, %d kernel invocations",
        result.cost.total,
        result.transfer_count,
        result.kernel_invocations,
    )
    return result


def worklist_drain(
    plan: ExecutionPlan,
    stores: GraphStore | Sequence[GraphStore],
    mode: WorklistMode | None = None,
    threads: int | None = None,
    cap_factor: int | None = None,
) -> ExecResult:
    """Execute a plan of a worklist-driven program.

    Under FIFO scheduling, each round processes the points pushed during the
    previous one. Under delta scheduling, each round processes the lowest
    nonempty bucket, so a bucket is drained before the next one is started.

    Raises:
        DslRuntimeError: If no launch of the plan iterates a worklist.
    """
    if not any(
        launch.iterator is IteratorKind.COLLECTION_ITEMS
        for group in plan.launch_groups
        for launch in group.launches
    ):
        raise DslRuntimeError("The plan has no launch over a worklist.")
    return execute(plan, stores, threads, mode, cap_factor)


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
