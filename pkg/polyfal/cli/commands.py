"""The compile and run commands."""

from __future__ import annotations

import gc
import logging
from collections.abc import Sequence
from pathlib import Path

from attrs import define, field
from attrs.validators import instance_of, optional

from polyfal.analysis import Cfg, Schedule, analyze, render_cfg
from polyfal.cli.options import CompileOptions, DumpKind
from polyfal.dsl import parse_source, pretty_print
from polyfal.dsl.ast import Index, IntLit, MethodCall, Name, Program
from polyfal.exceptions import OptionsError
from polyfal.graphs.io import read_graph
from polyfal.graphs.oracles import verify_oracle
from polyfal.lowering import ExecutionPlan, emit_text, lower
from polyfal.runtime import ExecResult, build_graph_store, execute
from polyfal.runtime.store import Edge
from polyfal.semantic import resolve
from polyfal.transforms import TransformReport, apply_mode

_logger = logging.getLogger(__name__)


@define(frozen=True)
class Compilation:
    """A compiled program with all intermediate representations."""

    options: CompileOptions
    program: Program = field(repr=False)
    """The transformed and resolved program."""

    reports: tuple[TransformReport, ...]
    cfg: Cfg = field(repr=False)
    schedule: Schedule = field(repr=False)
    plan: ExecutionPlan = field(repr=False)

    def dump(self, kind: DumpKind | str) -> str:
        """Render one intermediate representation."""
        match DumpKind(kind):
            case DumpKind.AST:
                return pretty_print(self.program)
            case DumpKind.CFG:
                return render_cfg(self.cfg)
            case DumpKind.PLAN:
                return emit_text(self.plan)

    @property
    def graph_count(self) -> int:
        """The number of graphs the program reads, one per ``argv`` position."""
        return graph_arguments(self.program)


def graph_arguments(program: Program) -> int:
    """The highest ``argv`` position passed to ``read``.

    Example:
        >>> from polyfal.corpus import corpus_source
        >>> graph_arguments(parse_source(corpus_source("cc_sections")))
        2
    """
    positions = [0]
    for fn in program.all_functions:
        for node in fn.body.walk():
            if (
                isinstance(node, MethodCall)
                and node.method == "read"
                and len(node.args) == 1
                and isinstance(arg := node.args[0], Index)
                and isinstance(arg.obj, Name)
                and arg.obj.id == "argv"
                and isinstance(arg.index, IntLit)
            ):
                positions.append(arg.index.value)
    return max(positions)


def compile_program(
    source: str, options: CompileOptions | None = None
) -> Compilation:
    """Compile DSL source text into an execution plan.

    The program is parsed, transformed into the requested mode, resolved,
    analyzed for barriers and lowered to the requested target.

    Args:
        source: The program text.
        options: The compile options. Defaults to the program as written, compiled
            synchronously for one host thread.

    Returns:
        The compilation with all intermediate representations.
    """
    options = options or CompileOptions()
    parsed = parse_source(source)
    transformed, reports = apply_mode(
        parsed, options.mode, allow_fallback=options.allow_fallback
    )
    program, _ = resolve(transformed)
    cfg, schedule = analyze(program, options.asynchronous)
    plan = lower(program, schedule, options.target_spec())
    for report in reports:
        _logger.info(report.render())
    _logger.info(
        "Compiled for %s (%s, %s): %d launch group(s), %d transfer(s)",
        options.target.value,
        options.mode.value,
        "async" if options.asynchronous else "sync",
        len(plan.launch_groups),
        len(plan.transfers),
    )
    return Compilation(options, program, tuple(reports), cfg, schedule, plan)


def read_source(path: str | Path) -> str:
    """Read a program file.

    Raises:
        OptionsError: If the file cannot be read.
    """
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as ex:
        raise OptionsError(f"Cannot read program '{path}': {ex}") from ex


def write_plan(plan: ExecutionPlan, path: str | Path) -> None:
    """Write the textual plan to a file.

    Raises:
        OptionsError: If the file cannot be written.
    """
    try:
        Path(path).write_text(emit_text(plan), encoding="utf-8")
    except OSError as ex:
        raise OptionsError(f"Cannot write plan '{path}': {ex}") from ex


def cmd_compile(
    path: str | Path, options: CompileOptions, *, emit_plan: str | Path | None = None
) -> str:
    """Compile a program file and render the requested representations.

    Without requested dumps the plan is rendered. Several dumps are concatenated
    in the order AST, CFG, plan, each introduced by a ``# <kind>`` line. With
    ``emit_plan``, the plan is also written to that file.
    """
    compilation = compile_program(read_source(path), options)
    if emit_plan is not None:
        write_plan(compilation.plan, emit_plan)
    kinds = [k for k in DumpKind if k in options.dumps] or [DumpKind.PLAN]
    if len(kinds) == 1:
        return compilation.dump(kinds[0])
    return "".join(f"# {k.value}\n{compilation.dump(k)}" for k in kinds)


##### Running #####


@define(frozen=True)
class RunSummary:
    """The outcome of ``run``."""

    result: ExecResult
    oracle: str | None = field(default=None, validator=optional(instance_of(str)))
    """The algorithm whose reference solution was checked, if any."""

    passed: bool | None = None
    """Whether the reference solution agreed."""

    def render(self) -> str:
        """The summary as ``key = value`` lines."""
        lines = [
            f"checksum {name} = {value}"
            for name, value in sorted(self.result.checksums().items())
        ]
        lines.extend(
            f"global {name} = {value}"
            for name, value in sorted(self.result.globals.items())
        )
        lines.append(f"simCost = {self.result.cost.total:g}")
        lines.append(f"transferCount = {self.result.transfer_count}")
        if self.oracle is not None:
            lines.append(f"oracle {self.oracle}: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def load_graphs(
    paths: Sequence[str | Path], *, undirected: bool = False, dedupe: bool = False
) -> list[tuple[list[Edge], int]]:
    """Read the graph files of a run."""
    return [read_graph(p, undirected=undirected, dedupe_edges=dedupe) for p in paths]


def write_stats(result: ExecResult, path: str | Path) -> None:
    """Write the per-worker work table and, next to it, the transfer log.

    The transfer log goes to ``<stem>.transfers.csv`` in the same directory.
    """
    path = Path(path)
    result.work_table().to_csv(path, index=False, lineterminator="\n")
    result.transfer_table().to_csv(
        path.with_name(f"{path.stem}.transfers.csv"), index=False, lineterminator="\n"
    )


def cmd_run(
    path: str | Path,
    graph_paths: Sequence[str | Path],
    options: CompileOptions,
    *,
    verify: str | None = None,
    stats_path: str | Path | None = None,
    undirected: bool = False,
    dedupe: bool = False,
    cap_factor: int | None = None,
    emit_plan: str | Path | None = None,
) -> RunSummary:
    """Compile a program file and execute it on graph files.

    Args:
        path: The program file.
        graph_paths: The graph files, bound to ``argv[1]``, ``argv[2]``, ...
        options: The compile options.
        verify: An algorithm whose reference solution is checked on the first
            graph after the run.
        stats_path: A CSV file receiving the per-worker work table.
        undirected: Whether graphs are loaded with both directions of every edge.
        dedupe: Whether parallel edges are collapsed to their minimum weight.
        cap_factor: The iteration cap factor of fixpoint loops.
        emit_plan: A file receiving the textual plan.

    Returns:
        The execution result with the oracle verdict.

    Raises:
        OptionsError: If fewer graphs are given than the program reads.
    """
    compilation = compile_program(read_source(path), options)
    if emit_plan is not None:
        write_plan(compilation.plan, emit_plan)
    if len(graph_paths) < compilation.graph_count:
        raise OptionsError(
            f"The program reads {compilation.graph_count} graph(s), "
            f"{len(graph_paths)} given."
        )
    graphs = load_graphs(graph_paths, undirected=undirected, dedupe=dedupe)
    stores = [build_graph_store(edges, n) for edges, n in graphs]
    result = execute(
        compilation.plan,
        stores,
        threads=options.threads,
        worklist=options.worklist_mode,
        cap_factor=cap_factor,
    )
    if stats_path is not None:
        write_stats(result, stats_path)
    if verify is None:
        return RunSummary(result)
    edges, n = graphs[0]
    return RunSummary(result, verify, verify_oracle(verify, result, edges, n))


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
