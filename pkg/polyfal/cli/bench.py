"""Benchmark matrices: programs × graphs × compile options."""

from __future__ import annotations

import gc
import itertools
import logging
import time
from collections.abc import Iterator
from enum import Enum
from pathlib import Path

import pandas as pd
from attrs import astuple, define, field
from attrs.converters import optional as optional_converter
from attrs.validators import deep_iterable, ge, instance_of, min_len, optional

from polyfal.cli.commands import compile_program, read_source
from polyfal.cli.options import CompileOptions
from polyfal.corpus import CORPUS, corpus_source
from polyfal.exceptions import PolyfalError
from polyfal.graphs.generators import gen_er, gen_rmat
from polyfal.graphs.io import read_graph, symmetrize
from polyfal.lowering.target import TargetKind
from polyfal.runtime import build_graph_store, execute, load_imbalance
from polyfal.runtime.store import Edge
from polyfal.runtime.worklist import WorklistKind
from polyfal.serialization import SerialMixin
from polyfal.transforms.pipeline import Mode

try:  # For python < 3.11, use the exceptiongroup backport
    BaseExceptionGroup
except NameError:
    from exceptiongroup import BaseExceptionGroup

_logger = logging.getLogger(__name__)


class GraphKind(Enum):
    """Sources of benchmark graphs."""

    ER = "er"
    RMAT = "rmat"
    PATH = "path"
    STAR = "star"
    RING = "ring"
    FILE = "file"


@define(frozen=True)
class GraphSpec(SerialMixin):
    """A benchmark graph, generated or read from a file.

    Example:
        >>> GraphSpec("s", "star", n=4).build()
        ([(0, 1, 1), (0, 2, 1), (0, 3, 1)], 4)
    """

    name: str = field(validator=instance_of(str))
    """The label of the graph in result rows."""

    kind: GraphKind = field(converter=GraphKind)
    n: int = field(default=0, validator=[instance_of(int), ge(0)])
    m: int = field(default=0, validator=[instance_of(int), ge(0)])
    """The edge count of random graphs."""

    seed: int = field(default=0, validator=[instance_of(int), ge(0)])
    path: str | None = field(default=None, validator=optional(instance_of(str)))
    """The graph file of file graphs."""

    undirected: bool = field(default=False, validator=instance_of(bool))
    """Whether the reverse of every edge is added."""

    def build(self) -> tuple[list[Edge], int]:
        """The edges and the number of points of the graph.

        Raises:
            ValueError: If a file graph has no path.
        """
        n = self.n
        match self.kind:
            case GraphKind.ER:
                edges = gen_er(n, self.m, self.seed)
            case GraphKind.RMAT:
                edges = gen_rmat(n, self.m, self.seed)
            case GraphKind.PATH:
                edges = [(i, i + 1, 1) for i in range(n - 1)]
            case GraphKind.STAR:
                edges = [(0, i, 1) for i in range(1, n)]
            case GraphKind.RING:
                edges = [(i, (i + 1) % n, 1) for i in range(n)] if n > 1 else []
            case GraphKind.FILE:
                if self.path is None:
                    raise ValueError(f"File graph '{self.name}' has no path.")
                edges, n = read_graph(self.path)
        if self.undirected:
            edges = symmetrize(edges)
        return edges, n


def _tuple_of(cls: type[Enum]):
    return lambda values: tuple(cls(v) for v in values)


@define(frozen=True)
class BenchMatrix(SerialMixin):
    """The cells of a benchmark: every program on every graph with every option."""

    programs: tuple[str, ...] = field(
        converter=tuple, validator=[min_len(1), deep_iterable(instance_of(str))]
    )
    """Names of shipped programs or paths of program files."""

    graphs: tuple[GraphSpec, ...] = field(
        converter=tuple, validator=[min_len(1), deep_iterable(instance_of(GraphSpec))]
    )
    modes: tuple[Mode, ...] = field(default=(Mode.NATIVE,), converter=_tuple_of(Mode))
    asynchronous: tuple[bool, ...] = field(default=(False,), converter=tuple)
    targets: tuple[TargetKind, ...] = field(
        default=(TargetKind.HOST_THREADS,), converter=_tuple_of(TargetKind)
    )
    threads: tuple[int, ...] = field(
        default=(1,), converter=tuple, validator=deep_iterable(ge(1))
    )
    delta: float | None = field(default=None)
    """The bucket width used by worklist cells."""

    worklist: WorklistKind | None = field(
        default=None, converter=optional_converter(WorklistKind)
    )
    """The scheduling of worklist cells. Delta-stepping if a delta is given."""

    def cells(self) -> Iterator[tuple[str, GraphSpec, dict]]:
        """Program, graph and compile option arguments of every cell."""
        for program, graph, mode, async_, target, threads in itertools.product(
            self.programs,
            self.graphs,
            self.modes,
            self.asynchronous,
            self.targets,
            self.threads,
        ):
            options = dict(
                mode=mode, asynchronous=async_, target=target, threads=threads
            )
            if mode is Mode.WORKLIST:
                options["delta"] = self.delta
                options["worklist"] = self.worklist
            yield program, graph, options


@define(frozen=True)
class BenchRow:
    """One result row of a benchmark."""

    program: str
    graph: str
    mode: str
    sync: str
    target: str
    threads: int
    wall_millis: float = 0.0
    sim_cost: float = 0.0
    transfer_count: int = 0
    load_imbalance_cv: float = 0.0
    kernel_invocations: int = 0
    status: str = "OK"
    """``OK``, or ``FAILED`` if the cell did not compile or run."""

    error: str = ""


COLUMNS = (
    "program",
    "graph",
    "mode",
    "sync",
    "target",
    "threads",
    "wallMillis",
    "simCost",
    "transferCount",
    "loadImbalanceCV",
    "kernelInvocations",
    "status",
    "error",
)
"""CSV column names, in the field order of :class:`BenchRow`."""


def _source(program: str) -> str:
    return corpus_source(program) if program in CORPUS else read_source(program)


def run_cell(program: str, graph: GraphSpec, options: dict) -> BenchRow:
    """Compile and execute one cell. Failures produce a ``FAILED`` row."""
    head = dict(
        program=program,
        graph=graph.name,
        mode=Mode(options["mode"]).value,
        sync="async" if options["asynchronous"] else "sync",
        target=TargetKind(options["target"]).value,
        threads=options["threads"],
    )
    try:
        compile_options = CompileOptions(**options)
        compilation = compile_program(_source(program), compile_options)
        edges, n = graph.build()
        stores = [
            build_graph_store(edges, n) for _ in range(max(compilation.graph_count, 1))
        ]
        start = time.perf_counter()
        result = execute(
            compilation.plan,
            stores,
            threads=compile_options.threads,
            worklist=compile_options.worklist_mode,
        )
        wall = (time.perf_counter() - start) * 1000.0
    except (PolyfalError, BaseExceptionGroup) as ex:
        _logger.warning("Cell %s failed: %s", head, ex)
        return BenchRow(**head, status="FAILED", error=str(ex))

    return BenchRow(
        **head,
        wall_millis=wall,
        sim_cost=result.cost.total,
        transfer_count=result.transfer_count,
        load_imbalance_cv=load_imbalance(result),
        kernel_invocations=result.kernel_invocations,
    )


def run_bench(matrix: BenchMatrix) -> pd.DataFrame:
    """Run every cell of a matrix.

    Returns:
        One row per cell, with the columns :data:`COLUMNS`.
    """
    rows = [astuple(run_cell(*cell)) for cell in matrix.cells()]
    _logger.info("Benchmark finished: %d cell(s)", len(rows))
    return pd.DataFrame(rows, columns=list(COLUMNS))


def cmd_bench(matrix_path: str | Path, out: str | Path | None = None) -> str:
    """Run a matrix given as a JSON file and render the result as CSV.

    Args:
        matrix_path: The JSON file describing a :class:`BenchMatrix`.
        out: An optional file the CSV is written to as well.

    Returns:
        The CSV text.
    """
    matrix = BenchMatrix.from_json(Path(matrix_path))
    csv = run_bench(matrix).to_csv(index=False, lineterminator="\n")
    if out is not None:
        Path(out).write_text(csv, encoding="utf-8")
    return csv


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
