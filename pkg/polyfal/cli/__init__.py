"""Command-line commands: compile, run, bench and gen."""

from polyfal.cli.bench import BenchMatrix, BenchRow, GraphSpec, cmd_bench, run_bench
from polyfal.cli.commands import (
    Compilation,
    RunSummary,
    cmd_compile,
    cmd_run,
    compile_program,
)
from polyfal.cli.options import CompileOptions, DumpKind

__all__ = [
    "BenchMatrix",
    "BenchRow",
    "Compilation",
    "CompileOptions",
    "DumpKind",
    "GraphSpec",
    "RunSummary",
    "cmd_bench",
    "cmd_compile",
    "cmd_run",
    "compile_program",
    "run_bench",
]
