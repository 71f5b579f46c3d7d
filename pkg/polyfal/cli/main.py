"""The ``polyfal`` command-line interface."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from collections.abc import Sequence
from pathlib import Path

import attrs

from polyfal.cli.bench import cmd_bench
from polyfal.cli.commands import cmd_compile, cmd_run
from polyfal.cli.options import CompileOptions, DumpKind
from polyfal.exceptions import OptionsError, PolyfalError, exit_code_for
from polyfal.graphs.generators import RMAT_DEFAULTS, gen_er, gen_rmat
from polyfal.graphs.io import write_graph
from polyfal.graphs.oracles import ORACLES
from polyfal.graphs.stats import stats
from polyfal.lowering.target import CostModel, TargetKind
from polyfal.runtime.worklist import WorklistKind
from polyfal.transforms.pipeline import Mode
from polyfal.utils.environment import default_threads, log_level

try:  # For python < 3.11, use the exceptiongroup backport
    BaseExceptionGroup
except NameError:
    from exceptiongroup import BaseExceptionGroup

_logger = logging.getLogger(__name__)

COST_FLAGS = {
    field.name.replace("_", "-"): field.default for field in attrs.fields(CostModel)
}
"""Command-line flags of the cost model parameters with their defaults."""

ORACLE_FAILED = 6
"""Exit code of a run whose result disagrees with the reference solution."""


class _Parser(argparse.ArgumentParser):
    """An argument parser that reports usage errors as exceptions."""

    def error(self, message: str):  # type: ignore[override]
        raise OptionsError(f"{self.prog}: {message}")


def _add_compile_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("source", type=Path, help="The program file.")
    parser.add_argument(
        "--mode",
        choices=[m.value for m in Mode],
        default=Mode.NATIVE.value,
        help="Processing mode of the kernels. Default: as written.",
    )
    sync = parser.add_mutually_exclusive_group()
    sync.add_argument(
        "--sync",
        dest="asynchronous",
        action="store_false",
        help="Place a barrier after every launch (default).",
    )
    sync.add_argument(
        "--async",
        dest="asynchronous",
        action="store_true",
        help="Run independent launches without barriers between them.",
    )
    parser.set_defaults(asynchronous=False)
    parser.add_argument(
        "--target",
        choices=[t.value for t in TargetKind],
        default=TargetKind.HOST_THREADS.value,
        help="Execution target.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="Worker threads. Default: POLYFAL_DEFAULT_THREADS.",
    )
    parser.add_argument(
        "--devices", type=int, default=2, help="Devices of 'sim-multi-gpu'."
    )
    parser.add_argument(
        "--worklist",
        choices=[k.value for k in WorklistKind],
        default=None,
        help="Worklist scheduling. Default: delta if --delta is given, else fifo.",
    )
    parser.add_argument(
        "--delta",
        type=float,
        default=None,
        help="Delta-stepping bucket width. Default: mean edge weight, at least 1.",
    )
    parser.add_argument(
        "--cost-model",
        type=Path,
        default=None,
        help="JSON file with cost model parameters.",
    )
    for name, default in COST_FLAGS.items():
        parser.add_argument(
            f"--{name}",
            type=float,
            default=None,
            help=f"Cost parameter overriding --cost-model. Default: {default:g}.",
        )
    parser.add_argument(
        "--emit-plan",
        type=Path,
        default=None,
        help="Write the textual plan to this file.",
    )
    parser.add_argument(
        "--force",
        action="store_true",
        help="Compile restricted mode/target combinations anyway.",
    )
    parser.add_argument(
        "--allow-fallback",
        action="store_true",
        help="Keep the original mode if a transform is not applicable.",
    )


def _options(args: argparse.Namespace, dumps: Sequence[str] = ()) -> CompileOptions:
    try:
        cost = CostModel.from_json(args.cost_model) if args.cost_model else CostModel()
        dests = [flag.replace("-", "_") for flag in COST_FLAGS]
        overrides = {d: getattr(args, d) for d in dests if getattr(args, d) is not None}
        cost = attrs.evolve(cost, **overrides)
        return CompileOptions(
            mode=args.mode,
            asynchronous=args.asynchronous,
            target=args.target,
            threads=default_threads() if args.threads is None else args.threads,
            devices=args.devices,
            delta=args.delta,
            worklist=args.worklist,
            dumps=dumps,
            force=args.force,
            allow_fallback=args.allow_fallback,
            cost=cost,
        )
    except (ValueError, TypeError, OSError) as ex:
        raise OptionsError(str(ex)) from ex


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser of all subcommands."""
    parser = _Parser(
        prog="polyfal",
        description="Compile and run graph programs in several processing modes.",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log more; give twice for debug output.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    compile_ = commands.add_parser("compile", help="Compile a program.")
    _add_compile_arguments(compile_)
    for kind in DumpKind:
        compile_.add_argument(
            f"--dump-{kind.value}",
            dest="dumps",
            action="append_const",
            const=kind.value,
            help=f"Print the {kind.value.upper()}.",
        )

    run = commands.add_parser("run", help="Compile and execute a program.")
    _add_compile_arguments(run)
    run.add_argument(
        "graphs", type=Path, nargs="+", help="Graph files, bound to argv[1], ..."
    )
    run.add_argument(
        "--verify-oracle",
        choices=sorted(ORACLES),
        default=None,
        help="Check the result against a reference solution.",
    )
    run.add_argument("--stats", type=Path, default=None, help="Work table CSV file.")
    run.add_argument(
        "--undirected", action="store_true", help="Add the reverse of every edge."
    )
    run.add_argument(
        "--dedupe",
        action="store_true",
        help="Collapse parallel edges to their minimum weight.",
    )
    run.add_argument(
        "--iteration-cap-factor",
        type=int,
        default=None,
        help="Fixpoint loops fail after factor * max(n, 10) iterations.",
    )

    bench = commands.add_parser("bench", help="Run a benchmark matrix.")
    bench.add_argument("matrix", type=Path, help="JSON benchmark matrix.")
    bench.add_argument("-o", "--output", type=Path, default=None, help="CSV file.")

    gen = commands.add_parser("gen", help="Generate a random graph.")
    gen.add_argument("kind", choices=["er", "rmat"])
    gen.add_argument("--n", type=int, required=True, help="Number of points.")
    gen.add_argument("--m", type=int, required=True, help="Number of edges.")
    gen.add_argument("--seed", type=int, default=0, help="Random seed.")
    for name, default in zip("abcd", RMAT_DEFAULTS):
        gen.add_argument(
            f"--{name}", type=float, default=default, help="RMAT probability."
        )
    gen.add_argument("-o", "--output", type=Path, required=True, help="Graph file.")
    return parser


def _run(args: argparse.Namespace) -> int:
    match args.command:
        case "compile":
            options = _options(args, args.dumps or ())
            text = cmd_compile(args.source, options, emit_plan=args.emit_plan)
            sys.stdout.write(text)
        case "run":
            summary = cmd_run(
                args.source,
                args.graphs,
                _options(args),
                verify=args.verify_oracle,
                stats_path=args.stats,
                undirected=args.undirected,
                dedupe=args.dedupe,
                cap_factor=args.iteration_cap_factor,
                emit_plan=args.emit_plan,
            )
            sys.stdout.write(summary.render())
            if summary.passed is False:
                return ORACLE_FAILED
        case "bench":
            sys.stdout.write(cmd_bench(args.matrix, args.output))
        case "gen":
            if args.kind == "er":
                edges = gen_er(args.n, args.m, args.seed)
            else:
                edges = gen_rmat(
                    args.n, args.m, args.seed, args.a, args.b, args.c, args.d
                )
            write_graph(args.output, edges, args.n)
            s = stats(edges, args.n)
            _logger.info(
                "Wrote %s: n=%d, m=%d, max degree %d",
                args.output,
                s.n,
                s.m,
                s.max_degree,
            )
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command-line interface.

    Args:
        argv: The arguments without the program name. Defaults to ``sys.argv``.

    Returns:
        The exit code: 0 on success, 1 for usage errors, 2 for syntax and
        semantic errors, 3 for inapplicable transforms, 4 for lowering errors,
        5 for runtime and graph errors and 6 for failed oracle checks.
    """
    try:
        args = build_parser().parse_args(argv)
    except OptionsError as ex:
        sys.stderr.write(f"error: {ex}\n")
        return exit_code_for(ex)

    level = {0: log_level(), 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)

    with warnings.catch_warnings():
        warnings.simplefilter("always")
        try:
            return _run(args)
        except (PolyfalError, BaseExceptionGroup) as ex:
            errors = (
                ex.exceptions if isinstance(ex, BaseExceptionGroup) else (ex,)
            )
            for error in errors:
                sys.stderr.write(f"error: {error}\n")
            return exit_code_for(ex)


if __name__ == "__main__":
    sys.exit(main())
