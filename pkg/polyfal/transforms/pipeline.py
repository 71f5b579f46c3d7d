"""Selection of the processing mode of a program."""

from __future__ import annotations

import logging
import warnings
from enum import Enum

from polyfal.dsl.ast import Foreach, IteratorKind, Program
from polyfal.exceptions import (
    FallbackWarning,
    NotConvertibleError,
    NotEligibleError,
    TransformError,
)
from polyfal.semantic.targets import launched_function
from polyfal.transforms.base import TransformReport
from polyfal.transforms.vertex_edge import edge_to_vertex, vertex_to_edge
from polyfal.transforms.worklist import to_worklist

_logger = logging.getLogger(__name__)


class Mode(Enum):
    """Processing modes a program can be compiled in."""

    NATIVE = "native"
    """Keep the kernels as written."""

    VERTEX = "vertex"
    """Launch kernels over points, visiting neighbours sequentially."""

    EDGE = "edge"
    """Launch kernels over edges."""

    WORKLIST = "worklist"
    """Launch vertex-based kernels over the points that changed in the last round."""


def _launch_iterators(program: Program) -> set[IteratorKind]:
    return {
        node.iterator
        for fn in program.all_functions
        for node in fn.body.walk()
        if isinstance(node, Foreach)
        and node.outer
        and launched_function(node, program) is not None
    }


def _needs_edges(program: Program) -> bool:
    """Whether a launch over points runs a kernel visiting neighbours."""
    for fn in program.all_functions:
        for node in fn.body.walk():
            if not (
                isinstance(node, Foreach)
                and node.outer
                and node.iterator is IteratorKind.POINTS
            ):
                continue
            kernel = launched_function(node, program)
            if kernel is not None and any(
                isinstance(n, Foreach) and n.iterator.is_neighbourhood
                for n in kernel.body.walk()
            ):
                return True
    return False


def apply_mode(
    program: Program, mode: Mode, *, allow_fallback: bool = False
) -> tuple[Program, list[TransformReport]]:
    """Transform a parsed program into the requested processing mode.

    Vertex/edge conversion runs first. Worklist conversion requires vertex-based
    kernels, so edge-based programs are converted to vertices before.

    Args:
        program: The parsed program.
        mode: The requested processing mode.
        allow_fallback: If ``True``, a transform that does not apply leaves the
            program in its original mode and emits a
            :class:`~polyfal.exceptions.FallbackWarning` instead of failing.

    Returns:
        The transformed program and the reports of all applied transforms.

    Raises:
        NotEligibleError: If a vertex/edge conversion is not applicable.
        NotConvertibleError: If the worklist conversion is not applicable.
    """
    reports: list[TransformReport] = []
    current = program
    try:
        match mode:
            case Mode.NATIVE:
                pass
            case Mode.VERTEX | Mode.WORKLIST:
                if IteratorKind.EDGES in _launch_iterators(current):
                    current = _require(edge_to_vertex(current), reports)
            case Mode.EDGE:
                iterators = _launch_iterators(current)
                if _needs_edges(current) or IteratorKind.EDGES not in iterators:
                    current = _require(vertex_to_edge(current), reports)
        if mode is Mode.WORKLIST:
            current = _require(to_worklist(current), reports)
    except TransformError as ex:
        if not allow_fallback:
            raise
        warnings.warn(
            f"Mode '{mode.value}' is not applicable ({ex}). The program is "
            f"compiled as written.",
            FallbackWarning,
        )
        return program, []

    for report in reports:
        _logger.debug(report.render())
    return current, reports


def _require(
    result: tuple[Program, TransformReport], reports: list[TransformReport]
) -> Program:
    program, report = result
    if not report.applied:
        worklist = report.transform == "to_worklist"
        error = NotConvertibleError if worklist else NotEligibleError
        raise error(f"{report.transform}: {report.reason}")
    reports.append(report)
    return program
