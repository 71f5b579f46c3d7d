"""Reading and writing graphs in the edge-list format.

A graph file starts with the header ``p <n> <m>`` followed by exactly ``m`` lines
``<src> <dst> <weight>`` with 0-based point ids and nonnegative integer weights.
Fields are separated by whitespace. Empty lines after the last edge are ignored.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Iterable, Sequence
from pathlib import Path

from polyfal.exceptions import DuplicateEdgeWarning, GraphFormatError, GraphIoError
from polyfal.runtime.store import Edge

_logger = logging.getLogger(__name__)


def _integers(fields: list[str], line: int, text: str) -> list[int]:
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise GraphFormatError("Fields must be integers.", line, text) from None


def symmetrize(edges: Iterable[Edge]) -> list[Edge]:
    """Add the reverse of every edge directly after it, except for self-loops.

    Example:
        >>> symmetrize([(0, 1, 4), (2, 2, 1)])
        [(0, 1, 4), (1, 0, 4), (2, 2, 1)]
    """
    result = []
    for s, d, w in edges:
        result.append((s, d, w))
        if s != d:
            result.append((d, s, w))
    return result


def lightest_edges(edges: Iterable[Edge]) -> list[Edge]:
    """The lightest edge of every ordered pair, in order of first occurrence."""
    best: dict[tuple[int, int], int] = {}
    for s, d, w in edges:
        if (s, d) not in best or w < best[(s, d)]:
            best[(s, d)] = w
    return [(s, d, w) for (s, d), w in best.items()]


def dedupe(edges: Iterable[Edge]) -> list[Edge]:
    """Keep one edge per ordered pair, with the minimum weight.

    Edges stay at the position of the first occurrence of their pair. A
    :class:`~polyfal.exceptions.DuplicateEdgeWarning` reports collapsed edges.

    Example:
        >>> import warnings
        >>> with warnings.catch_warnings():
        ...     warnings.simplefilter("ignore")
        ...     dedupe([(0, 1, 5), (1, 2, 1), (0, 1, 3)])
        [(0, 1, 3), (1, 2, 1)]
    """
    edges = list(edges)
    lightest = lightest_edges(edges)
    if dropped := len(edges) - len(lightest):
        warnings.warn(
            f"{dropped} duplicate edge(s) collapsed to their minimum weight.",
            DuplicateEdgeWarning,
            stacklevel=2,
        )
    return lightest


def parse_graph(
    text: str, *, undirected: bool = False, dedupe_edges: bool = False
) -> tuple[list[Edge], int]:
    """Parse the contents of a graph file.

    Args:
        text: The file contents.
        undirected: Whether every edge is added in both directions.
        dedupe_edges: Whether parallel edges are collapsed to the minimum weight.

    Returns:
        The edges in file order and the number of points.

    Raises:
        GraphFormatError: If the text does not follow the edge-list format.

    Example:
        >>> parse_graph("p 3 2\\n0 1 5\\n1 2 7\\n")
        ([(0, 1, 5), (1, 2, 7)], 3)
    """
    lines = text.splitlines()
    if not lines:
        raise GraphFormatError("Missing header 'p <n> <m>'.", 1)
    header = lines[0].split()
    if len(header) != 3 or header[0] != "p":
        raise GraphFormatError("Expected header 'p <n> <m>'.", 1, lines[0])
    n, m = _integers(header[1:], 1, lines[0])
    if n < 0 or m < 0:
        raise GraphFormatError("Counts must be nonnegative.", 1, lines[0])

    edges: list[Edge] = []
    for index in range(m):
        number = index + 2
        if number > len(lines):
            raise GraphFormatError(
                f"Expected {m} edge lines, found {index}.", number
            )
        line = lines[index + 1]
        fields = line.split()
        if len(fields) != 3:
            raise GraphFormatError("Expected '<src> <dst> <weight>'.", number, line)
        s, d, w = _integers(fields, number, line)
        if not (0 <= s < n and 0 <= d < n):
            raise GraphFormatError(f"Point id outside [0, {n}).", number, line)
        if w < 0:
            raise GraphFormatError("Weights must be nonnegative.", number, line)
        edges.append((s, d, w))

    for offset, line in enumerate(lines[m + 1 :], start=m + 2):
        if line.strip():
            raise GraphFormatError(
                f"More edge lines than the {m} declared.", offset, line
            )

    if undirected:
        edges = symmetrize(edges)
    if dedupe_edges:
        edges = dedupe(edges)
    return edges, n


def read_graph(
    path: str | Path, *, undirected: bool = False, dedupe_edges: bool = False
) -> tuple[list[Edge], int]:
    """Read a graph file.

    Args:
        path: The file path.
        undirected: Whether every edge is added in both directions.
        dedupe_edges: Whether parallel edges are collapsed to the minimum weight.

    Returns:
        The edges in file order and the number of points.

    Raises:
        GraphIoError: If the file cannot be read.
        GraphFormatError: If the file does not follow the edge-list format.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as ex:
        raise GraphIoError(f"Cannot read graph file '{path}': {ex}") from ex
    edges, n = parse_graph(text, undirected=undirected, dedupe_edges=dedupe_edges)
    _logger.debug("Read %s: n=%d, m=%d", path, n, len(edges))
    return edges, n


def format_graph(edges: Sequence[Edge], n: int) -> str:
    """Render a graph in the edge-list format.

    Example:
        >>> print(format_graph([(0, 1, 5)], 2), end="")
        p 2 1
        0 1 5
    """
    lines = [f"p {n} {len(edges)}"]
    lines.extend(f"{s} {d} {w}" for s, d, w in edges)
    return "\n".join(lines) + "\n"


def write_graph(path: str | Path, edges: Sequence[Edge], n: int) -> None:
    """Write a graph file.

    Raises:
        GraphIoError: If the file cannot be written.
    """
    try:
        Path(path).write_text(format_graph(edges, n), encoding="utf-8", newline="\n")
    except OSError as ex:
        raise GraphIoError(f"Cannot write graph file '{path}': {ex}") from ex
    _logger.debug("Wrote %s: n=%d, m=%d", path, n, len(edges))
