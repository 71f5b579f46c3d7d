"""Reference solutions of the shipped algorithms, computed with scipy."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from typing import TYPE_CHECKING

import numpy as np
from scipy.cluster.hierarchy import DisjointSet
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from polyfal.graphs.io import lightest_edges
from polyfal.runtime.store import Edge
from polyfal.semantic.symbols import BUILTIN_CONSTANTS

if TYPE_CHECKING:
    from polyfal.runtime.result import ExecResult

_logger = logging.getLogger(__name__)

UNREACHED = BUILTIN_CONSTANTS["MAX_INT"][1]
"""The distance reported for points that cannot be reached from the source."""


def _adjacency(edges: Sequence[Edge], n: int, *, unit: bool) -> csr_matrix:
    # Sparse construction sums parallel entries.
    unique = lightest_edges(edges)
    rows = np.array([e[0] for e in unique], dtype=np.int64)
    cols = np.array([e[1] for e in unique], dtype=np.int64)
    data = (
        np.ones(len(unique))
        if unit
        else np.array([e[2] for e in unique], dtype=np.float64)
    )
    return csr_matrix((data, (rows, cols)), shape=(n, n))


def _distances(
    edges: Sequence[Edge], n: int, source: int, *, unit: bool
) -> list[int]:
    if n == 0:
        return []
    dist = shortest_path(
        _adjacency(edges, n, unit=unit), method="D", directed=True, indices=source
    )
    return [UNREACHED if np.isinf(d) else int(d) for d in dist]


def bfs_levels(edges: Sequence[Edge], n: int, source: int = 0) -> list[int]:
    """Hop distances from ``source`` along edge direction.

    Example:
        >>> bfs_levels([(0, 1, 9), (1, 2, 9)], 4)
        [0, 1, 2, 2147483647]
    """
    return _distances(edges, n, source, unit=True)


def sssp_distances(edges: Sequence[Edge], n: int, source: int = 0) -> list[int]:
    """Weighted shortest-path distances from ``source`` by Dijkstra's algorithm.

    Example:
        >>> sssp_distances([(0, 1, 9), (0, 2, 1), (2, 1, 3)], 3)
        [0, 4, 1]
    """
    return _distances(edges, n, source, unit=False)


def component_labels(edges: Sequence[Edge], n: int) -> list[int]:
    """The smallest point id of the weakly connected component of every point.

    Example:
        >>> component_labels([(3, 1, 1), (2, 4, 1)], 5)
        [0, 1, 2, 1, 2]
    """
    if n == 0:
        return []
    _, labels = connected_components(
        _adjacency(edges, n, unit=True), directed=True, connection="weak"
    )
    smallest = np.full(labels.max() + 1, n, dtype=np.int64)
    np.minimum.at(smallest, labels, np.arange(n))
    return smallest[labels].tolist()


def mst_weight(edges: Sequence[Edge], n: int) -> int:
    """The weight of a minimum spanning forest by Kruskal's algorithm.

    Edge directions are ignored.

    Example:
        >>> mst_weight([(0, 1, 1), (1, 2, 3), (0, 2, 3)], 3)
        4
    """
    forest = DisjointSet(range(n))
    total = 0
    for s, d, w in sorted(edges, key=lambda e: e[2]):
        if forest.merge(s, d):
            total += w
    return total


##### Checks against executed programs #####


def _check_property(
    reference: Callable[[Sequence[Edge], int], list[int]], name: str
) -> Callable[[ExecResult, Sequence[Edge], int], bool]:
    def check(result: ExecResult, edges: Sequence[Edge], n: int) -> bool:
        return result.properties[f"graph.{name}"].tolist() == reference(edges, n)

    return check


def _check_mst(result: ExecResult, edges: Sequence[Edge], n: int) -> bool:
    return int(result.globals["mstWeight"]) == mst_weight(edges, n)


ORACLES: dict[str, Callable[[ExecResult, Sequence[Edge], int], bool]] = {
    "bfs": _check_property(bfs_levels, "dist"),
    "sssp": _check_property(sssp_distances, "dist"),
    "cc": _check_property(component_labels, "comp"),
    "mst": _check_mst,
}
"""Checks of a finished run of a shipped program against its reference solution."""


def verify_oracle(
    algorithm: str, result: ExecResult, edges: Sequence[Edge], n: int
) -> bool:
    """Compare the outcome of a run with the reference solution of an algorithm.

    Args:
        algorithm: One of the keys of :data:`ORACLES`.
        result: The finished run, on a graph named ``graph``.
        edges: The edges the run was executed on.
        n: The number of points.

    Returns:
        Whether the run agrees with the reference solution.

    Raises:
        ValueError: If there is no reference solution for the algorithm.
    """
    try:
        check = ORACLES[algorithm]
    except KeyError:
        raise ValueError(
            f"No reference solution for '{algorithm}'. "
            f"Available: {', '.join(ORACLES)}."
        ) from None
    passed = check(result, edges, n)
    _logger.info("Oracle %s: %s", algorithm, "PASS" if passed else "FAIL")
    return passed
