"""Graph storage: CSR adjacency, edge list and property arrays."""

from __future__ import annotations

import gc
import logging
from collections.abc import Iterable
from enum import Enum

import numpy as np
from attrs import define, field
from attrs.validators import ge, instance_of

from polyfal.exceptions import DslRuntimeError, GraphError

_logger = logging.getLogger(__name__)

Edge = tuple[int, int, int]
"""An edge as ``(source, destination, weight)``."""


class StorageMode(Enum):
    """The processing mode a store is built for."""

    VERTEX = "vertex"
    EDGE = "edge"
    WORKLIST = "worklist"


def _csr(n: int, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and the stable order of edges grouped by ``rows``."""
    order = np.argsort(rows, kind="stable")
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
    return offsets, order


@define(eq=False)
class GraphStore:
    """A directed multigraph with CSR adjacency and its edge list.

    Edge ids are positions in the edge list, which keeps the input order. The
    CSR groups edges by source with ties in input order. The reverse CSR used by
    in-neighbour iteration is built on first use.

    Example:
        >>> store = build_graph_store([(0, 1, 5), (0, 2, 3), (1, 2, 1)], 3)
        >>> store.csr_offsets.tolist()
        [0, 2, 3, 3]
    """

    n: int = field(validator=[instance_of(int), ge(0)])
    """The number of points."""

    src: np.ndarray = field(repr=False)
    dst: np.ndarray = field(repr=False)
    weight: np.ndarray = field(repr=False)

    csr_offsets: np.ndarray = field(init=False, repr=False)
    csr_targets: np.ndarray = field(init=False, repr=False)
    csr_weights: np.ndarray = field(init=False, repr=False)
    csr_edges: np.ndarray = field(init=False, repr=False)
    """The edge id of every CSR slot."""

    _in_csr: tuple[list[int], list[int], list[int]] | None = field(
        default=None, init=False, repr=False
    )
    _out_lists: tuple[list[int], list[int], list[int]] | None = field(
        default=None, init=False, repr=False
    )
    _edge_columns: tuple[list[int], list[int], list[int]] | None = field(
        default=None, init=False, repr=False
    )
    _weights: dict[tuple[int, int], int] | None = field(
        default=None, init=False, repr=False
    )

    def __attrs_post_init__(self) -> None:
        offsets, order = _csr(self.n, self.src)
        self.csr_offsets = offsets
        self.csr_targets = self.dst[order]
        self.csr_weights = self.weight[order]
        self.csr_edges = order.astype(np.int64)

    @property
    def m(self) -> int:
        """The number of edges."""
        return len(self.src)

    @property
    def edge_list(self) -> list[Edge]:
        """The edges in input order."""
        return list(zip(*self.edge_columns))

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.csr_offsets)

    @property
    def max_degree(self) -> int:
        """The largest out-degree."""
        return int(self.out_degrees.max(initial=0))

    ##### Adjacency as lists, for element-wise access by kernels #####

    @property
    def out_lists(self) -> tuple[list[int], list[int], list[int]]:
        """CSR offsets, targets and edge ids as Python lists."""
        if self._out_lists is None:
            self._out_lists = (
                self.csr_offsets.tolist(),
                self.csr_targets.tolist(),
                self.csr_edges.tolist(),
            )
        return self._out_lists

    @property
    def edge_columns(self) -> tuple[list[int], list[int], list[int]]:
        """Sources, destinations and weights of the edges as Python lists."""
        if self._edge_columns is None:
            self._edge_columns = (
                self.src.tolist(),
                self.dst.tolist(),
                self.weight.tolist(),
            )
        return self._edge_columns

    @property
    def in_lists(self) -> tuple[list[int], list[int], list[int]]:
        """Reverse CSR offsets, sources and edge ids as Python lists."""
        if self._in_csr is None:
            offsets, order = _csr(self.n, self.dst)
            self._in_csr = (
                offsets.tolist(),
                self.src[order].tolist(),
                order.tolist(),
            )
            _logger.debug("Built reverse CSR for %d points", self.n)
        return self._in_csr

    def getweight(self, p: int, t: int) -> int:
        """The smallest weight of the edges from ``p`` to ``t``.

        Raises:
            DslRuntimeError: If there is no such edge.
        """
        if self._weights is None:
            weights: dict[tuple[int, int], int] = {}
            for s, d, w in self.edge_list:
                if (s, d) not in weights or w < weights[(s, d)]:
                    weights[(s, d)] = w
            self._weights = weights
        try:
            return self._weights[(p, t)]
        except KeyError:
            raise DslRuntimeError(f"There is no edge from {p} to {t}.") from None


def build_graph_store(
    edges: Iterable[Edge],
    n: int,
    mode: StorageMode | str = StorageMode.VERTEX,
) -> GraphStore:
    """Build the storage of a graph.

    The CSR is built in every mode since weight lookups and worklists need it; the
    edge list is kept verbatim for edge-based kernels.

    Args:
        edges: The edges as ``(source, destination, weight)`` triples.
        n: The number of points.
        mode: The processing mode the graph is loaded for.

    Returns:
        The graph store.

    Raises:
        GraphError: If an endpoint is out of range or a weight is negative.
    """
    mode = StorageMode(mode)
    array = np.asarray(list(edges), dtype=np.int64).reshape(-1, 3)
    src, dst, weight = array[:, 0].copy(), array[:, 1].copy(), array[:, 2].copy()
    if n < 0:
        raise GraphError(f"The number of points must be nonnegative. Given: {n}.")
    bad = (src < 0) | (src >= n) | (dst < 0) | (dst >= n)
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        raise GraphError(
            f"Edge {index} ({src[index]} -> {dst[index]}) has an endpoint outside "
            f"[0, {n})."
        )
    if (weight < 0).any():
        index = int(np.flatnonzero(weight < 0)[0])
        raise GraphError(f"Edge {index} has the negative weight {weight[index]}.")

    store = GraphStore(int(n), src, dst, weight)
    _logger.debug("Built %s store: n=%d, m=%d", mode.value, n, store.m)
    return store


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
