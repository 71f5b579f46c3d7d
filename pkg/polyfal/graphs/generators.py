"""Random graph generators."""

from __future__ import annotations

import logging
import math

import numpy as np

from polyfal.exceptions import ParamError
from polyfal.graphs.random import Xoshiro256
from polyfal.runtime.store import Edge

_logger = logging.getLogger(__name__)

MIN_WEIGHT = 1
"""The smallest generated edge weight."""

MAX_WEIGHT = 100
"""The largest generated edge weight."""

RMAT_DEFAULTS = (0.57, 0.19, 0.19, 0.05)
"""The default quadrant probabilities ``(a, b, c, d)`` of the RMAT generator."""


def _check_sizes(n: int, m: int) -> None:
    if n < 0 or m < 0:
        raise ParamError(
            f"Point and edge counts must be nonnegative. Given: n={n}, m={m}."
        )


def _edges(src: np.ndarray, dst: np.ndarray, weight: np.ndarray) -> list[Edge]:
    return list(zip(src.tolist(), dst.tolist(), weight.tolist()))


def gen_er(n: int, m: int, seed: int) -> list[Edge]:
    """Generate a directed Erdős–Rényi multigraph.

    Edges are drawn uniformly with replacement from all ordered pairs of distinct
    points, so parallel edges can occur but self-loops cannot. Source, destination
    and weight of all edges are drawn as three consecutive blocks of the stream.

    Args:
        n: The number of points.
        m: The number of edges.
        seed: The seed of the random stream.

    Returns:
        The edges, with weights uniform in ``[MIN_WEIGHT, MAX_WEIGHT]``.

    Raises:
        ParamError: If a count is negative or ``m`` exceeds ``n * (n - 1)``.

    Example:
        >>> gen_er(10, 0, 3)
        []
        >>> gen_er(50, 20, 7) == gen_er(50, 20, 7)
        True
    """
    _check_sizes(n, m)
    if m > n * (n - 1):
        raise ParamError(
            f"A graph with {n} points has at most {n * (n - 1)} distinct "
            f"directed edges. Requested: {m}."
        )
    if m == 0:
        return []
    rng = Xoshiro256(seed)
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n - 1, m)
    dst = dst + (dst >= src)
    weight = rng.integers(MIN_WEIGHT, MAX_WEIGHT + 1, m)
    _logger.debug("Generated ER graph: n=%d, m=%d, seed=%d", n, m, seed)
    return _edges(src, dst, weight)


def gen_rmat(
    n: int,
    m: int,
    seed: int,
    a: float = RMAT_DEFAULTS[0],
    b: float = RMAT_DEFAULTS[1],
    c: float = RMAT_DEFAULTS[2],
    d: float = RMAT_DEFAULTS[3],
) -> list[Edge]:
    """Generate a directed RMAT graph by recursive quadrant sampling.

    Every edge descends ``log2(n)`` levels of the adjacency matrix, choosing the
    top-left, top-right, bottom-left or bottom-right quadrant with probabilities
    ``a``, ``b``, ``c`` and ``d``. Point ids are not permuted, so low ids carry the
    highest degrees. Self-loops and parallel edges are kept.

    Args:
        n: The number of points, a power of two.
        m: The number of edges.
        seed: The seed of the random stream.
        a: The probability of the top-left quadrant.
        b: The probability of the top-right quadrant.
        c: The probability of the bottom-left quadrant.
        d: The probability of the bottom-right quadrant.

    Returns:
        The edges, with weights uniform in ``[MIN_WEIGHT, MAX_WEIGHT]``.

    Raises:
        ParamError: If ``n`` is not a power of two, a count or probability is
            negative, or the probabilities do not sum to one.
    """
    _check_sizes(n, m)
    if n < 1 or n & (n - 1):
        raise ParamError(f"The RMAT point count must be a power of two. Given: {n}.")
    probs = (a, b, c, d)
    if min(probs) < 0:
        raise ParamError(f"Quadrant probabilities must be nonnegative. Given: {probs}.")
    if not math.isclose(sum(probs), 1.0, rel_tol=0.0, abs_tol=1e-9):
        raise ParamError(f"Quadrant probabilities must sum to 1. Given: {probs}.")
    if m == 0:
        return []

    rng = Xoshiro256(seed)
    src = np.zeros(m, dtype=np.int64)
    dst = np.zeros(m, dtype=np.int64)
    for level in range(n.bit_length() - 1):
        draw = rng.random(m)
        right = ((draw >= a) & (draw < a + b)) | (draw >= a + b + c)
        lower = draw >= a + b
        src = 2 * src + lower
        dst = 2 * dst + right
        _logger.debug("RMAT level %d sampled", level)
    weight = rng.integers(MIN_WEIGHT, MAX_WEIGHT + 1, m)
    _logger.debug("Generated RMAT graph: n=%d, m=%d, seed=%d", n, m, seed)
    return _edges(src, dst, weight)
