"""Degree statistics of graphs."""

from __future__ import annotations

import gc
from collections.abc import Sequence

import numpy as np
import pandas as pd
from attrs import asdict, define, field
from attrs.validators import ge, instance_of

from polyfal.runtime.store import Edge


@define(frozen=True)
class GraphStats:
    """Out-degree statistics of a directed graph."""

    n: int = field(validator=[instance_of(int), ge(0)])
    """The number of points."""

    m: int = field(validator=[instance_of(int), ge(0)])
    """The number of edges."""

    max_degree: int = field(validator=[instance_of(int), ge(0)])
    """The largest out-degree."""

    avg_degree: float = field(converter=float)
    """The mean out-degree."""

    degree_cv: float = field(converter=float)
    """The coefficient of variation of the out-degrees, zero for edgeless graphs."""

    def to_frame(self) -> pd.DataFrame:
        """The statistics as a one-row table."""
        return pd.DataFrame([asdict(self)])


def stats(edges: Sequence[Edge], n: int) -> GraphStats:
    """Compute the out-degree statistics of a graph.

    Example:
        >>> star = [(0, t, 1) for t in range(1, 10)]
        >>> s = stats(star, 10)
        >>> s.max_degree, s.avg_degree
        (9, 0.9)
    """
    sources = np.fromiter((e[0] for e in edges), dtype=np.int64, count=len(edges))
    degrees = np.bincount(sources, minlength=n)
    mean = float(degrees.mean()) if n else 0.0
    return GraphStats(
        n=n,
        m=len(edges),
        max_degree=int(degrees.max(initial=0)),
        avg_degree=mean,
        degree_cv=float(degrees.std()) / mean if mean else 0.0,
    )


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
