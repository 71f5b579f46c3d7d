"""Hypothesis strategies for graphs."""

import hypothesis.strategies as st

from polyfal.graphs.generators import MAX_WEIGHT, MIN_WEIGHT

point_counts = st.integers(min_value=1, max_value=24)
"""A strategy that generates small point counts."""

weights = st.integers(min_value=MIN_WEIGHT, max_value=MAX_WEIGHT)
"""A strategy that generates edge weights in the generator range."""

seeds = st.integers(min_value=0, max_value=2**32 - 1)
"""A strategy that generates generator seeds."""


@st.composite
def edge_lists(draw: st.DrawFn, n: int | None = None, max_edges: int = 60):
    """Generate ``(edges, n)`` of a directed multigraph with nonnegative weights."""
    if n is None:
        n = draw(point_counts)
    ends = st.integers(min_value=0, max_value=n - 1)
    edges = draw(
        st.lists(st.tuples(ends, ends, weights), max_size=max_edges).map(
            lambda es: [tuple(e) for e in es]
        )
    )
    return edges, n


@st.composite
def simple_edge_lists(draw: st.DrawFn):
    """Generate ``(edges, n)`` without self-loops or parallel edges."""
    edges, n = draw(edge_lists())
    seen: set[tuple[int, int]] = set()
    simple = []
    for s, d, w in edges:
        if s != d and (s, d) not in seen:
            seen.add((s, d))
            simple.append((s, d, w))
    return simple, n
