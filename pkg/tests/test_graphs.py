"""Tests for graph files, generators and reference solutions."""

import warnings

import pytest
from hypothesis import given
from pytest import param

from polyfal.exceptions import DuplicateEdgeWarning
from polyfal.graphs import (
    Xoshiro256,
    bfs_levels,
    component_labels,
    dedupe,
    format_graph,
    gen_er,
    gen_rmat,
    mst_weight,
    parse_graph,
    read_graph,
    sssp_distances,
    stats,
    symmetrize,
)
from polyfal.graphs.generators import MAX_WEIGHT, MIN_WEIGHT
from tests.hypothesis_strategies.graphs import edge_lists, seeds


@given(edge_lists())
def test_format_is_parsed_back(graph):
    """A formatted graph parses to the same edges."""
    edges, n = graph
    assert parse_graph(format_graph(edges, n)) == (edges, n)


def test_read_written_file(graph_file, er_edges, n_points):
    """Graph files are read in file order."""
    assert read_graph(graph_file) == (er_edges, n_points)


def test_trailing_empty_lines_are_ignored():
    """Blank lines after the last edge are allowed."""
    assert parse_graph("p 2 1\n0 1 4\n\n  \n") == ([(0, 1, 4)], 2)


def test_undirected_reading():
    """Undirected reading adds the reverse of every edge."""
    edges, _ = parse_graph("p 3 2\n0 1 4\n2 2 1\n", undirected=True)
    assert edges == [(0, 1, 4), (1, 0, 4), (2, 2, 1)]


def test_dedupe_keeps_lightest_edge():
    """Parallel edges collapse to the minimum weight with a warning."""
    with pytest.warns(DuplicateEdgeWarning, match="1 duplicate edge"):
        edges = dedupe([(0, 1, 5), (1, 2, 1), (0, 1, 3)])
    assert edges == [(0, 1, 3), (1, 2, 1)]


def test_dedupe_is_silent_without_duplicates():
    """Simple graphs pass through unchanged."""
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert dedupe([(0, 1, 5), (1, 0, 5)]) == [(0, 1, 5), (1, 0, 5)]


##### Generators #####


@given(seeds)
def test_er_is_deterministic(seed):
    """A seed always yields the same graph."""
    assert gen_er(30, 50, seed) == gen_er(30, 50, seed)


def test_er_edges():
    """ER graphs have the requested size, no self-loops and bounded weights."""
    edges = gen_er(40, 200, seed=3)
    assert len(edges) == 200
    assert all(s != d for s, d, _ in edges)
    assert all(0 <= s < 40 and 0 <= d < 40 for s, d, _ in edges)
    assert all(MIN_WEIGHT <= w <= MAX_WEIGHT for _, _, w in edges)


def test_seeds_give_different_graphs():
    """Different seeds give different graphs."""
    assert gen_er(30, 50, seed=1) != gen_er(30, 50, seed=2)


def test_rmat_edges():
    """RMAT graphs have the requested size and endpoints in range."""
    edges = gen_rmat(64, 500, seed=5)
    assert len(edges) == 500
    assert all(0 <= s < 64 and 0 <= d < 64 for s, d, _ in edges)
    assert edges == gen_rmat(64, 500, seed=5)


def test_rmat_skews_degrees():
    """The default quadrant probabilities concentrate edges on low ids."""
    n = 256
    skewed = stats(gen_rmat(n, 4000, seed=9), n)
    uniform = stats(gen_rmat(n, 4000, seed=9, a=0.25, b=0.25, c=0.25, d=0.25), n)
    assert skewed.degree_cv > uniform.degree_cv


def test_stream_is_fixed():
    """The random stream of a seed never changes."""
    first = Xoshiro256(42).next_u64(130)
    assert first.tolist() == Xoshiro256(42).next_u64(130).tolist()
    draws = Xoshiro256(42).random(1000)
    assert ((draws >= 0) & (draws < 1)).all()


def test_stats():
    """Statistics describe the out-degrees."""
    result = stats([(0, 1, 1), (0, 2, 1), (1, 2, 1)], 4)
    assert (result.n, result.m, result.max_degree) == (4, 3, 2)
    assert result.avg_degree == pytest.approx(0.75)
    assert list(result.to_frame().columns) == [
        "n",
        "m",
        "max_degree",
        "avg_degree",
        "degree_cv",
    ]


@pytest.mark.parametrize(
    ("edges", "n", "max_degree", "avg_degree"),
    [
        param([(0, i, 1) for i in range(1, 10)], 10, 9, 0.9, id="star"),
        param([(0, 1, 1), (1, 2, 1), (2, 0, 1)], 3, 1, 1.0, id="triangle"),
    ],
)
def test_stats_of_small_graphs(edges, n, max_degree, avg_degree):
    """Degree statistics of hand-counted graphs."""
    result = stats(edges, n)
    assert result.max_degree == max_degree
    assert result.avg_degree == pytest.approx(avg_degree)


def test_stats_of_empty_graph():
    """A graph without points has zero statistics."""
    result = stats([], 0)
    assert (result.max_degree, result.avg_degree, result.degree_cv) == (0, 0.0, 0.0)


@pytest.mark.slow
def test_er_degrees_stay_small():
    """Uniform random graphs have a small maximum degree."""
    result = stats(gen_er(25000, 100000, seed=42), 25000)
    assert 10 <= result.max_degree <= 30


@pytest.mark.slow
def test_rmat_has_hubs():
    """RMAT graphs have hubs far above the average degree."""
    n = 2**15
    result = stats(gen_rmat(n, 2**18, seed=7), n)
    assert result.max_degree >= 50 * result.avg_degree

##### Reference solutions #####


def test_reference_solutions(path_edges, n_points):
    """Reference solutions on a directed path."""
    assert bfs_levels(path_edges, n_points) == list(range(n_points))
    assert sssp_distances(path_edges, n_points) == list(range(n_points))
    assert component_labels(path_edges, n_points) == [0] * n_points
    assert mst_weight(path_edges, n_points) == n_points - 1


def test_reference_uses_lightest_parallel_edge():
    """Parallel edges count with their minimum weight."""
    assert sssp_distances([(0, 1, 9), (0, 1, 2)], 2) == [0, 2]


def test_component_labels(two_components):
    """Every point is labelled with the smallest id of its component."""
    edges, n = two_components
    assert component_labels(edges, n) == [0, 0, 0, 3, 3, 3]
    assert mst_weight(edges, n) == 2 + 3 + 1 + 1


def test_symmetrize_keeps_self_loops_single():
    """Self-loops are not duplicated."""
    assert symmetrize([(1, 1, 3), (0, 1, 2)]) == [(1, 1, 3), (0, 1, 2), (1, 0, 2)]
