"""Validation tests for graph files, stores and generators."""

import pytest
from pytest import param

from polyfal.exceptions import GraphError, GraphFormatError, GraphIoError, ParamError
from polyfal.graphs import gen_er, gen_rmat, parse_graph, read_graph
from polyfal.runtime import build_graph_store


@pytest.mark.parametrize(
    ("text", "match"),
    [
        param("", "^line 1: Missing header", id="empty"),
        param("q 2 1\n0 1 1\n", "^line 1: Expected header", id="bad_header"),
        param("p two 1\n", "^line 1: Fields must be integers", id="non_integer_count"),
        param("p 2 -1\n", "^line 1: Counts must be nonnegative", id="negative_count"),
        param("p 2 2\n0 1 1\n", "^line 3: Expected 2 edge lines, found 1", id="short"),
        param("p 2 1\n0 1\n", r"^line 2: Expected '<src> <dst> <weight>'", id="fields"),
        param("p 2 1\n0 2 1\n", r"^line 2: Point id outside \[0, 2\)", id="range"),
        param("p 2 1\n0 1 -4\n", "^line 2: Weights must be nonnegative", id="weight"),
        param("p 2 1\n0 1 1\n1 0 1\n", "^line 3: More edge lines", id="long"),
    ],
)
def test_malformed_files(text, match):
    """Format errors name the offending line."""
    with pytest.raises(GraphFormatError, match=match):
        parse_graph(text)


def test_format_error_fields():
    """Format errors keep the offending line text."""
    with pytest.raises(GraphFormatError) as info:
        parse_graph("p 2 1\n0 x 1\n")
    assert (info.value.line, info.value.text) == (2, "0 x 1")
    assert str(info.value) == "line 2: Fields must be integers. ('0 x 1')"


def test_missing_file(tmp_path):
    """Unreadable files raise an I/O error."""
    with pytest.raises(GraphIoError, match="Cannot read graph file"):
        read_graph(tmp_path / "missing.txt")


@pytest.mark.parametrize(
    ("edges", "n", "match"),
    [
        param([(0, 3, 1)], 3, "outside", id="endpoint"),
        param([(0, 1, -1)], 3, "negative weight", id="weight"),
        param([], -1, "nonnegative", id="count"),
    ],
)
def test_invalid_stores(edges, n, match):
    """Stores reject edges that do not fit the point count."""
    with pytest.raises(GraphError, match=match):
        build_graph_store(edges, n)


@pytest.mark.parametrize(
    ("generate", "match"),
    [
        param(lambda: gen_er(-1, 0, 1), "nonnegative", id="er_negative"),
        param(lambda: gen_er(3, 7, 1), "at most 6", id="er_too_dense"),
        param(lambda: gen_rmat(12, 10, 1), "power of two", id="rmat_n"),
        param(lambda: gen_rmat(8, 10, 1, a=0.5), "sum to 1", id="rmat_sum"),
        param(
            lambda: gen_rmat(8, 10, 1, a=1.2, b=-0.2, c=0.0, d=0.0),
            "nonnegative",
            id="rmat_negative",
        ),
    ],
)
def test_invalid_generator_parameters(generate, match):
    """Generators reject impossible parameters."""
    with pytest.raises(ParamError, match=match):
        generate()
