"""PyTest configuration."""

from __future__ import annotations

import os

import pytest
from hypothesis import settings as hypothesis_settings

from polyfal.cli.commands import compile_program
from polyfal.cli.options import CompileOptions
from polyfal.corpus import corpus_source
from polyfal.graphs.generators import gen_er
from polyfal.graphs.io import symmetrize, write_graph
from polyfal.runtime.store import build_graph_store
from polyfal.utils.boolean import strtobool

# Hypothesis settings
hypothesis_settings.register_profile("ci", deadline=500, max_examples=100)
if strtobool(os.getenv("CI", "false")):
    hypothesis_settings.load_profile("ci")

# All fixture functions have prefix 'fixture_' and explicitly declared name, so they
# can be reused by other fixtures, see
# https://docs.pytest.org/en/stable/reference/reference.html#pytest-fixture


# Add option to only run fast tests
def pytest_addoption(parser):
    """Changes pytest parser."""
    parser.addoption("--fast", action="store_true", help="fast: Runs reduced tests")


def pytest_configure(config):
    """Changes pytest marker configuration."""
    config.addinivalue_line("markers", "slow: mark test as slow to run")


def pytest_collection_modifyitems(config, items):
    """Marks slow tests as skip if flag is set."""
    if not config.getoption("--fast"):
        return

    skip_slow = pytest.mark.skip(reason="skip with --fast")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


##### Graphs #####


@pytest.fixture(name="n_points", params=[12], ids=["n12"])
def fixture_n_points(request):
    """Number of points of the small test graphs."""
    return request.param


@pytest.fixture(name="path_edges")
def fixture_path_edges(n_points):
    """A directed path through all points with unit weights."""
    return [(i, i + 1, 1) for i in range(n_points - 1)]


@pytest.fixture(name="star_edges")
def fixture_star_edges(n_points):
    """A star with all edges leaving point 0."""
    return [(0, i, i) for i in range(1, n_points)]


@pytest.fixture(name="er_edges")
def fixture_er_edges(n_points):
    """A seeded random graph with both directions of every edge."""
    return symmetrize(gen_er(n_points, 3 * n_points, seed=7))


@pytest.fixture(name="two_components")
def fixture_two_components():
    """Two undirected triangles, ``(edges, n)``."""
    edges = [(0, 1, 2), (1, 2, 3), (2, 0, 4), (3, 4, 1), (4, 5, 1), (5, 3, 5)]
    return symmetrize(edges), 6


@pytest.fixture(name="path_store")
def fixture_path_store(path_edges, n_points):
    """The storage of the path graph."""
    return build_graph_store(path_edges, n_points)


@pytest.fixture(name="graph_file")
def fixture_graph_file(tmp_path, er_edges, n_points):
    """The random graph written to a temporary file."""
    path = tmp_path / "graph.txt"
    write_graph(path, er_edges, n_points)
    return path


##### Programs #####


@pytest.fixture(name="program_name", params=["bfs"])
def fixture_program_name(request):
    """The name of a shipped program."""
    return request.param


@pytest.fixture(name="source")
def fixture_source(program_name):
    """The source text of the shipped program."""
    return corpus_source(program_name)


@pytest.fixture(name="program_file")
def fixture_program_file(tmp_path, source, program_name):
    """The shipped program copied to a temporary file."""
    path = tmp_path / f"{program_name}.fal"
    path.write_text(source, encoding="utf-8")
    return path


@pytest.fixture(name="options")
def fixture_options():
    """Compile options for the program as written."""
    return CompileOptions()


@pytest.fixture(name="compilation")
def fixture_compilation(source, options):
    """The shipped program compiled with the given options."""
    return compile_program(source, options)
