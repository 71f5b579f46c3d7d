"""Tests for the processing-mode transforms."""

import pytest
from hypothesis import given
from pytest import param

from polyfal.cli.commands import compile_program
from polyfal.cli.options import CompileOptions
from polyfal.corpus import corpus_source
from polyfal.dsl import alpha_equivalent, parse_source, pretty_print
from polyfal.exceptions import FallbackWarning, NotEligibleError
from polyfal.lowering import emit_text
from polyfal.semantic import resolve
from polyfal.transforms import (
    EdgeToVertex,
    Mode,
    TransformReport,
    VertexToEdge,
    apply_mode,
    edge_to_vertex,
    to_worklist,
    vertex_to_edge,
)
from tests.hypothesis_strategies.programs import vertex_programs


def _parsed(name):
    return parse_source(corpus_source(name))


@pytest.mark.parametrize(
    ("vertex", "edge"),
    [param("sssp", "sssp_edge", id="sssp"), param("bfs", "bfs_edge", id="bfs")],
)
def test_vertex_to_edge_matches_handwritten(vertex, edge):
    """Converting the vertex-based listing gives the hand-written edge listing."""
    converted, report = vertex_to_edge(_parsed(vertex))
    assert report.applied
    assert alpha_equivalent(converted, _parsed(edge))


@pytest.mark.parametrize(
    ("vertex", "edge"),
    [param("sssp", "sssp_edge", id="sssp"), param("bfs", "bfs_edge", id="bfs")],
)
@pytest.mark.parametrize("target", ["cpu", "sim-gpu"])
def test_edge_mode_plan_matches_handwritten(vertex, edge, target):
    """Edge mode compiles to the same plan as the hand-written edge listing."""
    converted = compile_program(
        corpus_source(vertex), CompileOptions(mode="edge", target=target)
    )
    handwritten = compile_program(corpus_source(edge), CompileOptions(target=target))
    assert emit_text(converted.plan) == emit_text(handwritten.plan)


@pytest.mark.parametrize("name", ["bfs", "sssp", "cc"])
def test_corpus_roundtrip(name):
    """Vertex to edge and back is the identity up to bound names."""
    program = _parsed(name)
    edge, _ = vertex_to_edge(program)
    back, report = edge_to_vertex(edge)
    assert report.applied
    assert alpha_equivalent(back, program)


@given(vertex_programs())
def test_generated_roundtrip(source):
    """Generated eligible kernels survive the roundtrip and stay well-typed."""
    program = parse_source(source)
    edge, forward = vertex_to_edge(program)
    back, backward = edge_to_vertex(edge)
    assert forward.applied and backward.applied
    assert alpha_equivalent(back, program)
    resolve(edge)


_PULL = """
int changed = 0;

void k(Point p, Graph graph) {{
    foreach (t In p.innbrs) {{
        MIN(p.dist, t.dist + graph.getweight(t, p), changed);
    }}
}}

int main(int argc, char *argv[]) {{
    Graph graph;
    graph.addPointProperty(dist, int);
    graph.read(argv[1]);
    foreach (t In graph.points) t.dist = MAX_INT;
    graph.points[0].dist = 0;
    while (1) {{
        changed = 0;
        foreach (t In graph.points) {filter}k(t, graph);
        if (changed == 0) break;
    }}
    return 0;
}}
"""


@pytest.mark.parametrize(
    "filter_", [param("", id="unfiltered"), param("(t.dist == 0) ", id="filtered")]
)
def test_pull_kernel_roundtrip(filter_):
    """Kernels pulling into the launched point keep their orientation."""
    program = parse_source(_PULL.format(filter=filter_))
    edge, forward = vertex_to_edge(program)
    back, backward = edge_to_vertex(edge)
    assert forward.applied and backward.applied
    assert "foreach (t In p.innbrs)" in pretty_print(back)
    assert alpha_equivalent(back, program)


def test_chained_transform():
    """Chained transforms report all steps under one name."""
    program = _parsed("sssp")
    back, report = (VertexToEdge() | EdgeToVertex())(program)
    assert report.transform == "vertex_to_edge | edge_to_vertex"
    assert report.rewritten_functions == ("relaxgraph",)
    assert alpha_equivalent(back, program)


def test_rejection_keeps_program():
    """A transform that does not apply returns the input and its reason."""
    program = _parsed("mst")
    converted, report = vertex_to_edge(program)
    assert converted is program
    assert not report.applied
    assert report.render() == (
        "vertex_to_edge: not applied "
        "(no kernel launched over points visits neighbours)"
    )


def test_report_rendering():
    """Applied reports list the rewritten functions."""
    report = TransformReport("to_worklist", True, rewritten_functions=("a", "b"))
    assert report.render() == "to_worklist: applied to [a,b]"


def test_edge_mode_keeps_edge_programs():
    """Programs already launched over edges are not converted again."""
    program = _parsed("sssp_edge")
    converted, reports = apply_mode(program, Mode.EDGE)
    assert converted is program
    assert reports == []


def test_strict_mode_rejects_ineligible_program():
    """Without fallback, an inapplicable mode is an error."""
    with pytest.raises(NotEligibleError, match="edge_to_vertex"):
        apply_mode(_parsed("mst"), Mode.VERTEX)


def test_fallback_keeps_original_mode():
    """With fallback, an inapplicable mode warns and keeps the program."""
    program = _parsed("mst")
    with pytest.warns(FallbackWarning, match="compiled as written"):
        converted, reports = apply_mode(program, Mode.VERTEX, allow_fallback=True)
    assert converted is program
    assert reports == []


@pytest.mark.parametrize(
    ("name", "kernels"),
    [
        param("sssp", ("relaxgraph",), id="sssp"),
        param("bfs", ("BFS",), id="bfs"),
        param("cc", ("propagate",), id="cc"),
    ],
)
def test_worklist_conversion(name, kernels):
    """Fixpoint loops become worklist loops that drain a collection."""
    converted, report = to_worklist(_parsed(name))
    assert report.rewritten_functions == kernels
    text = pretty_print(converted)
    assert "Collection<Point>" in text
    assert ".size() == 0) break;" in text
    resolve(converted)


def test_worklist_mode_converts_edges_first():
    """Worklist mode on an edge-based program goes through vertices."""
    _, reports = apply_mode(_parsed("sssp_edge"), Mode.WORKLIST)
    assert [r.transform for r in reports] == ["edge_to_vertex", "to_worklist"]


def test_worklist_rejects_updates_of_the_launched_point():
    """Kernels writing their own point cannot push the updated points."""
    source = corpus_source("cc").replace(
        "MIN(t.comp, p.comp, changed)", "MIN(p.comp, t.comp, changed)"
    )
    program = parse_source(source)
    converted, report = to_worklist(program)
    assert converted is program
    assert not report.applied
    assert report.reason == (
        "'propagate' updates property 'comp' of a point other than a visited "
        "neighbour"
    )
