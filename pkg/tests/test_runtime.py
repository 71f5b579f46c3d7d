"""Tests for plan execution."""

import math
from functools import cache

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings
from pytest import param

from polyfal.cli.commands import compile_program
from polyfal.cli.options import CompileOptions
from polyfal.corpus import corpus_source
from polyfal.exceptions import DivergenceError, DslRuntimeError
from polyfal.graphs import component_labels, verify_oracle
from polyfal.graphs.generators import gen_er, gen_rmat
from polyfal.graphs.io import symmetrize
from polyfal.lowering import CostModel
from polyfal.runtime import (
    SingleLock,
    UnionFindSet,
    Worklist,
    WorklistMode,
    build_graph_store,
    execute,
    load_imbalance,
    single_try,
    worklist_drain,
)
from polyfal.transforms import Mode
from tests.hypothesis_strategies.graphs import simple_edge_lists


def _run(name, edges, n, threads=1, **options):
    options = CompileOptions(threads=threads, **options)
    plan = compile_program(corpus_source(name), options).plan
    store = build_graph_store(edges, n)
    if options.mode is Mode.WORKLIST:
        return worklist_drain(plan, store, options.worklist_mode, threads)
    return execute(plan, store, threads)


@pytest.mark.parametrize("name", ["bfs", "sssp", "cc"])
@pytest.mark.parametrize("mode", ["native", "edge", "worklist"])
@pytest.mark.parametrize("asynchronous", [False, True], ids=["sync", "async"])
@pytest.mark.parametrize("threads", [1, 4])
def test_results_match_reference(
    name, mode, asynchronous, threads, er_edges, n_points
):
    """Every mode computes the reference solution."""
    result = _run(
        name, er_edges, n_points, threads, mode=mode, asynchronous=asynchronous
    )
    assert verify_oracle(name, result, er_edges, n_points)


@pytest.mark.parametrize("threads", [1, 4])
def test_mst_matches_reference(threads, er_edges, n_points):
    """The forest weight is the reference weight and sums the marked edges."""
    result = _run("mst", er_edges, n_points, threads)
    assert verify_oracle("mst", result, er_edges, n_points)
    marked = result.properties["graph.inmst"] == 1
    weights = np.array([w for _, _, w in er_edges])
    assert int(weights[marked].sum()) == int(result.globals["mstWeight"])
    components = len(set(component_labels(er_edges, n_points)))
    assert int(marked.sum()) == n_points - components


@pytest.mark.parametrize("mode", ["native", "edge", "worklist"])
def test_checksums_do_not_depend_on_threads(mode, er_edges, n_points):
    """Results are deterministic regardless of the number of workers."""
    checksums = [
        _run("sssp", er_edges, n_points, t, mode=mode).checksums()
        for t in [1, 2, 4, 8]
    ]
    assert all(c == checksums[0] for c in checksums)


@settings(max_examples=25)
@given(simple_edge_lists())
def test_generated_graphs_match_reference(graph):
    """Shortest paths agree with the reference on arbitrary graphs."""
    edges, n = graph
    result = _run("sssp", edges, n, threads=3, mode="edge")
    assert verify_oracle("sssp", result, edges, n)


def test_unreached_points_keep_initial_value(two_components):
    """Points without a path from the source stay at ``MAX_INT``."""
    edges, n = two_components
    result = _run("bfs", edges, n)
    assert result.properties["graph.dist"].tolist() == [0, 1, 1] + [2**31 - 1] * 3


def test_async_groups_are_cheaper(er_edges, n_points):
    """Running independent launches together shortens the simulated time."""
    sync = _run("bfs_sssp", er_edges, n_points, 4)
    concurrent = _run("bfs_sssp", er_edges, n_points, 4, asynchronous=True)
    assert concurrent.checksums() == sync.checksums()
    assert concurrent.cost.total < sync.cost.total


@pytest.mark.parametrize("threads", [1, 4])
def test_concurrent_group_records_in_launch_order(threads, er_edges, n_points):
    """Launches of one group run together but are recorded in launch order."""
    sync = _run("bfs_sssp", er_edges, n_points, threads)
    concurrent = _run("bfs_sssp", er_edges, n_points, threads, asynchronous=True)
    assert concurrent.checksums() == sync.checksums()
    assert concurrent.globals == sync.globals
    kernels = [w.kernel for w in concurrent.per_worker_work]
    assert kernels == [w.kernel for w in sync.per_worker_work]
    assert kernels[:2] == ["bfs", "sssp"]


def test_edge_mode_balances_skewed_degrees(star_edges, n_points):
    """On a star, vertex launches put all edges on one worker."""
    vertex = load_imbalance(_run("sssp", star_edges, n_points, 4))
    edge = load_imbalance(_run("sssp", star_edges, n_points, 4, mode="edge"))
    assert vertex == pytest.approx(math.sqrt(3))
    assert edge < 0.5


@pytest.mark.slow
@pytest.mark.parametrize("graph", ["rmat", "star"])
def test_edge_mode_balances_large_skewed_graphs(graph):
    """On hub-dominated graphs, edge launches spread edges more evenly."""
    if graph == "rmat":
        n = 2**14
        edges = gen_rmat(n, 2**17, seed=3)
    else:
        n = 10000
        edges = [(0, i, 1) for i in range(1, n)]
    vertex = load_imbalance(_run("sssp", edges, n, 4))
    edge = load_imbalance(_run("sssp", edges, n, 4, mode="edge"))
    assert edge < vertex


@pytest.mark.slow
def test_edge_mode_gains_little_on_uniform_graphs():
    """On uniform random graphs both launch kinds are nearly balanced."""
    n = 2**14
    edges = gen_er(n, 2**17, seed=3)
    vertex = load_imbalance(_run("sssp", edges, n, 4))
    edge = load_imbalance(_run("sssp", edges, n, 4, mode="edge"))
    assert abs(edge - vertex) < 0.25


@pytest.mark.parametrize(
    ("name", "graph"),
    [
        param("bfs", "path_edges", id="bfs-path"),
        param("bfs", "er_edges", id="bfs-er"),
        param("sssp", "path_edges", id="sssp-path"),
        param("sssp", "star_edges", id="sssp-star"),
        param("sssp", "er_edges", id="sssp-er"),
        param("cc", "er_edges", id="cc-er"),
    ],
)
def test_worklist_does_less_work(name, graph, n_points, request):
    """Worklists invoke kernels at most as often as full sweeps would."""
    edges = request.getfixturevalue(graph)
    topology = _run(name, edges, n_points)
    worklist = _run(name, edges, n_points, mode="worklist")
    assert verify_oracle(name, worklist, edges, n_points)
    sweeps = len(topology.per_worker_work)
    assert 0 < worklist.kernel_invocations <= sweeps * n_points


def test_work_table(path_edges, n_points):
    """The work table has one row per launch and worker."""
    result = _run("sssp", path_edges, n_points, 2)
    table = result.work_table()
    assert list(table.columns) == ["launch", "kernel", "worker", "vertices", "edges"]
    assert len(table) == 2 * len(result.per_worker_work)
    assert set(table["kernel"]) == {"relaxgraph"}
    assert table.groupby("launch")["vertices"].sum().eq(n_points).all()


def test_device_transfers_are_logged(er_edges, n_points):
    """A device run logs its transfers and charges them to the total."""
    result = _run("bfs", er_edges, n_points, target="sim-gpu")
    assert verify_oracle("bfs", result, er_edges, n_points)
    assert result.transfer_count == len(result.transfer_table())
    assert result.cost.transfers > 0
    assert set(result.cost.devices) == {0}


def test_sections_overlap(two_components, er_edges, n_points):
    """Parallel sections on separate devices run concurrently."""
    first, n_first = two_components
    options = CompileOptions(target="sim-multi-gpu")
    plan = compile_program(corpus_source("cc_sections"), options).plan
    stores = [build_graph_store(first, n_first), build_graph_store(er_edges, n_points)]
    result = execute(plan, stores)
    first_labels = component_labels(first, n_first)
    assert result.properties["first.comp"].tolist() == first_labels
    assert result.properties["second.comp"].tolist() == component_labels(
        er_edges, n_points
    )
    cost = result.cost
    assert len(cost.sections) == 2
    assert max(cost.sections) <= cost.total
    assert max(cost.devices.values()) <= cost.total


@pytest.mark.parametrize(
    ("cost", "exact"),
    [
        param(CostModel(transfer_latency=0, transfer_per_byte=0), False, id="host"),
        param(
            CostModel(per_vertex_work=0, transfer_latency=0, transfer_per_byte=0),
            True,
            id="kernels_only",
        ),
    ],
)
def test_sections_makespan(cost, exact, two_components, er_edges, n_points):
    """Sections cost as much as the longer one plus the host work."""
    first, n_first = two_components
    options = CompileOptions(target="sim-multi-gpu", cost=cost)
    plan = compile_program(corpus_source("cc_sections"), options).plan
    stores = [build_graph_store(first, n_first), build_graph_store(er_edges, n_points)]
    report = execute(plan, stores).cost
    longest = max(report.sections)
    assert min(report.sections) > 0
    assert report.transfers == 0
    if exact:
        assert report.host == 0
        assert report.total == pytest.approx(longest)
    else:
        assert longest <= report.total <= longest + report.host


def test_delta_buckets_are_processed_in_order(er_edges, n_points):
    """Delta scheduling drains buckets in ascending order."""
    result = _run("sssp", er_edges, n_points, mode="worklist", delta=2.0)
    assert verify_oracle("sssp", result, er_edges, n_points)
    (trace,) = result.bucket_trace.values()
    assert trace[0] == 0
    assert list(trace) == sorted(trace)


def test_fifo_rounds_leave_no_trace(er_edges, n_points):
    """FIFO scheduling records no buckets."""
    result = _run("sssp", er_edges, n_points, mode="worklist")
    assert result.bucket_trace == {}


def test_drain_requires_worklist(path_edges, n_points):
    """Draining a topology-driven plan is an error."""
    plan = compile_program(corpus_source("sssp")).plan
    with pytest.raises(DslRuntimeError, match="no launch over a worklist"):
        worklist_drain(plan, build_graph_store(path_edges, n_points))


def test_divergence_is_detected():
    """Loops exceeding the iteration cap fail."""
    plan = compile_program("int main() { int x = 0; while (1) { x++; } }").plan
    with pytest.raises(DivergenceError, match="exceeded 10 iterations"):
        execute(plan, [], cap_factor=1)


def test_missing_edge_weight(path_edges, n_points):
    """Looking up the weight of a missing edge fails at run time."""
    store = build_graph_store(path_edges, n_points)
    assert store.getweight(0, 1) == 1
    with pytest.raises(DslRuntimeError, match="no edge from 1 to 0"):
        store.getweight(1, 0)


##### Runtime structures #####


def test_single_lock_owners():
    """Held elements block other owners until released."""
    lock = SingleLock()
    assert single_try(lock, [2, 1], owner="a")
    assert not single_try(lock, [1, 5], owner="b")
    assert lock.holder(5) is None
    lock.release_all("a")
    assert single_try(lock, [1, 5], owner="b")


def test_single_try_tuple_locks_each_element():
    """A tuple of ids locks every id; composite keys are wrapped in a list."""
    lock = SingleLock()
    assert single_try(lock, (3, 7), owner="a")
    assert lock.holder(3) == "a" and lock.holder(7) == "a"
    assert lock.holder((3, 7)) is None
    assert single_try(lock, [(3, 7)], owner="b")
    assert lock.holder((3, 7)) == "b"


def test_single_try_rejects_empty_collection():
    """An empty element collection cannot be locked."""
    with pytest.raises(ValueError, match="at least one element"):
        single_try(SingleLock(), [], owner="a")


@settings(max_examples=25)
@given(simple_edge_lists())
def test_union_find_components(graph):
    """Union-find roots agree with the connected components."""
    edges, n = graph
    sets = UnionFindSet(n)
    for s, d, _ in edges:
        sets.union(s, d)
    labels = component_labels(edges, n)
    roots = [sets.find(p) for p in range(n)]
    for a in range(n):
        for b in range(n):
            assert (roots[a] == roots[b]) == (labels[a] == labels[b])


@pytest.mark.parametrize(
    ("mode", "rounds"),
    [
        param(WorklistMode(), [[1, 2, 3]], id="fifo"),
        param(WorklistMode("delta", 2), [[3], [2], [1]], id="delta"),
    ],
)
def test_worklist_rounds(mode, rounds):
    """Rounds return the next batch of points."""
    wl = Worklist(4, mode)
    wl.add(1, 5)
    wl.add(2, 3)
    wl.add(3, 0)
    wl.add(1, 5)
    assert wl.size() == 3
    assert [sorted(wl.start_round()) for _ in rounds] == rounds
    assert wl.start_round() == []


@pytest.mark.slow
@pytest.mark.parametrize("name", ["bfs", "sssp", "cc"])
def test_larger_graph(name):
    """A larger random graph still agrees with the reference."""
    n = 400
    edges = symmetrize(gen_er(n, 4 * n, seed=11))
    result = _run(name, edges, n, 8, mode="edge")
    assert verify_oracle(name, result, edges, n)


##### Reference pool #####


@cache
def _pool_graph(key):
    """A symmetric graph of the reference pool as ``(edges, n)``."""
    kind, _, size = key.partition("_")
    n = int(size) if size else 24
    match kind:
        case "er":
            edges = gen_er(n, 2 * n, seed=n)
        case "rmat":
            edges = gen_rmat(n, 8 * n, seed=n)
        case "path":
            edges = [(i, i + 1, 1 + i % 5) for i in range(n - 1)]
        case "star":
            edges = [(0, i, i) for i in range(1, n)]
        case "ring":
            edges = [(i, (i + 1) % n, 1 + i % 3) for i in range(n)]
        case "split":
            half = n // 2
            edges = [(i, i + 1, 2) for i in range(half - 1)]
            edges += [(i, i + 1, 3) for i in range(half, n - 1)]
    return symmetrize(edges), n


_POOL = [
    param("path"),
    param("star"),
    param("ring"),
    param("split"),
    param("er_1000", marks=pytest.mark.slow),
    param("er_10000", marks=pytest.mark.slow),
    param("er_100000", marks=pytest.mark.slow),
    param(f"rmat_{2**10}", marks=pytest.mark.slow),
    param(f"rmat_{2**14}", marks=pytest.mark.slow),
]


@pytest.mark.parametrize("graph", _POOL)
@pytest.mark.parametrize("name", ["bfs", "sssp", "cc"])
@pytest.mark.parametrize("mode", ["native", "edge", "worklist"])
@pytest.mark.parametrize("threads", [1, 2, 4, 8])
def test_reference_pool(graph, name, mode, threads):
    """Every mode matches the reference on structured and random graphs."""
    edges, n = _pool_graph(graph)
    result = _run(name, edges, n, threads, mode=mode)
    assert verify_oracle(name, result, edges, n)


_MONOTONE = [
    (name, mode)
    for name in ["bfs", "sssp", "cc"]
    for mode in ["native", "edge", "worklist"]
] + [("bfs_sssp", "native")]


@pytest.mark.slow
@settings(max_examples=200, deadline=None)
@given(st.sampled_from(_MONOTONE), simple_edge_lists())
def test_schedule_independence(variant, graph):
    """Monotone programs end in the same state under every schedule."""
    name, mode = variant
    edges, n = graph
    expected = _run(name, edges, n, mode=mode).checksums()
    for threads in [1, 2, 4, 8]:
        for asynchronous in [False, True]:
            result = _run(
                name, edges, n, threads, mode=mode, asynchronous=asynchronous
            )
            assert result.checksums() == expected
