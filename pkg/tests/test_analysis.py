"""Tests for the barrier analysis and launch scheduling."""

import pytest
from pytest import param

from polyfal.analysis import (
    NodeKind,
    analyze,
    build_cfg,
    count_predecessors,
    mark_barriers,
    render_cfg,
)
from polyfal.corpus import corpus_source
from polyfal.dsl import parse_source
from polyfal.semantic import resolve


def _analyzed(name, asynchronous=True):
    program, _ = resolve(parse_source(corpus_source(name)))
    return analyze(program, asynchronous)


def _markings(cfg):
    return [(n.id, n.kind, n.barrier) for n in cfg.nodes]


def test_fixpoint_launch_needs_barrier():
    """A launch writing the flag the host tests next is followed by a barrier."""
    cfg, _ = _analyzed("sssp")
    launch = NodeKind.KERNEL_LAUNCH
    plain = NodeKind.PLAIN
    assert _markings(cfg) == [
        (0, plain, False),
        (1, plain, False),
        (2, plain, False),
        (3, plain, False),
        (4, plain, False),
        (5, plain, False),
        (6, plain, False),
        (7, launch, True),
        (8, plain, False),
        (9, plain, False),
        (10, plain, False),
    ]


def test_independent_launches_are_barrier_free():
    """Of two independent launches only the second one needs a barrier."""
    cfg, _ = _analyzed("bfs_sssp")
    launches = [(n.id, n.barrier) for n in cfg.launches()]
    assert launches == [(11, False), (12, True)]


def test_async_schedule_groups_independent_launches():
    """The asynchronous schedule runs both kernels as one group."""
    _, schedule = _analyzed("bfs_sssp")
    assert [(g.launches, g.barrier_after) for g in schedule.groups] == [
        ((11, 12), True)
    ]
    (group,) = schedule.groups
    kernels = [s.launch_call.func for s in schedule.launch_stmts(group)]
    assert kernels == ["bfs", "sssp"]


def test_sync_schedule_separates_launches():
    """The synchronous schedule puts every launch in its own group."""
    _, schedule = _analyzed("bfs_sssp", asynchronous=False)
    assert [(g.launches, g.barrier_after) for g in schedule.groups] == [
        ((11,), True),
        ((12,), True),
    ]


def test_loop_structure():
    """Loop bodies flow back to their header and breaks leave the loop."""
    cfg, _ = _analyzed("sssp")
    assert (8, 5) in cfg.back_edges
    assert cfg[5].successors == [6, 9]
    assert cfg[8].successors == [5, 9]
    assert cfg[5].predecessor_count == 1
    assert cfg.exit == 10


def test_render_cfg():
    """Every node is rendered on its own line with its marking."""
    cfg, _ = _analyzed("sssp")
    lines = render_cfg(cfg).splitlines()
    assert len(lines) == len(cfg)
    assert lines[7].startswith("7 KERNEL_LAUNCH 1 1 -> 8 R{")
    assert lines[10].startswith("10 PLAIN 0 1 -> R{")


@pytest.mark.parametrize("name", ["bfs", "sssp", "cc", "mst"])
def test_marking_is_idempotent(name):
    """Marking an already marked graph changes nothing."""
    cfg, _ = _analyzed(name)
    before = _markings(cfg)
    assert _markings(mark_barriers(cfg)) == before


def _counted(source):
    program, _ = resolve(parse_source(source))
    return count_predecessors(build_cfg(program.main, program))


@pytest.mark.parametrize(
    ("body", "counts"),
    [
        param("int x = 0; x = 1;", [0, 1, 1], id="straight_line"),
        param(
            "int x = 0; if (x == 0) x = 1; else x = 2;",
            [0, 1, 1, 1, 2],
            id="diamond",
        ),
    ],
)
def test_predecessor_counts(body, counts):
    """Joins count one predecessor per incoming path."""
    cfg = _counted(f"int main() {{ {body} }}")
    assert [n.predecessor_count for n in cfg.nodes] == counts


def test_empty_main_has_only_exit():
    """An empty ``main`` consists of its exit node."""
    cfg = _counted("int main() { }")
    assert len(cfg) == 1
    assert cfg.root == cfg.exit == 0
    assert cfg.edges == []
    assert cfg[0].predecessor_count == 0
    assert cfg.launches() == []
