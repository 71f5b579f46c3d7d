"""Tests for lowering and transfer placement."""

from pathlib import Path

import pytest
from pytest import param

from polyfal.analysis import analyze
from polyfal.cli.commands import compile_program
from polyfal.cli.options import CompileOptions
from polyfal.corpus import corpus_source
from polyfal.dsl import parse_source
from polyfal.exceptions import LoweringError
from polyfal.lowering import (
    DeviceAlloc,
    Direction,
    Loop,
    Sections,
    Target,
    Transfer,
    emit_text,
    lower,
    render_step,
    replay_residency,
)
from polyfal.semantic import resolve


DATA = Path(__file__).parent / "data"

_SHARED_FLAG = (
    corpus_source("cc_sections")
    .replace("changedB", "changedA")
    .replace("int changedA = 0;\n", "", 1)
)


def _plan(name, **options):
    return compile_program(corpus_source(name), CompileOptions(**options)).plan


def _transfers(steps, obj, direction):
    return [
        s
        for s in steps
        if isinstance(s, Transfer) and s.obj == obj and s.direction is direction
    ]


@pytest.fixture(name="bfs_plan")
def fixture_bfs_plan():
    """Level-synchronous BFS lowered for one simulated device."""
    return _plan("bfs", target="sim-gpu")


def test_host_target_has_no_transfers():
    """Host threads share memory with the host."""
    plan = _plan("bfs")
    assert plan.transfers == []
    assert plan.epilogue == ()
    assert all(g.device is None for g in plan.launch_groups)


def test_loop_invariant_property_is_copied_once(bfs_plan):
    """The distance array is copied to the device once, before the loop."""
    (loop_index,) = [i for i, s in enumerate(bfs_plan.steps) if isinstance(s, Loop)]
    before = bfs_plan.steps[:loop_index]
    assert len(_transfers(bfs_plan.walk(), "graph.dist", Direction.TO_DEVICE)) == 1
    assert len(_transfers(before, "graph.dist", Direction.TO_DEVICE)) == 1
    assert _transfers(before, "graph", Direction.TO_DEVICE)


def test_flag_is_copied_back_every_iteration(bfs_plan):
    """The fixpoint flag returns to the host after every launch."""
    (loop,) = [s for s in bfs_plan.steps if isinstance(s, Loop)]
    assert len(_transfers(loop.body, "changed", Direction.TO_HOST)) == 1
    assert len(_transfers(loop.body, "changed", Direction.TO_DEVICE)) == 1
    assert not _transfers(loop.body, "graph.dist", Direction.TO_HOST)


def test_allocations_precede_the_loop(bfs_plan):
    """Device copies are allocated once, outside the loop."""
    allocs = [s.obj for s in bfs_plan.steps if isinstance(s, DeviceAlloc)]
    assert set(allocs) >= {"changed", "lev", "graph", "graph.dist"}
    assert len(allocs) == len(set(allocs))
    (loop,) = [s for s in bfs_plan.steps if isinstance(s, Loop)]
    assert not any(isinstance(s, DeviceAlloc) for s in loop.body)


def test_epilogue_copies_results_back(bfs_plan):
    """Objects left newer on the device are copied back after ``main``."""
    assert bfs_plan.epilogue == (
        Transfer(0, "graph.dist", Direction.TO_HOST),
    )


@pytest.mark.parametrize(
    "name", ["bfs", "bfs_edge", "bfs_sssp", "sssp", "sssp_edge", "cc", "mst"]
)
@pytest.mark.parametrize("asynchronous", [False, True], ids=["sync", "async"])
def test_device_plans_are_coherent(name, asynchronous):
    """No step of a device plan reads a stale or unallocated copy."""
    plan = _plan(name, target="sim-gpu", asynchronous=asynchronous)
    assert replay_residency(plan) == []


def test_sections_run_on_separate_devices():
    """Every parallel section gets its own device."""
    plan = _plan("cc_sections", target="sim-multi-gpu")
    (sections,) = [s for s in plan.steps if isinstance(s, Sections)]
    assert [s.device for s in sections.sections] == [0, 1]
    assert replay_residency(plan) == []
    devices = {g.device for g in plan.launch_groups}
    assert devices == {0, 1}


@pytest.mark.parametrize(
    ("source", "target", "match"),
    [
        param(
            corpus_source("bfs"),
            Target.sim_multi_device(),
            "requires 'main' to contain parallel sections",
            id="multi_device_without_sections",
        ),
        param(
            _SHARED_FLAG,
            Target.sim_multi_device(),
            r"'changedA' is accessed by the host and written on devices \[0, 1\]",
            id="written_on_two_devices",
        ),
    ],
)
def test_lowering_errors(source, target, match):
    """Targets the program cannot run on are rejected."""
    program, _ = resolve(parse_source(source))
    _, schedule = analyze(program, False)
    with pytest.raises(LoweringError, match=match):
        lower(program, schedule, target)


@pytest.mark.parametrize(
    ("step", "line"),
    [
        param(DeviceAlloc(1, "lev"), "ALLOC dev=1 obj=lev", id="alloc"),
        param(
            Transfer(0, "graph.dist", Direction.TO_DEVICE),
            "TRANSFER dev=0 obj=graph.dist dir=toDevice whole=1",
            id="transfer",
        ),
    ],
)
def test_render_step(step, line):
    """Plan steps render as single lines."""
    assert render_step(step) == [line]
    assert render_step(step, 2) == [f"    {line}"]


def test_bfs_device_plan_text(bfs_plan):
    """The BFS device plan renders exactly as the checked-in plan."""
    expected = (DATA / "bfs_sim_gpu.plan").read_text(encoding="utf-8")
    assert emit_text(bfs_plan) == expected


def test_empty_plan_renders_empty():
    """A ``main`` without statements lowers to an empty plan."""
    plan = compile_program("int main() { }").plan
    assert plan.steps == ()
    assert emit_text(plan) == ""


def test_single_thread_groups_end_in_barriers():
    """With one host thread every launch group is followed by a barrier."""
    serial = _plan("bfs_sssp", asynchronous=True, threads=1)
    parallel = _plan("bfs_sssp", asynchronous=True, threads=4)
    assert serial.launch_groups
    assert all(g.barrier_after for g in serial.launch_groups)
    assert [g.kernels for g in serial.launch_groups] == [
        g.kernels for g in parallel.launch_groups
    ]
