"""Barrier analysis of kernel launches."""

from polyfal.analysis.barriers import mark_barriers
from polyfal.analysis.cfg import (
    Cfg,
    CfgNode,
    NodeKind,
    build_cfg,
    count_predecessors,
)
from polyfal.analysis.render import render_cfg
from polyfal.analysis.schedule import (
    ConcurrentGroup,
    Schedule,
    derive_schedule,
    sync_schedule,
)
from polyfal.dsl.ast import Program


def analyze(program: Program, asynchronous: bool = True) -> tuple[Cfg, Schedule]:
    """Build and mark the CFG of ``main`` and derive its schedule.

    Args:
        program: The resolved program.
        asynchronous: If ``False``, every launch forms its own group.

    Returns:
        The marked CFG and the schedule.
    """
    cfg = mark_barriers(count_predecessors(build_cfg(program.main, program)))
    schedule = derive_schedule(cfg) if asynchronous else sync_schedule(cfg)
    return cfg, schedule


__all__ = [
    "Cfg",
    "CfgNode",
    "ConcurrentGroup",
    "NodeKind",
    "Schedule",
    "analyze",
    "build_cfg",
    "count_predecessors",
    "derive_schedule",
    "mark_barriers",
    "render_cfg",
    "sync_schedule",
]
