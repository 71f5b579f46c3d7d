"""Lowering of scheduled programs to target-specific execution plans."""

from polyfal.lowering.emit import emit_text, render_step
from polyfal.lowering.lower import lower
from polyfal.lowering.plan import (
    Branch,
    DeviceAlloc,
    Direction,
    ExecutionPlan,
    HostStmt,
    LaunchGroup,
    Loop,
    PlanStep,
    Section,
    Sections,
    Transfer,
    object_names,
)
from polyfal.lowering.target import CostModel, Target, TargetKind
from polyfal.lowering.transfers import (
    ResidencyMap,
    insert_transfers,
    replay_residency,
)

__all__ = [
    "Branch",
    "CostModel",
    "DeviceAlloc",
    "Direction",
    "ExecutionPlan",
    "HostStmt",
    "LaunchGroup",
    "Loop",
    "PlanStep",
    "ResidencyMap",
    "Section",
    "Sections",
    "Target",
    "TargetKind",
    "Transfer",
    "emit_text",
    "insert_transfers",
    "lower",
    "object_names",
    "render_step",
    "replay_residency",
]
