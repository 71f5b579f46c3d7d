"""Execution of plans: graph storage, kernels, worklists and simulated devices."""

from polyfal.runtime.clock import SimClock
from polyfal.runtime.device import DeviceSim, TransferRecord
from polyfal.runtime.executor import PlanExecutor, execute, worklist_drain
from polyfal.runtime.locks import SingleLock, StripedLocks, single_try
from polyfal.runtime.result import (
    CostReport,
    ExecResult,
    LaunchWork,
    checksum,
    load_imbalance,
)
from polyfal.runtime.store import GraphStore, StorageMode, build_graph_store
from polyfal.runtime.unionfind import UnionFindSet
from polyfal.runtime.worklist import Worklist, WorklistKind, WorklistMode

__all__ = [
    "CostReport",
    "DeviceSim",
    "ExecResult",
    "GraphStore",
    "LaunchWork",
    "PlanExecutor",
    "SimClock",
    "SingleLock",
    "StorageMode",
    "StripedLocks",
    "TransferRecord",
    "UnionFindSet",
    "Worklist",
    "WorklistKind",
    "WorklistMode",
    "build_graph_store",
    "checksum",
    "execute",
    "load_imbalance",
    "single_try",
    "worklist_drain",
]
