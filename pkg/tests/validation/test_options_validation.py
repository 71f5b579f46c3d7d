"""Validation tests for compile options."""

import pytest
from pytest import param

from polyfal.cli.options import CompileOptions
from polyfal.exceptions import DeltaError, ForcedTargetWarning, OptionsError
from polyfal.runtime import Worklist, WorklistMode


@pytest.mark.parametrize(
    ("kwargs", "error", "match"),
    [
        param({"mode": "diagonal"}, ValueError, "diagonal", id="unknown_mode"),
        param({"target": "tpu"}, ValueError, "tpu", id="unknown_target"),
        param({"threads": 0}, ValueError, "threads", id="no_threads"),
        param({"devices": 1}, ValueError, "devices", id="one_device"),
        param(
            {"mode": "worklist", "delta": 0.0},
            OptionsError,
            "must be positive",
            id="zero_delta",
        ),
        param(
            {"mode": "vertex", "delta": 2.0},
            OptionsError,
            "only be given in worklist mode",
            id="delta_without_worklist",
        ),
        param(
            {"mode": "edge", "worklist": "fifo"},
            OptionsError,
            "scheduling can only be given in worklist mode",
            id="scheduling_without_worklist",
        ),
        param(
            {"mode": "worklist", "worklist": "fifo", "delta": 1.0},
            OptionsError,
            "only be given with delta scheduling",
            id="fifo_with_delta",
        ),
        param(
            {"mode": "worklist", "worklist": "lifo"},
            ValueError,
            "lifo",
            id="unknown_scheduling",
        ),
        param(
            {"mode": "worklist", "target": "sim-gpu"},
            OptionsError,
            "Use --force",
            id="worklist_on_device",
        ),
    ],
)
def test_invalid_options(kwargs, error, match):
    """Inconsistent option combinations are rejected."""
    with pytest.raises(error, match=match):
        CompileOptions(**kwargs)


def test_forced_worklist_on_device_warns():
    """Forcing an unsupported combination only warns."""
    with pytest.warns(ForcedTargetWarning, match="not supported on target 'sim-gpu'"):
        options = CompileOptions(mode="worklist", target="sim-gpu", force=True)
    assert options.target_spec().has_devices


@pytest.mark.parametrize("delta", [0, -1.5])
def test_worklist_delta_must_be_positive(delta):
    """Bucket widths of worklists are positive."""
    with pytest.raises(DeltaError, match="must be positive"):
        WorklistMode("delta", delta)
    with pytest.raises(DeltaError, match="must be positive"):
        Worklist(4, WorklistMode(), delta)
