"""Tests for settings files."""

import pytest

from polyfal.cli.bench import BenchMatrix, GraphKind, GraphSpec
from polyfal.lowering import CostModel, TargetKind
from polyfal.runtime.worklist import WorklistKind
from polyfal.transforms import Mode


def test_cost_model_file(tmp_path):
    """Cost models are read back from the JSON file they were written to."""
    path = tmp_path / "cost.json"
    model = CostModel(per_edge_work=2, transfer_latency=0)
    model.to_json(path)
    assert CostModel.from_json(path) == model
    assert CostModel.from_json(path.read_text(encoding="utf-8")) == model


def test_partial_cost_model():
    """Missing parameters take their defaults."""
    assert CostModel.from_dict({"per_vertex_work": 3}) == CostModel(per_vertex_work=3)


def test_bench_matrix_from_dict():
    """Matrices are structured from plain values."""
    matrix = BenchMatrix.from_dict(
        {
            "programs": ["sssp"],
            "graphs": [{"name": "g", "kind": "rmat", "n": 16, "m": 40, "seed": 2}],
            "modes": ["edge", "worklist"],
            "targets": ["sim-gpu"],
            "delta": 4,
        }
    )
    assert matrix.graphs == (GraphSpec("g", GraphKind.RMAT, 16, 40, 2),)
    assert matrix.modes == (Mode.EDGE, Mode.WORKLIST)
    assert matrix.targets == (TargetKind.SIM_DEVICE,)
    assert [cell[2].get("delta") for cell in matrix.cells()] == [None, 4]


def test_foreign_type_tag_is_rejected():
    """A dictionary tagged with another type cannot be loaded."""
    with pytest.raises(ValueError, match="describing a 'BenchMatrix'"):
        CostModel.from_dict({"type": "BenchMatrix"})


def test_bench_matrix_worklist_scheduling():
    """The worklist scheduling only applies to worklist cells."""
    matrix = BenchMatrix.from_dict(
        {
            "programs": ["sssp"],
            "graphs": [{"name": "g", "kind": "er", "n": 16, "m": 40, "seed": 2}],
            "modes": ["native", "worklist"],
            "worklist": "delta",
        }
    )
    assert matrix.worklist is WorklistKind.DELTA
    assert [cell[2].get("worklist") for cell in matrix.cells()] == [
        None,
        WorklistKind.DELTA,
    ]
