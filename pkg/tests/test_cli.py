"""Tests for the command-line interface."""

import json
from unittest import mock

import numpy as np
import pandas as pd
import pytest
from pytest import param

from polyfal.cli.bench import COLUMNS
from polyfal.cli.main import main
from polyfal.corpus import CORPUS, corpus_source
from polyfal.graphs import bfs_levels, gen_er, read_graph
from polyfal.runtime import WorklistMode, checksum, execute


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_compile_prints_plan(program_file, compilation, capsys):
    """Without dump flags the plan is printed."""
    assert main(["compile", str(program_file)]) == 0
    assert capsys.readouterr().out == compilation.dump("plan")


def test_compile_dumps(program_file, capsys):
    """Several dumps are printed in a fixed order with headers."""
    assert main(["compile", str(program_file), "--dump-plan", "--dump-ast"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# ast\n")
    assert out.index("# ast\n") < out.index("# plan\n")
    assert "LAUNCH dev=host group=[BFS] barrier=1" in out


def test_run_prints_summary(program_file, graph_file, er_edges, n_points, capsys):
    """A run prints checksums, globals, cost and the oracle verdict."""
    code = main(["run", str(program_file), str(graph_file), "--verify-oracle", "bfs"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    expected = checksum(np.array(bfs_levels(er_edges, n_points)))
    assert lines[0] == f"checksum graph.dist = {expected}"
    assert "global changed = 0" in lines
    assert any(line.startswith("simCost = ") for line in lines)
    assert lines[-2:] == ["transferCount = 0", "oracle bfs: PASS"]


def test_run_writes_stats(program_file, graph_file, tmp_path):
    """The work table and the transfer log are written as CSV files."""
    stats = tmp_path / "work.csv"
    args = ["run", str(program_file), str(graph_file), "--target", "sim-gpu"]
    assert main([*args, "--stats", str(stats)]) == 0
    work = pd.read_csv(stats)
    assert list(work.columns) == ["launch", "kernel", "worker", "vertices", "edges"]
    assert set(work["kernel"]) == {"BFS"}
    transfers = pd.read_csv(tmp_path / "work.transfers.csv")
    assert list(transfers.columns) == ["device", "obj", "direction", "elements", "cost"]
    assert "graph.dist" in set(transfers["obj"])


def test_gen_writes_graph(tmp_path):
    """Generated graphs are written in the edge-list format."""
    out = tmp_path / "er.txt"
    args = ["gen", "er", "--n", "20", "--m", "40", "--seed", "3", "-o", str(out)]
    assert main(args) == 0
    assert read_graph(out) == (gen_er(20, 40, 3), 20)


def test_bench_rows(tmp_path, capsys):
    """Every cell of a matrix produces one row; failing cells are marked."""
    matrix = {
        "programs": ["sssp", "mst"],
        "graphs": [{"name": "path8", "kind": "path", "n": 8}],
        "modes": ["native", "vertex"],
        "threads": [1, 2],
    }
    path = _write(tmp_path / "matrix.json", json.dumps(matrix))
    out = tmp_path / "bench.csv"
    assert main(["bench", str(path), "-o", str(out)]) == 0
    assert capsys.readouterr().out == out.read_text(encoding="utf-8")
    rows = pd.read_csv(out, keep_default_na=False)
    assert list(rows.columns) == list(COLUMNS)
    assert len(rows) == 8
    failed = rows[rows["status"] == "FAILED"]
    assert set(zip(failed["program"], failed["mode"])) == {("mst", "vertex")}
    assert failed["error"].str.contains("edge_to_vertex").all()
    assert (rows.loc[rows["status"] == "OK", "simCost"] > 0).all()


@pytest.mark.parametrize(
    ("source", "args", "code"),
    [
        param("bfs", ["--mode", "diagonal"], 1, id="usage"),
        param("int main() { x = ; }", [], 2, id="syntax"),
        param("int main() { return y; }", [], 2, id="semantic"),
        param("mst", ["--mode", "vertex"], 3, id="transform"),
        param("bfs", ["--target", "sim-multi-gpu"], 4, id="lowering"),
    ],
)
def test_compile_exit_codes(tmp_path, source, args, code, capsys):
    """Errors map to documented exit codes and are reported on stderr."""
    text = corpus_source(source) if source in CORPUS else source
    path = _write(tmp_path / "program.fal", text)
    assert main(["compile", str(path), *args]) == code
    assert capsys.readouterr().err.startswith("error: ")


def test_missing_program_is_usage_error(tmp_path, capsys):
    """An unreadable program file is a usage error."""
    assert main(["compile", str(tmp_path / "missing.fal")]) == 1
    assert "Cannot read program" in capsys.readouterr().err


def test_malformed_graph_is_runtime_error(program_file, tmp_path, capsys):
    """Graph errors exit with the runtime code."""
    graph = _write(tmp_path / "bad.txt", "p 2 1\n0 5 1\n")
    assert main(["run", str(program_file), str(graph)]) == 5
    assert "line 2" in capsys.readouterr().err


def test_missing_graph_argument(tmp_path, graph_file, capsys):
    """Programs reading two graphs need two graph files."""
    path = _write(tmp_path / "sections.fal", corpus_source("cc_sections"))
    args = ["run", str(path), str(graph_file), "--target", "sim-multi-gpu"]
    assert main(args) == 1
    assert "reads 2 graph(s), 1 given" in capsys.readouterr().err


def test_failed_oracle(program_file, graph_file, capsys):
    """A result disagreeing with the reference solution exits with code 6."""
    code = main(["run", str(program_file), str(graph_file), "--verify-oracle", "sssp"])
    assert code == 6
    assert capsys.readouterr().out.endswith("oracle sssp: FAIL\n")


def test_emit_plan_writes_file(program_file, graph_file, tmp_path, capsys):
    """The plan text is written to the given file by compile and run."""
    plan = tmp_path / "bfs.plan"
    assert main(["compile", str(program_file), "--emit-plan", str(plan)]) == 0
    text = capsys.readouterr().out
    assert plan.read_text(encoding="utf-8") == text
    plan.unlink()
    args = ["run", str(program_file), str(graph_file), "--emit-plan", str(plan)]
    assert main(args) == 0
    assert plan.read_text(encoding="utf-8") == text


def test_cost_flags_override_defaults(program_file, graph_file, capsys):
    """Per-parameter cost flags replace the cost model defaults."""
    args = ["run", str(program_file), str(graph_file)]
    assert main([*args, "--per-vertex-work", "0", "--per-edge-work", "0"]) == 0
    assert "simCost = 0" in capsys.readouterr().out.splitlines()


def test_cost_flags_are_validated(program_file, capsys):
    """Negative cost parameters are usage errors."""
    assert main(["compile", str(program_file), "--transfer-latency", "-1"]) == 1
    assert capsys.readouterr().err.startswith("error: ")


@pytest.mark.parametrize("program_name", ["sssp"])
def test_delta_scheduling_without_width(program_file, graph_file, capsys):
    """Choosing delta scheduling alone uses the default bucket width."""
    args = ["run", str(program_file), str(graph_file), "--mode", "worklist"]
    with mock.patch("polyfal.cli.commands.execute", wraps=execute) as spy:
        code = main([*args, "--worklist", "delta", "--verify-oracle", "sssp"])
    assert code == 0
    assert spy.call_args.kwargs["worklist"] == WorklistMode("delta")
    assert capsys.readouterr().out.endswith("oracle sssp: PASS\n")


@pytest.mark.parametrize(
    ("args", "match"),
    [
        param(["--worklist", "delta"], "only be given in worklist mode", id="mode"),
        param(
            ["--mode", "worklist", "--worklist", "fifo", "--delta", "2"],
            "delta scheduling",
            id="fifo_delta",
        ),
    ],
)
def test_worklist_flag_errors(program_file, args, match, capsys):
    """Worklist scheduling flags only combine with worklist mode."""
    assert main(["compile", str(program_file), *args]) == 1
    assert match in capsys.readouterr().err
