"""Tests for name resolution and read/write-set analysis."""

import pytest

from polyfal.corpus import CORPUS, corpus_source
from polyfal.dsl import TypeKind, parse_source
from polyfal.dsl.ast import Storage
from polyfal.semantic import (
    compute_rw_sets,
    compute_stmt_rw_sets,
    find_target_functions,
    resolve,
)


def _resolved(name):
    return resolve(parse_source(corpus_source(name)))


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_resolves(name):
    """All shipped programs are free of semantic errors."""
    program, table = _resolved(name)
    assert program.main.name == "main"
    assert set(table.globals) == set(program.global_names)


def test_symbol_table():
    """Globals and declared properties are recorded with their types."""
    _, table = _resolved("mst")
    assert table.globals["mstWeight"].storage is Storage.GLOBAL
    assert table.property_names("graph") == ["root", "minkey", "inmst"]
    assert table.lookup_property("graph", "inmst").element.value == "edge"
    assert table.lookup_property("graph", "root").dtype.kind is TypeKind.INT


def test_target_functions():
    """Every launch is reported with the sets of its kernel at the call site."""
    program, _ = _resolved("sssp")
    (info,) = find_target_functions(program)
    assert (info.function, info.host) == ("relaxgraph", "main")
    assert info.write_set.globals == {"changed"}
    assert ("graph", "dist") in info.write_set.properties
    assert ("graph", "dist") in info.read_set.properties


def test_parameter_shadows_global():
    """A kernel parameter named like a global does not read the global."""
    program, _ = _resolved("bfs")
    reads, writes = compute_rw_sets(program.function("BFS"), program)
    assert "lev" not in reads.globals
    assert writes.globals == {"changed"}


def test_launch_reads_arguments():
    """A launch reads the globals passed as arguments."""
    program, _ = _resolved("bfs")
    (info,) = find_target_functions(program)
    reads, _ = compute_stmt_rw_sets(info.call_site, program)
    assert "lev" in reads.globals


def test_independent_kernels_do_not_conflict():
    """The two kernels of the combined program touch disjoint state."""
    program, _ = _resolved("bfs_sssp")
    first, second = find_target_functions(program)
    assert not first.write_set.intersects(second.write_set)
    assert not first.write_set.intersects(second.read_set)
    assert not second.write_set.intersects(first.read_set)
