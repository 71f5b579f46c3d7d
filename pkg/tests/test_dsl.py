"""Tests for the DSL frontend."""

import pytest
from hypothesis import given
from pytest import param

from polyfal.corpus import CORPUS, corpus_source
from polyfal.dsl import (
    IteratorKind,
    TokenKind,
    alpha_equivalent,
    alpha_normalize,
    parse_source,
    pretty_print,
    tokenize,
)
from polyfal.dsl.ast import Foreach
from tests.hypothesis_strategies.programs import vertex_programs


def test_token_positions():
    """Tokens carry the 1-based line and column of their first character."""
    tokens = tokenize("int x;\n  x += 2; // done\n")
    assert [(t.kind, t.line, t.col) for t in tokens] == [
        (TokenKind.INT, 1, 1),
        (TokenKind.IDENT, 1, 5),
        (TokenKind.SEMI, 1, 6),
        (TokenKind.IDENT, 2, 3),
        (TokenKind.PLUS_EQ, 2, 5),
        (TokenKind.INT_LIT, 2, 8),
        (TokenKind.SEMI, 2, 9),
        (TokenKind.EOF, 3, 1),
    ]


@pytest.mark.parametrize(
    ("source", "kind"),
    [
        param("1.5", TokenKind.FLOAT_LIT, id="float"),
        param("2e3", TokenKind.FLOAT_LIT, id="exponent"),
        param("42", TokenKind.INT_LIT, id="int"),
        param("In", TokenKind.IN, id="keyword"),
        param("in", TokenKind.IDENT, id="case_sensitive"),
        param("<=", TokenKind.LE, id="longest_operator"),
    ],
)
def test_token_kinds(source, kind):
    """Literals, keywords and operators are classified by their longest match."""
    assert tokenize(source)[0].kind is kind


@pytest.mark.parametrize("name", CORPUS)
def test_printer_roundtrip(name):
    """Parsing the canonical rendering of a program gives the same program."""
    program = parse_source(corpus_source(name))
    printed = pretty_print(program)
    assert parse_source(printed) == program
    assert pretty_print(parse_source(printed)) == printed


@given(vertex_programs())
def test_printer_roundtrip_generated(source):
    """Generated programs survive a print/parse cycle."""
    program = parse_source(source)
    assert parse_source(pretty_print(program)) == program


def test_launch_detection():
    """Only graph-wide iterations at nesting level zero are launches."""
    program = parse_source(corpus_source("sssp"))
    foreaches = [
        node
        for fn in program.all_functions
        for node in fn.body.walk()
        if isinstance(node, Foreach)
    ]
    outer = {(f.iterator, f.outer) for f in foreaches}
    assert (IteratorKind.OUTNBRS, False) in outer
    assert (IteratorKind.POINTS, True) in outer


def test_point_declarations_with_graph():
    """``Point (g) p, (g) t;`` declares two points bound to ``g``."""
    program = parse_source(corpus_source("sssp_edge"))
    decls = program.functions[0].body.stmts[:2]
    assert [(d.name, d.dtype.graph) for d in decls] == [
        ("p", "graph"),
        ("t", "graph"),
    ]


def test_alpha_equivalence():
    """Renaming bound variables keeps programs alpha-equivalent."""
    source = corpus_source("bfs")
    original = parse_source(source)
    renamed = parse_source(
        source.replace("Point p", "Point q").replace("p.outnbrs", "q.outnbrs")
    )
    assert original != renamed
    assert alpha_equivalent(original, renamed)
    assert alpha_normalize(original) == alpha_normalize(renamed)


def test_alpha_equivalence_respects_globals():
    """Globals are free names and keep programs apart."""
    a = parse_source("int x = 0; int main() { x = 1; }")
    b = parse_source("int y = 0; int main() { y = 1; }")
    assert not alpha_equivalent(a, b)


def test_operator_precedence_is_printed_minimally():
    """Parentheses are only printed where precedence requires them."""
    program = parse_source("int x = 0; int main() { x = (1 + 2) * 3 - (4 - 5); }")
    assert "x = (1 + 2) * 3 - (4 - 5);" in pretty_print(program)
