"""Validation tests for DSL programs."""

import pytest
from pytest import param

from polyfal.dsl import parse_source
from polyfal.exceptions import LexError, ParseError, SemanticError
from polyfal.semantic import resolve

try:  # For python < 3.11, use the exceptiongroup backport
    ExceptionGroup
except NameError:
    from exceptiongroup import ExceptionGroup


def test_illegal_character():
    """Characters that start no token are reported with their position."""
    with pytest.raises(LexError, match=r"^1:14: illegal character '\$'$"):
        parse_source("int main() { $ }")


@pytest.mark.parametrize(
    ("source", "match"),
    [
        param("int main() { x = ; }", "expected .*, found ';'", id="missing_operand"),
        param("int main() { return 0 }", "found '}'", id="missing_semicolon"),
        param("int x = 0;", "expected function 'main'", id="no_main"),
        param("int main() {", "found end of input", id="unclosed_block"),
    ],
)
def test_syntax_errors(source, match):
    """Malformed programs raise a parse error naming what was expected."""
    with pytest.raises(ParseError, match=match):
        parse_source(source)


def test_parse_error_fields():
    """Parse errors carry the expected and found token descriptions."""
    with pytest.raises(ParseError) as info:
        parse_source("int main() { x = ; }")
    assert info.value.found == "';'"
    assert (info.value.line, info.value.col) == (1, 18)


def test_duplicate_main():
    """A second ``main`` is rejected while parsing."""
    with pytest.raises(SemanticError, match="duplicate function 'main'"):
        parse_source("int main() { } int main() { }")


@pytest.mark.parametrize(
    ("source", "match"),
    [
        param("int main() { return y; }", "undefined name 'y'", id="undefined_name"),
        param("int main() { break; }", "'break' outside loop", id="stray_break"),
        param(
            "int main() { int x; int x; }",
            "redeclaration of 'x'",
            id="redeclaration",
        ),
        param(
            "int main() { Graph g; foreach (t In g.points) t.dist = 0; }",
            "undefined property 'dist'",
            id="undefined_property",
        ),
        param(
            "void f() { } int main() { g(); }",
            "undefined function 'g'",
            id="undefined_function",
        ),
        param(
            "int main() { int x = 0; foreach (t In x.outnbrs) { } }",
            "iterator 'outnbrs' requires a Point subject, found int",
            id="iterator_subject_mismatch",
        ),
        param(
            "int main() { Graph g; g.addPointProperty(d, int); "
            "g.addPointProperty(d, float); }",
            "property 'd' redeclared on graph 'g'",
            id="property_redeclaration",
        ),
        param(
            "void f() { g(); } void g() { f(); } int main() { f(); }",
            "recursive call chain f -> g -> f",
            id="mutual_recursion",
        ),
    ],
)
def test_semantic_errors(source, match):
    """A single semantic error is raised directly."""
    with pytest.raises(SemanticError, match=match):
        resolve(parse_source(source))


def test_semantic_errors_are_grouped():
    """Several semantic errors are reported together."""
    with pytest.raises(ExceptionGroup) as info:
        resolve(parse_source("int main() { break; return y; }"))
    messages = sorted(str(e) for e in info.value.exceptions)
    assert len(messages) == 2
    assert all(isinstance(e, SemanticError) for e in info.value.exceptions)
    assert any("undefined name 'y'" in m for m in messages)
