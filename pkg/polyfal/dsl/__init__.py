"""Frontend of the graph DSL: tokens, syntax tree, parser and printer."""

from polyfal.dsl.ast import IteratorKind, Program
from polyfal.dsl.lexer import tokenize
from polyfal.dsl.normalize import alpha_equivalent, alpha_normalize
from polyfal.dsl.parser import parse, parse_source
from polyfal.dsl.printer import pretty_print
from polyfal.dsl.tokens import Token, TokenKind
from polyfal.dsl.types import DslType, TypeKind

__all__ = [
    "DslType",
    "IteratorKind",
    "Program",
    "Token",
    "TokenKind",
    "TypeKind",
    "alpha_equivalent",
    "alpha_normalize",
    "parse",
    "parse_source",
    "pretty_print",
    "tokenize",
]
