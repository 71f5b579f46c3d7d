"""Token classes of the DSL."""

from __future__ import annotations

import gc
from enum import Enum

from attrs import define, field
from attrs.validators import ge, instance_of


class TokenKind(Enum):
    """Enumeration of all token classes."""

    # Literals and names
    IDENT = "identifier"
    INT_LIT = "integer literal"
    FLOAT_LIT = "float literal"

    # Keywords
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    VOID = "void"
    CHAR = "char"
    GRAPH = "Graph"
    POINT = "Point"
    EDGE = "Edge"
    SET = "Set"
    COLLECTION = "Collection"
    FOREACH = "foreach"
    IN = "In"
    IF = "if"
    ELSE = "else"
    WHILE = "while"
    BREAK = "break"
    RETURN = "return"
    SINGLE = "single"
    PARALLEL = "parallel"
    SECTIONS = "sections"
    SECTION = "section"
    TRUE = "true"
    FALSE = "false"

    # Punctuation
    LPAREN = "("
    RPAREN = ")"
    LBRACE = "{"
    RBRACE = "}"
    LBRACKET = "["
    RBRACKET = "]"
    COMMA = ","
    SEMI = ";"
    DOT = "."

    # Operators
    EQ = "="
    PLUS_EQ = "+="
    MINUS_EQ = "-="
    PLUS_PLUS = "++"
    MINUS_MINUS = "--"
    PLUS = "+"
    MINUS = "-"
    STAR = "*"
    SLASH = "/"
    PERCENT = "%"
    EQ_EQ = "=="
    BANG_EQ = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    AND_AND = "&&"
    OR_OR = "||"
    BANG = "!"

    EOF = "end of input"


KEYWORDS: dict[str, TokenKind] = {
    kind.value: kind
    for kind in TokenKind
    if kind.value.isidentifier() and kind is not TokenKind.IDENT
}
"""Reserved words mapped to their token class."""

OPERATORS: list[tuple[str, TokenKind]] = sorted(
    (
        (kind.value, kind)
        for kind in TokenKind
        if not kind.value[0].isalpha() and kind is not TokenKind.EOF
    ),
    key=lambda pair: -len(pair[0]),
)
"""Punctuation and operator lexemes, longest first for maximal munch."""


@define(frozen=True)
class Token:
    """A lexical token with its source position."""

    kind: TokenKind = field(validator=instance_of(TokenKind))
    """The token class."""

    lexeme: str = field(validator=instance_of(str))
    """The source text of the token (empty only for the end-of-input token)."""

    line: int = field(validator=[instance_of(int), ge(1)])
    """The 1-based line of the first character."""

    col: int = field(validator=[instance_of(int), ge(1)])
    """The 1-based column of the first character."""

    @lexeme.validator
    def _validate_lexeme(self, _, value: str) -> None:  # noqa: DOC101, DOC103
        """Validate that only the end-of-input token has an empty lexeme.

        Raises:
            ValueError: If a non-EOF token has an empty lexeme.
        """
        if not value and self.kind is not TokenKind.EOF:
            raise ValueError(f"Token of kind '{self.kind.name}' has an empty lexeme.")

    def describe(self) -> str:
        """Render the token for diagnostics."""
        if self.kind is TokenKind.EOF:
            return "end of input"
        return f"'{self.lexeme}'"


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
