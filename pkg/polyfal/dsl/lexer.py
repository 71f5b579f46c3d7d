"""Tokenization of DSL source text."""

from __future__ import annotations

import re

from polyfal.dsl.tokens import KEYWORDS, OPERATORS, Token, TokenKind
from polyfal.exceptions import LexError

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?")
_WHITESPACE = " \t\r\n\f\v"


def tokenize(source: str) -> list[Token]:
    """Split DSL source text into tokens.

    Whitespace and ``//`` line comments separate tokens and are dropped. The
    returned list always ends with an end-of-input token.

    Args:
        source: The DSL source text.

    Returns:
        The list of tokens.

    Raises:
        LexError: If a character starts no valid token.

    Example:
        >>> [t.kind.name for t in tokenize("int x = 0;")]
        ['INT', 'IDENT', 'EQ', 'INT_LIT', 'SEMI', 'EOF']
    """
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    length = len(source)

    while pos < length:
        char = source[pos]
        col = pos - line_start + 1

        if char in _WHITESPACE:
            if char == "\n":
                line, line_start = line + 1, pos + 1
            pos += 1
            continue

        if source.startswith("//", pos):
            newline = source.find("\n", pos)
            pos = length if newline < 0 else newline
            continue

        if match := _IDENT.match(source, pos):
            lexeme = match.group()
            kind = KEYWORDS.get(lexeme, TokenKind.IDENT)
            tokens.append(Token(kind, lexeme, line, col))
            pos = match.end()
            continue

        if match := _NUMBER.match(source, pos):
            lexeme = match.group()
            is_float = match.group(1) is not None or match.group(2) is not None
            kind = TokenKind.FLOAT_LIT if is_float else TokenKind.INT_LIT
            tokens.append(Token(kind, lexeme, line, col))
            pos = match.end()
            continue

        for lexeme, kind in OPERATORS:
            if source.startswith(lexeme, pos):
                tokens.append(Token(kind, lexeme, line, col))
                pos += len(lexeme)
                break
        else:
            raise LexError(f"illegal character {char!r}", line, col)

    tokens.append(Token(TokenKind.EOF, "", line, pos - line_start + 1))
    return tokens
