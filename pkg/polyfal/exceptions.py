"""Custom exceptions and warnings."""

from __future__ import annotations

from typing import Any

from attrs import define, field
from attrs.validators import instance_of, optional
from typing_extensions import override

try:  # For python < 3.11, use the exceptiongroup backport
    BaseExceptionGroup
except NameError:
    from exceptiongroup import BaseExceptionGroup

##### Warnings #####


class FallbackWarning(UserWarning):
    """
    A requested transformation was not applicable and the program was compiled in its
    original processing mode instead.
    """


class ForcedTargetWarning(UserWarning):
    """A restricted mode/target combination was compiled because it was forced."""


class DuplicateEdgeWarning(UserWarning):
    """Duplicate edges were collapsed to their minimum weight while loading a graph."""


##### Exceptions #####


class PolyfalError(Exception):
    """Base class of all errors raised by this package."""


@define(eq=False)
class LocatedError(PolyfalError):
    """An error that refers to a position in a DSL source text."""

    message: str = field(validator=instance_of(str))
    """The human-readable error description."""

    line: int = field(default=0, validator=instance_of(int))
    """The 1-based source line (0 if unknown)."""

    col: int = field(default=0, validator=instance_of(int))
    """The 1-based source column (0 if unknown)."""

    @override
    def __str__(self):
        if self.line:
            return f"{self.line}:{self.col}: {self.message}"
        return self.message


class SyntaxDslError(LocatedError):
    """The DSL source text is not well-formed."""


class LexError(SyntaxDslError):
    """The source text contains a character that starts no token."""


@define(eq=False)
class ParseError(SyntaxDslError):
    """The token stream does not match the grammar."""

    expected: str = field(default="", validator=instance_of(str))
    """A description of what the parser expected."""

    found: str = field(default="", validator=instance_of(str))
    """The lexeme that was found instead."""


class SemanticError(LocatedError):
    """A well-formed program violates a name, type or property rule."""


class TransformError(PolyfalError):
    """A program transformation could not be applied."""


class NotEligibleError(TransformError):
    """A vertex/edge conversion was requested for an ineligible program."""


class NotConvertibleError(TransformError):
    """A worklist conversion was requested for a non-convertible kernel."""


class OptionsError(PolyfalError):
    """Compilation options are inconsistent."""


class LoweringError(PolyfalError):
    """A program cannot be lowered to the requested target."""


class DslRuntimeError(PolyfalError):
    """A compiled program failed during execution."""


class DivergenceError(DslRuntimeError):
    """A fixpoint loop exceeded the configured iteration cap."""


class DeltaError(DslRuntimeError):
    """A delta-stepping worklist was configured with a non-positive bucket width."""


class GraphError(PolyfalError):
    """A graph is structurally invalid."""


@define(eq=False)
class GraphFormatError(GraphError):
    """A graph file does not follow the edge-list format."""

    message: str = field(validator=instance_of(str))
    """The human-readable error description."""

    line: int = field(validator=instance_of(int))
    """The 1-based line number the problem was detected on."""

    text: str | None = field(default=None, validator=optional(instance_of(str)))
    """The offending line, if there is one."""

    @override
    def __str__(self):
        suffix = f" ({self.text!r})" if self.text is not None else ""
        return f"line {self.line}: {self.message}{suffix}"


class GraphIoError(GraphError):
    """A graph file could not be read or written."""


class ParamError(PolyfalError):
    """A graph generator was called with invalid parameters."""


def exit_code_for(error: BaseException, /) -> int:
    """Map an error to the exit code used by the command-line interface."""
    if isinstance(error, BaseExceptionGroup):
        codes = {exit_code_for(e) for e in error.exceptions}
        return min(codes) if codes else 1
    table: list[tuple[type[Any], int]] = [
        (OptionsError, 1),
        (SyntaxDslError, 2),
        (SemanticError, 2),
        (TransformError, 3),
        (LoweringError, 4),
    ]
    for cls, code in table:
        if isinstance(error, cls):
            return code
    return 5

