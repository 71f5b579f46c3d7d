"""Abstract syntax tree of DSL programs.

All nodes are immutable. Structural equality ignores source positions and the
annotations attached by name resolution, so a re-parsed or re-resolved tree
compares equal to the original.
"""

from __future__ import annotations

import gc
from abc import ABC
from collections.abc import Callable, Iterator
from enum import Enum
from typing import Any, TypeVar

import attrs
from attrs import define, field
from attrs.validators import deep_iterable, in_, instance_of, optional

from polyfal.dsl.types import DslType
from polyfal.utils.basic import to_tuple

_N = TypeVar("_N", bound="Node")

Loc = tuple[int, int]
"""A (line, col) source position."""


class IteratorKind(Enum):
    """The iteration spaces a ``foreach`` statement can traverse."""

    POINTS = "points"
    """All points of a graph."""

    EDGES = "edges"
    """All edges of a graph, in edge-list order."""

    NBRS = "nbrs"
    """All neighbours of a point (out- and in-neighbours)."""

    INNBRS = "innbrs"
    """Sources of the edges ending in a point."""

    OUTNBRS = "outnbrs"
    """Targets of the edges leaving a point."""

    SET_ITEMS = "setItems"
    """All elements of a Set."""

    COLLECTION_ITEMS = "collectionItems"
    """The current round of a Collection."""

    @property
    def is_graph_wide(self) -> bool:
        """Whether the iterator runs over a whole graph."""
        return self in (IteratorKind.POINTS, IteratorKind.EDGES)

    @property
    def is_neighbourhood(self) -> bool:
        """Whether the iterator runs over the neighbours of a point."""
        return self in (IteratorKind.NBRS, IteratorKind.INNBRS, IteratorKind.OUTNBRS)


NEIGHBOUR_ITERATORS = {k.value: k for k in IteratorKind if k.is_neighbourhood}
GRAPH_ITERATORS = {k.value: k for k in IteratorKind if k.is_graph_wide}
MEMBER_ITERATORS = NEIGHBOUR_ITERATORS | GRAPH_ITERATORS
"""Iterator names that appear after a dot in a ``foreach`` header."""


class Storage(Enum):
    """Storage classes of named values."""

    GLOBAL = "global"
    PARAM = "param"
    LOCAL = "local"
    PROPERTY = "property"
    BUILTIN = "builtin"
    FUNCTION = "function"


def _annotation(**kwargs: Any) -> Any:
    """Create an attrs field that is ignored by equality and hashing."""
    return field(default=None, eq=False, repr=False, kw_only=True, **kwargs)


@define(frozen=True)
class Node(ABC):
    """Base class of all syntax tree nodes."""

    loc: Loc | None = _annotation()
    """The source position of the node, if it stems from source text."""

    def children(self) -> Iterator[Node]:
        """Iterate over the direct child nodes in field order."""
        for f in attrs.fields(type(self)):
            if not f.eq:
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, tuple):
                yield from (v for v in value if isinstance(v, Node))

    def walk(self) -> Iterator[Node]:
        """Iterate over the node and all its descendants in pre-order."""
        yield self
        for child in self.children():
            yield from child.walk()

    def map_children(self: _N, fn: Callable[[Node], Node]) -> _N:
        """Return a copy of the node with ``fn`` applied to every direct child."""
        changes: dict[str, Any] = {}
        for f in attrs.fields(type(self)):
            if not f.eq:
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                new = fn(value)
                if new is not value:
                    changes[f.name] = new
            elif isinstance(value, tuple) and any(isinstance(v, Node) for v in value):
                mapped = tuple(fn(v) if isinstance(v, Node) else v for v in value)
                if any(a is not b for a, b in zip(mapped, value)):
                    changes[f.name] = mapped
        return attrs.evolve(self, **changes) if changes else self


def transform(node: _N, fn: Callable[[Node], Node | None]) -> _N:
    """Rewrite a tree top-down.

    ``fn`` is called on every node before its children. If it returns a node, that
    node replaces the original and is not descended into. If it returns ``None``,
    the children are processed recursively.
    """

    def visit(n: Node) -> Node:
        replacement = fn(n)
        if replacement is not None:
            return replacement
        return n.map_children(visit)

    return visit(node)  # type: ignore[return-value]


##### Expressions #####


@define(frozen=True)
class Expr(Node, ABC):
    """Base class of expressions."""

    dtype: DslType | None = _annotation()
    """The type assigned by name resolution."""


@define(frozen=True)
class IntLit(Expr):
    """An integer literal."""

    value: int = field(validator=instance_of(int))


@define(frozen=True)
class FloatLit(Expr):
    """A floating point literal."""

    value: float = field(validator=instance_of(float))


@define(frozen=True)
class BoolLit(Expr):
    """A truth literal."""

    value: bool = field(validator=instance_of(bool))


@define(frozen=True)
class Name(Expr):
    """A reference to a variable, parameter, builtin constant or property name."""

    id: str = field(validator=instance_of(str))
    storage: Storage | None = _annotation()


@define(frozen=True)
class TypeName(Expr):
    """A type keyword used as an argument, as in ``addPointProperty(dist, int)``."""

    name: str = field(validator=in_(("int", "float", "bool", "Point")))


@define(frozen=True)
class Member(Expr):
    """A field access ``obj.name``, e.g. a property or ``src``, ``dst``, ``id``."""

    obj: Expr = field(validator=instance_of(Expr))
    name: str = field(validator=instance_of(str))


@define(frozen=True)
class Index(Expr):
    """An indexed access ``obj[index]``."""

    obj: Expr = field(validator=instance_of(Expr))
    index: Expr = field(validator=instance_of(Expr))


@define(frozen=True)
class Call(Expr):
    """A call of a user function or of a builtin such as ``MIN`` or ``RADD``."""

    func: str = field(validator=instance_of(str))
    args: tuple[Expr, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(Expr))
    )


@define(frozen=True)
class MethodCall(Expr):
    """A method call ``obj.method(args)`` on a graph, set or collection."""

    obj: Expr = field(validator=instance_of(Expr))
    method: str = field(validator=instance_of(str))
    args: tuple[Expr, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(Expr))
    )


@define(frozen=True)
class Unary(Expr):
    """A prefix operator application."""

    op: str = field(validator=in_(("-", "!")))
    operand: Expr = field(validator=instance_of(Expr))


@define(frozen=True)
class Binary(Expr):
    """A binary operator application."""

    op: str = field(validator=instance_of(str))
    left: Expr = field(validator=instance_of(Expr))
    right: Expr = field(validator=instance_of(Expr))


##### Statements #####


@define(frozen=True)
class Stmt(Node, ABC):
    """Base class of statements."""


@define(frozen=True)
class Block(Stmt):
    """A braced statement sequence."""

    stmts: tuple[Stmt, ...] = field(
        factory=tuple, converter=to_tuple, validator=deep_iterable(instance_of(Stmt))
    )


@define(frozen=True)
class VarDecl(Stmt):
    """A declaration of a single variable, optionally initialized."""

    dtype: DslType = field(validator=instance_of(DslType))
    """The declared type; Point/Edge/Set/Collection may carry a graph binding."""

    name: str = field(validator=instance_of(str))
    init: Expr | None = field(default=None, validator=optional(instance_of(Expr)))


ASSIGN_OPS = ("=", "+=", "-=", "++", "--")


@define(frozen=True)
class Assign(Stmt):
    """An assignment, compound assignment or increment/decrement."""

    target: Expr = field(validator=instance_of(Expr))
    op: str = field(validator=in_(ASSIGN_OPS))
    value: Expr | None = field(default=None, validator=optional(instance_of(Expr)))

    @value.validator
    def _validate_value(self, _, value: Expr | None) -> None:  # noqa: DOC101, DOC103
        """Validate that only increments and decrements come without a value.

        Raises:
            ValueError: If the presence of the value does not match the operator.
        """
        if (value is None) != (self.op in ("++", "--")):
            raise ValueError(f"Operator '{self.op}' and value presence mismatch.")


@define(frozen=True)
class If(Stmt):
    """A conditional statement."""

    cond: Expr = field(validator=instance_of(Expr))
    then: Stmt = field(validator=instance_of(Stmt))
    orelse: Stmt | None = field(default=None, validator=optional(instance_of(Stmt)))


@define(frozen=True)
class While(Stmt):
    """A while loop."""

    cond: Expr = field(validator=instance_of(Expr))
    body: Stmt = field(validator=instance_of(Stmt))


@define(frozen=True)
class Break(Stmt):
    """Leave the innermost loop."""


@define(frozen=True)
class Return(Stmt):
    """Return from the enclosing function."""

    value: Expr | None = field(default=None, validator=optional(instance_of(Expr)))


@define(frozen=True)
class ExprStmt(Stmt):
    """An expression evaluated for its side effects (calls)."""

    expr: Expr = field(validator=instance_of(Expr))


@define(frozen=True)
class Foreach(Stmt):
    """The parallel iteration construct."""

    var: str = field(validator=instance_of(str))
    """The iteration variable."""

    subject: Expr = field(validator=instance_of(Expr))
    """The graph, point, set or collection that is iterated."""

    iterator: IteratorKind = field(validator=instance_of(IteratorKind))
    filter: Expr | None = field(default=None, validator=optional(instance_of(Expr)))
    body: Stmt = field(factory=Block, validator=instance_of(Stmt))

    outer: bool = field(default=False, validator=instance_of(bool))
    """Whether this is a graph-wide foreach at foreach-nesting level 0."""

    var_type: DslType | None = _annotation()

    @property
    def launch_call(self) -> Call | None:
        """The call if the body consists of exactly one user-function call."""
        body = self.body
        if isinstance(body, Block) and len(body.stmts) == 1:
            body = body.stmts[0]
        if isinstance(body, ExprStmt) and isinstance(body.expr, Call):
            return body.expr
        return None


@define(frozen=True)
class Single(Stmt):
    """The non-blocking lock statement ``single (target) A else B``."""

    target: Expr = field(validator=instance_of(Expr))
    then: Stmt = field(validator=instance_of(Stmt))
    orelse: Stmt | None = field(default=None, validator=optional(instance_of(Stmt)))


@define(frozen=True)
class ParallelSections(Stmt):
    """Mutually independent blocks that may run concurrently."""

    sections: tuple[Block, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(Block))
    )


##### Declarations #####


@define(frozen=True)
class Param(Node):
    """A function parameter."""

    dtype: DslType = field(validator=instance_of(DslType))
    name: str = field(validator=instance_of(str))


@define(frozen=True)
class FunctionDecl(Node):
    """A function definition."""

    ret: DslType = field(validator=instance_of(DslType))
    name: str = field(validator=instance_of(str))
    params: tuple[Param, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(Param))
    )
    body: Block = field(validator=instance_of(Block))

    @params.validator
    def _validate_params(self, _, params: tuple[Param, ...]) -> None:  # noqa: DOC101, DOC103
        """Validate that parameter names are unique.

        Raises:
            ValueError: If a parameter name occurs twice.
        """
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate parameter names in function '{self.name}'.")

    def param(self, name: str) -> Param | None:
        """Return the parameter with the given name, if any."""
        return next((p for p in self.params if p.name == name), None)


@define(frozen=True)
class Program(Node):
    """A complete DSL program."""

    globals: tuple[VarDecl, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(VarDecl))
    )
    functions: tuple[FunctionDecl, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(FunctionDecl))
    )
    """All functions except ``main``, in source order."""

    main: FunctionDecl = field(validator=instance_of(FunctionDecl))

    @functions.validator
    def _validate_functions(self, _, functions: tuple[FunctionDecl, ...]) -> None:  # noqa: DOC101, DOC103
        """Validate that function names are unique and ``main`` is not among them.

        Raises:
            ValueError: If a function name is duplicated or ``main`` is listed.
        """
        names = [f.name for f in functions]
        if len(set(names)) != len(names) or "main" in names:
            raise ValueError("Function names must be unique and exclude 'main'.")

    @property
    def all_functions(self) -> tuple[FunctionDecl, ...]:
        """All functions including ``main``."""
        return (*self.functions, self.main)

    def function(self, name: str) -> FunctionDecl | None:
        """Return the function with the given name, if any."""
        return next((f for f in self.all_functions if f.name == name), None)

    @property
    def global_names(self) -> list[str]:
        """The names of all global variables in declaration order."""
        return [g.name for g in self.globals]

    def replace_function(self, fn: FunctionDecl) -> Program:
        """Return a copy with the function of the same name replaced."""
        if fn.name == "main":
            return attrs.evolve(self, main=fn)
        return attrs.evolve(
            self,
            functions=tuple(fn if f.name == fn.name else f for f in self.functions),
        )


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
