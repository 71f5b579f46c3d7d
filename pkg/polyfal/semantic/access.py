"""Read and write sets of functions and statements.

The analysis is flow- and path-insensitive: a name is in a set if it is read
(written) anywhere in the analyzed code, including transitively called
functions. Local variables and parameters are thread-private and never appear.
Three kinds of shared state are tracked:

* global variables, by name,
* dynamic properties, as ``(graph, property)`` pairs, where the pseudo property
  ``weight`` stands for edge weights,
* shared objects, by name: graph topologies (read through iteration and
  element fields, written by ``read``) and sets and collections.

Inside a function, values whose graph depends on the call site carry a
placeholder graph (see :func:`~polyfal.semantic.symbols.symbolic_graph`).
Calls instantiate the placeholders with the caller's bindings.
"""

from __future__ import annotations

import gc
from collections.abc import Iterable, Mapping

from attrs import define, field

from polyfal.dsl.ast import (
    Assign,
    Call,
    Expr,
    Foreach,
    FunctionDecl,
    Index,
    IteratorKind,
    Member,
    MethodCall,
    Name,
    Node,
    Program,
    Single,
    Stmt,
    Storage,
    VarDecl,
)
from polyfal.dsl.types import TypeKind
from polyfal.exceptions import SemanticError
from polyfal.semantic.callgraph import find_recursion
from polyfal.semantic.resolver import ATOMIC_BUILTINS, REDUCTION_BUILTINS
from polyfal.semantic.symbols import symbolic_graph

ANY_GRAPH = "*"
"""Graph component of property accesses whose graph is unknown."""

WEIGHT = "weight"
"""Pseudo property standing for edge weights."""


def _graphs_match(a: str, b: str) -> bool:
    return a == b or ANY_GRAPH in (a, b)


@define(frozen=True)
class AccessSet:
    """A set of shared-state locations."""

    globals: frozenset[str] = field(factory=frozenset, converter=frozenset)
    """Global variable names."""

    properties: frozenset[tuple[str, str]] = field(
        factory=frozenset, converter=frozenset
    )
    """Accessed properties as ``(graph, property)`` pairs."""

    objects: frozenset[str] = field(factory=frozenset, converter=frozenset)
    """Graph topologies, sets and collections, by variable name."""

    def __or__(self, other: AccessSet) -> AccessSet:
        return AccessSet(
            self.globals | other.globals,
            self.properties | other.properties,
            self.objects | other.objects,
        )

    @property
    def is_empty(self) -> bool:
        """Whether the set contains no location."""
        return not (self.globals or self.properties or self.objects)

    @property
    def property_names(self) -> frozenset[str]:
        """The property names regardless of their graph."""
        return frozenset(p for _, p in self.properties)

    def intersects(self, other: AccessSet) -> bool:
        """Whether the two sets share a location.

        Properties of an unknown graph conflict with the same property of any graph.
        """
        if self.globals & other.globals or self.objects & other.objects:
            return True
        return any(
            p == q and _graphs_match(g, h)
            for g, p in self.properties
            for h, q in other.properties
        )

    def instantiate(self, mapping: Mapping[str, str]) -> AccessSet:
        """Rename graphs and objects, e.g. from parameter names to argument names."""
        return AccessSet(
            self.globals,
            {(mapping.get(g, g), p) for g, p in self.properties},
            {mapping.get(o, o) for o in self.objects},
        )

    def render(self) -> str:
        """Render the set deterministically, as in ``{changed,graph.dist}``."""
        items = sorted(self.globals)
        items += sorted(f"{g}.{p}" for g, p in self.properties)
        items += sorted(f"&{o}" for o in self.objects)
        return "{" + ",".join(items) + "}"


EMPTY = AccessSet()


def _graph_of(expr: Expr) -> str:
    """The graph a graph, element or container expression belongs to."""
    if expr.dtype is None:
        return ANY_GRAPH
    if expr.dtype.kind is TypeKind.GRAPH and isinstance(expr, Name):
        return expr.id
    return expr.dtype.graph or ANY_GRAPH


def call_mapping(fn: FunctionDecl, args: Iterable[Expr]) -> dict[str, str]:
    """Map parameter names and placeholders of ``fn`` to the bindings of a call.

    Args:
        fn: The called function.
        args: The resolved argument expressions of the call.

    Returns:
        The renaming that instantiates the callee's access sets at the call.
    """
    mapping: dict[str, str] = {}
    for param, arg in zip(fn.params, args):
        kind = param.dtype.kind
        if kind is TypeKind.GRAPH and isinstance(arg, Name):
            mapping[param.name] = arg.id
        if kind in (TypeKind.SET, TypeKind.COLLECTION) and isinstance(arg, Name):
            mapping[param.name] = arg.id
        if param.dtype.graph is None and (
            param.dtype.is_graph_element or param.dtype.is_container
        ):
            mapping[symbolic_graph(param.name)] = _graph_of(arg)
    return mapping


class _Collector:
    """Accumulates the read and write sets of code fragments."""

    def __init__(self, analyzer: AccessAnalyzer):
        self._analyzer = analyzer
        self.globals_r: set[str] = set()
        self.globals_w: set[str] = set()
        self.props_r: set[tuple[str, str]] = set()
        self.props_w: set[tuple[str, str]] = set()
        self.objects_r: set[str] = set()
        self.objects_w: set[str] = set()

    def result(self) -> tuple[AccessSet, AccessSet]:
        return (
            AccessSet(self.globals_r, self.props_r, self.objects_r),
            AccessSet(self.globals_w, self.props_w, self.objects_w),
        )

    def merge(self, read: AccessSet, write: AccessSet) -> None:
        self.globals_r |= read.globals
        self.props_r |= read.properties
        self.objects_r |= read.objects
        self.globals_w |= write.globals
        self.props_w |= write.properties
        self.objects_w |= write.objects

    ##### Expressions #####

    def read(self, expr: Node) -> None:
        match expr:
            case Name(id=name, storage=Storage.GLOBAL):
                self.globals_r.add(name)
            case Member(obj=obj, name=name):
                self.read(obj)
                self._member(obj, name, self.props_r)
            case Index(obj=Member(obj=graph, name="points" | "edges"), index=index):
                self.read(index)
                self.objects_r.add(_graph_of(graph))
            case Call(func=func, args=args) if func in ATOMIC_BUILTINS:
                self.update(args[0], compound=True)
                self.read(args[1])
                self.update(args[2], compound=False)
            case Call(func=func, args=args) if func in REDUCTION_BUILTINS:
                self.update(args[0], compound=True)
                self.read(args[1])
            case Call(func=func, args=args):
                for arg in args:
                    self.read(arg)
                callee = self._analyzer.program.function(func)
                if callee is not None:
                    read, write = self._analyzer.function_sets(callee)
                    mapping = call_mapping(callee, args)
                    self.merge(read.instantiate(mapping), write.instantiate(mapping))
            case MethodCall():
                self._method_call(expr)
            case _:
                for child in expr.children():
                    self.read(child)

    def _member(self, obj: Expr, name: str, props: set[tuple[str, str]]) -> None:
        graph = _graph_of(obj)
        if name in ("id", "src", "dst"):
            self.objects_r.add(graph)
        elif name == WEIGHT:
            props.add((graph, WEIGHT))
        else:
            props.add((graph, name))

    def _method_call(self, expr: MethodCall) -> None:
        obj, method = expr.obj, expr.method
        kind = None if obj.dtype is None else obj.dtype.kind
        name = _graph_of(obj) if kind is TypeKind.GRAPH else getattr(obj, "id", "")
        if method in ("addPointProperty", "addEdgeProperty"):
            prop = expr.args[0]
            if isinstance(prop, Name):
                self.props_w.add((name, prop.id))
            return
        for arg in expr.args:
            self.read(arg)
        match kind, method:
            case TypeKind.GRAPH, "read":
                self.objects_w.add(name)
            case TypeKind.GRAPH, "getweight":
                self.props_r.add((name, WEIGHT))
            case TypeKind.GRAPH, _:
                self.objects_r.add(name)
            case TypeKind.SET, "union":
                self.objects_r.add(name)
                self.objects_w.add(name)
            case TypeKind.COLLECTION, "add":
                self.objects_w.add(name)
            case _:
                self.objects_r.add(name)

    def update(self, target: Expr, compound: bool) -> None:
        """Record a write to an assignable expression."""
        match target:
            case Name(id=name, storage=Storage.GLOBAL):
                self.globals_w.add(name)
                if compound:
                    self.globals_r.add(name)
            case Member(obj=obj, name=name):
                self.read(obj)
                self._member(obj, name, self.props_w)
                if compound:
                    self._member(obj, name, self.props_r)

    ##### Statements #####

    def stmt(self, stmt: Stmt) -> None:
        match stmt:
            case VarDecl(init=init):
                if init is not None:
                    self.read(init)
            case Assign(target=target, op=op, value=value):
                self.update(target, compound=op != "=")
                if value is not None:
                    self.read(value)
            case Foreach():
                self.foreach_header(stmt)
                self.stmt(stmt.body)
            case Single(target=target, then=then, orelse=orelse):
                self.read(target)
                self.stmt(then)
                if orelse is not None:
                    self.stmt(orelse)
            case _:
                for child in stmt.children():
                    if isinstance(child, Stmt):
                        self.stmt(child)
                    else:
                        self.read(child)

    def foreach_header(self, stmt: Foreach) -> None:
        """Record the iteration space and the filter of a ``foreach``."""
        self.read(stmt.subject)
        subject = stmt.subject
        if stmt.iterator is IteratorKind.COLLECTION_ITEMS and isinstance(subject, Name):
            # Iterating a collection consumes its current round
            self.objects_r.add(subject.id)
            self.objects_w.add(subject.id)
        elif stmt.iterator is IteratorKind.SET_ITEMS and isinstance(subject, Name):
            self.objects_r.add(subject.id)
        else:
            self.objects_r.add(_graph_of(subject))
        if stmt.filter is not None:
            self.read(stmt.filter)


class AccessAnalyzer:
    """Computes read/write sets over a resolved program, memoizing per function."""

    def __init__(self, program: Program):
        self.program = program
        self._cache: dict[str, tuple[AccessSet, AccessSet]] = {}
        if (cycle := find_recursion(program)) is not None:
            fn = program.function(cycle[0])
            line, col = (fn.loc if fn is not None and fn.loc else (0, 0))
            raise SemanticError(
                f"recursive call chain {' -> '.join(cycle)}", line, col
            )

    def function_sets(self, fn: FunctionDecl) -> tuple[AccessSet, AccessSet]:
        """The read and write sets of a function in its own naming."""
        if fn.name not in self._cache:
            collector = _Collector(self)
            collector.stmt(fn.body)
            self._cache[fn.name] = collector.result()
        return self._cache[fn.name]

    def stmt_sets(self, stmt: Stmt) -> tuple[AccessSet, AccessSet]:
        """The read and write sets of a statement, including called functions."""
        collector = _Collector(self)
        collector.stmt(stmt)
        return collector.result()

    def expr_sets(self, expr: Expr) -> tuple[AccessSet, AccessSet]:
        """The read and write sets of evaluating an expression."""
        collector = _Collector(self)
        collector.read(expr)
        return collector.result()

    def launch_header_sets(self, stmt: Foreach) -> AccessSet:
        """The reads of a launch's iteration space, filter and call arguments."""
        collector = _Collector(self)
        collector.foreach_header(stmt)
        call = stmt.launch_call
        if call is not None:
            for arg in call.args:
                collector.read(arg)
        read, _ = collector.result()
        return read


def compute_rw_sets(
    fn: FunctionDecl, program: Program
) -> tuple[AccessSet, AccessSet]:
    """Compute the read and write sets of a function.

    Args:
        fn: A resolved function of ``program``.
        program: The resolved program, used to look up called functions.

    Returns:
        The read set and the write set. Values derived from parameters whose graph
        is fixed per call site carry placeholder graphs.

    Raises:
        SemanticError: If the program contains a recursive call chain.
    """
    return AccessAnalyzer(program).function_sets(fn)


def compute_stmt_rw_sets(
    stmt: Stmt, program: Program
) -> tuple[AccessSet, AccessSet]:
    """Compute the read and write sets of a single statement.

    For a kernel launch this includes the launch's subject, filter and argument
    reads plus the instantiated sets of the called function.

    Raises:
        SemanticError: If the program contains a recursive call chain.
    """
    return AccessAnalyzer(program).stmt_sets(stmt)


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
