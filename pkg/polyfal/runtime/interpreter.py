"""Execution of DSL code by compiling it into Python closures.

Every expression compiles to a function ``(env, frame) -> value`` and every
statement to a function ``(env, frame) -> None``. The :class:`Env` names the
memory the code runs against and collects work counters; the frame holds local
variables. Graphs, sets and collections are resolved when compiling: a
function is compiled once per binding of its graph and container parameters.

Points and edges are represented by their ids. Truth values are ``0`` and
``1``, and integer division truncates toward zero.
"""

from __future__ import annotations

import gc
import logging
import operator
import threading
from collections.abc import Callable, Mapping, Sequence
from typing import Any

from attrs import define, field

from polyfal.dsl.ast import (
    Assign,
    Binary,
    Block,
    BoolLit,
    Break,
    Call,
    Expr,
    ExprStmt,
    FloatLit,
    Foreach,
    FunctionDecl,
    If,
    Index,
    IntLit,
    IteratorKind,
    Member,
    MethodCall,
    Name,
    ParallelSections,
    Program,
    Return,
    Single,
    Stmt,
    Storage,
    TypeName,
    Unary,
    VarDecl,
    While,
)
from polyfal.dsl.printer import render_expr
from polyfal.dsl.types import TypeKind
from polyfal.exceptions import DivergenceError, DslRuntimeError
from polyfal.runtime.locks import SingleLock, StripedLocks, single_try
from polyfal.runtime.memory import PROPERTY_DTYPES, Memory, PropertyDecl
from polyfal.runtime.store import GraphStore
from polyfal.runtime.unionfind import UnionFindSet
from polyfal.runtime.worklist import Worklist, WorklistMode, default_delta
from polyfal.semantic.access import call_mapping
from polyfal.semantic.symbols import BUILTIN_CONSTANTS, ElementKind

_logger = logging.getLogger(__name__)

Frame = dict[str, Any]
ExprFn = Callable[["Env", Frame], Any]
StmtFn = Callable[["Env", Frame], None]
Space = Callable[["Env", Frame], tuple[Sequence[int], bool]]
"""Computes the items of an iteration space and whether they count as edges."""


class LoopBreak(Exception):
    """Leaves the innermost loop."""


class FunctionReturn(Exception):
    """Leaves the current function."""

    def __init__(self, value: Any):
        super().__init__()
        self.value = value


##### Global variables #####

_COMBINE: dict[str, Callable[[Any, Any], Any]] = {
    "+": operator.add,
    "*": operator.mul,
    "min": min,
    "max": max,
}


class HostGlobals:
    """Direct access to the global variables of a memory."""

    def __init__(self, values: dict[str, Any]):
        self.values = values

    def get(self, name: str) -> Any:
        try:
            return self.values[name]
        except KeyError:
            raise DslRuntimeError(f"Global '{name}' is not available.") from None

    def assign(self, name: str, value: Any) -> None:
        self.values[name] = value

    def combine(self, op: str, name: str, value: Any) -> None:
        self.values[name] = _COMBINE[op](self.get(name), value)


class Overlay(HostGlobals):
    """A worker-private view of global variables.

    Writes stay local and are logged. At the end of a launch, the logs of all
    workers are replayed on the shared values in worker order, which combines
    reductions and OR-s convergence flags.
    """

    def __init__(self, base: dict[str, Any]):
        super().__init__({})
        self.base = base
        self.log: list[tuple[str, str, Any]] = []

    def get(self, name: str) -> Any:
        if name in self.values:
            return self.values[name]
        try:
            return self.base[name]
        except KeyError:
            raise DslRuntimeError(f"Global '{name}' is not available.") from None

    def assign(self, name: str, value: Any) -> None:
        self.values[name] = value
        self.log.append(("=", name, value))

    def combine(self, op: str, name: str, value: Any) -> None:
        self.values[name] = _COMBINE[op](self.get(name), value)
        self.log.append((op, name, value))

    def merge_into(self, target: dict[str, Any]) -> None:
        """Replay the logged writes on ``target``."""
        for op, name, value in self.log:
            target[name] = value if op == "=" else _COMBINE[op](target[name], value)


##### Execution state #####


@define(eq=False)
class Runtime:
    """State shared by all code executed for one plan."""

    program: Program
    stores: tuple[GraphStore, ...]
    host: Memory = field(factory=Memory)
    worklist_mode: WorklistMode = field(factory=WorklistMode)
    iteration_cap: int = 100

    graphs: dict[str, GraphStore] = field(factory=dict, init=False)
    """Stores bound to graph variables by ``read``."""

    declared: dict[tuple[str, str], PropertyDecl] = field(factory=dict, init=False)
    containers: dict[str, UnionFindSet | Worklist] = field(factory=dict, init=False)
    atomics: StripedLocks = field(factory=StripedLocks, init=False)
    singles: SingleLock = field(factory=SingleLock, init=False)
    compiler: Compiler = field(init=False)
    _guard: threading.Lock = field(factory=threading.Lock, init=False, repr=False)

    def __attrs_post_init__(self) -> None:
        self.compiler = Compiler(self.program)

    def store(self, graph: str) -> GraphStore:
        """The store bound to a graph variable.

        Raises:
            DslRuntimeError: If the graph has not been read.
        """
        try:
            return self.graphs[graph]
        except KeyError:
            message = f"Graph '{graph}' is used before it is read."
            raise DslRuntimeError(message) from None

    def bind(self, graph: str, position: int) -> None:
        """Bind the graph at ``argv[position]`` to a graph variable.

        Raises:
            DslRuntimeError: If no graph was supplied at that position.
        """
        if not 1 <= position <= len(self.stores):
            raise DslRuntimeError(
                f"'argv[{position}]' names no graph; {len(self.stores)} graph(s) "
                f"were supplied."
            )
        store = self.stores[position - 1]
        with self._guard:
            self.graphs[graph] = store
            decls = [d for d in self.declared.values() if d.graph == graph]
        for decl in decls:
            self._allocate(decl, store)
        _logger.debug("Bound argv[%d] to graph '%s'", position, graph)

    def declare(self, graph: str, name: str, element: ElementKind, type_: str) -> None:
        """Declare a dynamic property, allocating it if the graph is read."""
        decl = PropertyDecl(graph, name, element, PROPERTY_DTYPES[type_])
        with self._guard:
            self.declared[decl.key] = decl
            store = self.graphs.get(graph)
        if store is not None:
            self._allocate(decl, store)

    def _allocate(self, decl: PropertyDecl, store: GraphStore) -> None:
        self.host.props[decl.key] = decl.allocate(store)

    def container(self, name: str) -> Any:
        """The set or collection of a variable of ``main``.

        Raises:
            DslRuntimeError: If the container has not been declared yet.
        """
        try:
            return self.containers[name]
        except KeyError:
            raise DslRuntimeError(f"'{name}' is used before its declaration.") from None

    def element_count(self, obj: str) -> int:
        """The number of elements of a transferable object."""
        graph, prop = obj.partition(".")[::2]
        if prop:
            values = self.host.props.get((graph, prop))
            return 1 if values is None else len(values)
        if obj in self.graphs:
            store = self.graphs[obj]
            return store.n + 1 + 2 * store.m
        if obj in self.containers:
            return self.containers[obj].n
        return 1


@define(eq=False)
class Env:
    """The memory that code runs against, and the work it has done."""

    runtime: Runtime
    memory: Memory
    globals: HostGlobals
    kernel: bool = False
    """Whether the code runs inside a kernel launch."""

    token: object = None
    """The owner of ``single`` locks taken by the current kernel invocation."""

    owners: list[object] = field(factory=list)
    vertex_work: int = 0
    edge_work: int = 0
    host_items: int = 0
    loop_iterations: int = 0
    invocations: int = 0


##### Helpers #####


def _truth(value: Any) -> int:
    return 1 if value else 0


def _divide(a: Any, b: Any) -> Any:
    if b == 0:
        raise DslRuntimeError("Division by zero.")
    if isinstance(a, int) and isinstance(b, int):
        quotient = abs(a) // abs(b)
        return quotient if (a >= 0) == (b >= 0) else -quotient
    return a / b


def _modulo(a: Any, b: Any) -> Any:
    if b == 0:
        raise DslRuntimeError("Division by zero.")
    if isinstance(a, int) and isinstance(b, int):
        return a - b * _divide(a, b)
    return a - b * int(a / b)


_BINARY: dict[str, Callable[[Any, Any], Any]] = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": _divide,
    "%": _modulo,
    "==": lambda a, b: _truth(a == b),
    "!=": lambda a, b: _truth(a != b),
    "<": lambda a, b: _truth(a < b),
    "<=": lambda a, b: _truth(a <= b),
    ">": lambda a, b: _truth(a > b),
    ">=": lambda a, b: _truth(a >= b),
}


def _graph(expr: Expr, mapping: Mapping[str, str]) -> str:
    """The graph variable of ``main`` a graph, element or container belongs to."""
    dtype = expr.dtype
    name: str | None = None
    if dtype is not None:
        if dtype.kind is TypeKind.GRAPH:
            name = expr.id if isinstance(expr, Name) else None
        else:
            name = dtype.graph
    if name is None:
        raise DslRuntimeError(f"Cannot tell the graph of '{render_expr(expr)}'.")
    return mapping.get(name, name)


def _container(expr: Expr, mapping: Mapping[str, str]) -> str:
    if not isinstance(expr, Name):
        raise DslRuntimeError(f"'{render_expr(expr)}' does not name a container.")
    return mapping.get(expr.id, expr.id)


def _converter(expr: Expr) -> Callable[[Any], Any]:
    if expr.dtype is not None and expr.dtype.kind is TypeKind.FLOAT:
        return float
    return int


def _scope_key(mapping: Mapping[str, str]) -> tuple[tuple[str, str], ...]:
    return tuple(sorted(mapping.items()))


@define(frozen=True)
class _Target:
    """A compiled assignable location."""

    kind: str
    """``local``, ``global`` or ``property``."""

    name: str
    graph: str = ""
    index: ExprFn | None = None
    convert: Callable[[Any], Any] = int


##### Compiler #####


class Compiler:
    """Compiles statements and expressions of a resolved program."""

    def __init__(self, program: Program):
        self._program = program
        self._functions: dict[tuple[str, tuple], Callable[[Env, list], Any]] = {}
        self._stmts: dict[tuple[int, tuple], StmtFn] = {}
        self._lock = threading.RLock()

    ##### Functions #####

    def function(
        self, fn: FunctionDecl, mapping: Mapping[str, str]
    ) -> Callable[[Env, list[Any]], Any]:
        """Compile a function for the given bindings of its parameters."""
        key = (fn.name, _scope_key(mapping))
        with self._lock:
            if key in self._functions:
                return self._functions[key]
            names = [p.name for p in fn.params]
            floats = {p.name for p in fn.params if p.dtype.kind is TypeKind.FLOAT}
            body = self.stmt(fn.body, mapping)

            def run(env: Env, args: list[Any]) -> Any:
                frame = dict(zip(names, args))
                for name in floats:
                    frame[name] = float(frame[name])
                try:
                    body(env, frame)
                except FunctionReturn as ret:
                    return ret.value
                return None

            self._functions[key] = run
            _logger.debug("Compiled '%s' for %s", fn.name, dict(mapping) or "main")
            return run

    ##### Statements #####

    def stmt(self, stmt: Stmt, mapping: Mapping[str, str]) -> StmtFn:
        """Compile a statement."""
        key = (id(stmt), _scope_key(mapping))
        with self._lock:
            if key not in self._stmts:
                self._stmts[key] = self._stmt(stmt, mapping)
            return self._stmts[key]

    def _stmt(self, stmt: Stmt, mapping: Mapping[str, str]) -> StmtFn:
        match stmt:
            case Block(stmts=stmts):
                return self._block(stmts, mapping)
            case VarDecl():
                return self._var_decl(stmt, mapping)
            case Assign():
                return self._assign(stmt, mapping)
            case If(cond=cond, then=then, orelse=orelse):
                return self._if(
                    self.expr(cond, mapping),
                    self.stmt(then, mapping),
                    None if orelse is None else self.stmt(orelse, mapping),
                )
            case While(cond=cond, body=body):
                return self._while(
                    self.expr(cond, mapping), self.stmt(body, mapping), stmt
                )
            case Break():
                return _break
            case Return(value=value):
                compiled = None if value is None else self.expr(value, mapping)
                return self._return(compiled)
            case ExprStmt(expr=expr):
                compiled = self.expr(expr, mapping)

                def run_expr(env: Env, frame: Frame) -> None:
                    compiled(env, frame)

                return run_expr
            case Foreach():
                return self._foreach(stmt, mapping)
            case Single():
                return self._single(stmt, mapping)
            case ParallelSections(sections=sections):
                return self._block(sections, mapping)
        raise TypeError(f"Unknown statement type '{type(stmt).__name__}'.")

    def _block(self, stmts: Sequence[Stmt], mapping: Mapping[str, str]) -> StmtFn:
        compiled = [self.stmt(s, mapping) for s in stmts]

        def run(env: Env, frame: Frame) -> None:
            for s in compiled:
                s(env, frame)

        return run

    @staticmethod
    def _if(cond: ExprFn, then: StmtFn, orelse: StmtFn | None) -> StmtFn:
        def run(env: Env, frame: Frame) -> None:
            if cond(env, frame):
                then(env, frame)
            elif orelse is not None:
                orelse(env, frame)

        return run

    @staticmethod
    def _while(cond: ExprFn, body: StmtFn, stmt: While) -> StmtFn:
        def run(env: Env, frame: Frame) -> None:
            cap = env.runtime.iteration_cap
            count = 0
            try:
                while cond(env, frame):
                    count += 1
                    if count > cap:
                        raise DivergenceError(
                            f"The loop at {stmt.loc} exceeded {cap} iterations."
                        )
                    body(env, frame)
            except LoopBreak:
                pass
            finally:
                env.loop_iterations += count

        return run

    @staticmethod
    def _return(value: ExprFn | None) -> StmtFn:
        def run(env: Env, frame: Frame) -> None:
            raise FunctionReturn(None if value is None else value(env, frame))

        return run

    def _var_decl(self, decl: VarDecl, mapping: Mapping[str, str]) -> StmtFn:
        name = decl.name
        kind = decl.dtype.kind
        if kind is TypeKind.GRAPH:

            def declare_graph(env: Env, frame: Frame) -> None:
                frame[name] = name

            return declare_graph
        if kind in (TypeKind.SET, TypeKind.COLLECTION):
            if decl.dtype.graph is None:
                raise DslRuntimeError(f"'{name}' needs a graph binding.")
            graph = mapping.get(decl.dtype.graph, decl.dtype.graph)
            container = mapping.get(name, name)

            def declare_container(env: Env, frame: Frame) -> None:
                runtime = env.runtime
                store = runtime.store(graph)
                if kind is TypeKind.SET:
                    runtime.containers[container] = UnionFindSet(store.n)
                else:
                    mode = runtime.worklist_mode
                    delta = mode.delta or default_delta(store.weight)
                    runtime.containers[container] = Worklist(store.n, mode, delta)
                frame[name] = container

            return declare_container

        init = None if decl.init is None else self.expr(decl.init, mapping)
        convert = float if kind is TypeKind.FLOAT else None

        def declare(env: Env, frame: Frame) -> None:
            value = 0 if init is None else init(env, frame)
            frame[name] = value if convert is None else convert(value)

        return declare

    ##### Assignments #####

    def _target(self, expr: Expr, mapping: Mapping[str, str]) -> _Target:
        match expr:
            case Name(id=name, storage=Storage.GLOBAL):
                return _Target("global", name)
            case Name(id=name):
                return _Target("local", name)
            case Member(obj=obj, name=name):
                return _Target(
                    "property",
                    name,
                    _graph(obj, mapping),
                    self.expr(obj, mapping),
                    _converter(expr),
                )
        raise DslRuntimeError(f"'{render_expr(expr)}' is not assignable.")

    def _setter(self, expr: Expr, mapping: Mapping[str, str]) -> Callable:
        """A function ``(env, frame, value)`` storing into a location."""
        target = self._target(expr, mapping)
        name, graph, index = target.name, target.graph, target.index
        match target.kind:
            case "global":
                return lambda env, frame, value: env.globals.assign(name, value)
            case "local":
                return lambda env, frame, value: frame.__setitem__(name, value)

        def store(env: Env, frame: Frame, value: Any) -> None:
            assert index is not None
            env.memory.prop(graph, name)[index(env, frame)] = value

        return store

    def _assign(self, stmt: Assign, mapping: Mapping[str, str]) -> StmtFn:
        target = self._target(stmt.target, mapping)
        value = None if stmt.value is None else self.expr(stmt.value, mapping)
        op = stmt.op
        name = target.name

        def operand(env: Env, frame: Frame) -> Any:
            match op:
                case "++":
                    return 1
                case "--":
                    return -1
            assert value is not None
            v = value(env, frame)
            return -v if op == "-=" else v

        if target.kind == "global":

            def assign_global(env: Env, frame: Frame) -> None:
                if op == "=":
                    env.globals.assign(name, operand(env, frame))
                else:
                    env.globals.combine("+", name, operand(env, frame))

            return assign_global
        if target.kind == "local":
            is_float = stmt.target.dtype is not None and (
                stmt.target.dtype.kind is TypeKind.FLOAT
            )

            def assign_local(env: Env, frame: Frame) -> None:
                v = operand(env, frame)
                if op != "=":
                    v = frame[name] + v
                frame[name] = float(v) if is_float else v

            return assign_local

        graph, index = target.graph, target.index
        assert index is not None

        def assign_property(env: Env, frame: Frame) -> None:
            values = env.memory.prop(graph, name)
            i = index(env, frame)
            v = operand(env, frame)
            if op == "=":
                values[i] = v
            else:
                with env.runtime.atomics[i]:
                    values[i] += v

        return assign_property

    ##### Builtins #####

    def _atomic(self, call: Call, mapping: Mapping[str, str]) -> ExprFn:
        """``MIN(target, value, flag)`` and ``MAX(target, value, flag)``."""
        target_expr, value_expr, flag_expr = call.args
        target = self._target(target_expr, mapping)
        value = self.expr(value_expr, mapping)
        set_flag = self._setter(flag_expr, mapping)
        better = operator.lt if call.func == "MIN" else operator.gt
        op = call.func.lower()
        name, graph, index, convert = (
            target.name,
            target.graph,
            target.index,
            target.convert,
        )

        def update(env: Env, frame: Frame) -> bool:
            v = value(env, frame)
            match target.kind:
                case "global":
                    if not better(v, env.globals.get(name)):
                        return False
                    env.globals.combine(op, name, v)
                    return True
                case "local":
                    if not better(v, frame[name]):
                        return False
                    frame[name] = v
                    return True
            assert index is not None
            values = env.memory.prop(graph, name)
            i = index(env, frame)
            with env.runtime.atomics[i]:
                if not better(v, convert(values[i])):
                    return False
                values[i] = v
            return True

        def run(env: Env, frame: Frame) -> None:
            if update(env, frame):
                set_flag(env, frame, 1)

        return run

    def _reduction(self, call: Call, mapping: Mapping[str, str]) -> ExprFn:
        """``RADD(target, value)`` and ``RMUL(target, value)``."""
        target_expr, value_expr = call.args
        target = self._target(target_expr, mapping)
        value = self.expr(value_expr, mapping)
        op = "+" if call.func == "RADD" else "*"
        combine = _COMBINE[op]
        name, graph, index = target.name, target.graph, target.index

        def run(env: Env, frame: Frame) -> None:
            v = value(env, frame)
            match target.kind:
                case "global":
                    env.globals.combine(op, name, v)
                    return
                case "local":
                    frame[name] = combine(frame[name], v)
                    return
            assert index is not None
            values = env.memory.prop(graph, name)
            i = index(env, frame)
            with env.runtime.atomics[i]:
                values[i] = combine(values[i], v)

        return run

    ##### Iteration #####

    def space(self, stmt: Foreach, mapping: Mapping[str, str]) -> Space:
        """Compile the iteration space of a ``foreach``."""
        subject = stmt.subject
        match stmt.iterator:
            case IteratorKind.POINTS:
                graph = _graph(subject, mapping)
                return lambda env, frame: (range(env.runtime.store(graph).n), False)
            case IteratorKind.EDGES:
                graph = _graph(subject, mapping)
                return lambda env, frame: (range(env.runtime.store(graph).m), True)
            case IteratorKind.SET_ITEMS:
                name = _container(subject, mapping)
                return lambda env, frame: (range(env.runtime.container(name).n), False)
            case IteratorKind.COLLECTION_ITEMS:
                name = _container(subject, mapping)
                return lambda env, frame: (
                    env.runtime.container(name).start_round(),
                    False,
                )

        graph = _graph(subject, mapping)
        point = self.expr(subject, mapping)
        iterator = stmt.iterator

        def neighbours(env: Env, frame: Frame) -> tuple[Sequence[int], bool]:
            store = env.runtime.store(graph)
            p = point(env, frame)
            items: list[int] = []
            if iterator is not IteratorKind.INNBRS:
                offsets, targets, _ = store.out_lists
                items += targets[offsets[p] : offsets[p + 1]]
            if iterator is not IteratorKind.OUTNBRS:
                offsets, sources, _ = store.in_lists
                items += sources[offsets[p] : offsets[p + 1]]
            return items, True

        return neighbours

    def _foreach(self, stmt: Foreach, mapping: Mapping[str, str]) -> StmtFn:
        space = self.space(stmt, mapping)
        filter_ = None if stmt.filter is None else self.expr(stmt.filter, mapping)
        body = self.stmt(stmt.body, mapping)
        var = stmt.var

        def run(env: Env, frame: Frame) -> None:
            items, edges = space(env, frame)
            if not env.kernel:
                env.host_items += len(items)
            elif edges:
                env.edge_work += len(items)
            else:
                env.vertex_work += len(items)
            for item in items:
                frame[var] = item
                if filter_ is None or filter_(env, frame):
                    body(env, frame)

        return run

    def _single(self, stmt: Single, mapping: Mapping[str, str]) -> StmtFn:
        target = stmt.target
        then = self.stmt(stmt.then, mapping)
        orelse = None if stmt.orelse is None else self.stmt(stmt.orelse, mapping)
        kind = target.dtype.kind if target.dtype is not None else TypeKind.POINT
        if kind is TypeKind.COLLECTION:
            name = _container(target, mapping)

            def elements(env: Env, frame: Frame) -> Any:
                return [(name, p) for p in env.runtime.container(name).items()]

        else:
            graph = _graph(target, mapping)
            element = self.expr(target, mapping)
            tag = kind.value

            def elements(env: Env, frame: Frame) -> Any:
                return [(graph, tag, element(env, frame))]

        def run(env: Env, frame: Frame) -> None:
            singles = env.runtime.singles
            token = env.token if env.kernel else object()
            try:
                wanted = elements(env, frame)
                acquired = bool(wanted) and single_try(singles, wanted, token)
                if acquired and env.kernel:
                    env.owners.append(token)
                if acquired:
                    then(env, frame)
                elif orelse is not None:
                    orelse(env, frame)
            finally:
                if not env.kernel:
                    singles.release_all(token)

        return run

    ##### Expressions #####

    def expr(self, expr: Expr, mapping: Mapping[str, str]) -> ExprFn:
        """Compile an expression."""
        match expr:
            case IntLit(value=value) | FloatLit(value=value):
                return lambda env, frame: value
            case BoolLit(value=value):
                flag = int(value)
                return lambda env, frame: flag
            case TypeName(name=name):
                return lambda env, frame: name
            case Name():
                return self._name(expr, mapping)
            case Member():
                return self._member(expr, mapping)
            case Index():
                return self._index(expr, mapping)
            case Call():
                return self._call(expr, mapping)
            case MethodCall():
                return self._method_call(expr, mapping)
            case Unary(op=op, operand=operand):
                inner = self.expr(operand, mapping)
                if op == "!":
                    return lambda env, frame: _truth(not inner(env, frame))
                return lambda env, frame: -inner(env, frame)
            case Binary():
                return self._binary(expr, mapping)
        raise TypeError(f"Unknown expression type '{type(expr).__name__}'.")

    def _name(self, expr: Name, mapping: Mapping[str, str]) -> ExprFn:
        name = expr.id
        kind = expr.dtype.kind if expr.dtype is not None else None
        if expr.storage is Storage.BUILTIN:
            value = BUILTIN_CONSTANTS[name][1]
            return lambda env, frame: value
        if kind is TypeKind.GRAPH:
            graph = _graph(expr, mapping)
            return lambda env, frame: graph
        if kind in (TypeKind.SET, TypeKind.COLLECTION):
            container = _container(expr, mapping)
            return lambda env, frame: container
        if expr.storage is Storage.GLOBAL:
            return lambda env, frame: env.globals.get(name)

        def local(env: Env, frame: Frame) -> Any:
            try:
                return frame[name]
            except KeyError:
                raise DslRuntimeError(f"'{name}' is used before it is set.") from None

        return local

    def _member(self, expr: Member, mapping: Mapping[str, str]) -> ExprFn:
        obj = self.expr(expr.obj, mapping)
        name = expr.name
        if name == "id":
            return obj
        graph = _graph(expr.obj, mapping)
        is_edge = expr.obj.dtype is not None and expr.obj.dtype.kind is TypeKind.EDGE
        if is_edge and name in ("src", "dst", "weight"):
            column = ("src", "dst", "weight").index(name)
            return lambda env, frame: env.runtime.store(graph).edge_columns[column][
                obj(env, frame)
            ]
        convert = _converter(expr)
        return lambda env, frame: convert(env.memory.prop(graph, name)[obj(env, frame)])

    def _index(self, expr: Index, mapping: Mapping[str, str]) -> ExprFn:
        index = self.expr(expr.index, mapping)
        obj = expr.obj
        if isinstance(obj, Member) and obj.name in ("points", "edges"):
            graph = _graph(obj.obj, mapping)
            points = obj.name == "points"

            def element(env: Env, frame: Frame) -> int:
                store = env.runtime.store(graph)
                i = index(env, frame)
                size = store.n if points else store.m
                if not 0 <= i < size:
                    raise DslRuntimeError(
                        f"Index {i} is out of range for '{graph}.{obj.name}' "
                        f"of size {size}."
                    )
                return i

            return element
        # Elements of the argument vector stand for their position
        return lambda env, frame: int(index(env, frame))

    def _binary(self, expr: Binary, mapping: Mapping[str, str]) -> ExprFn:
        left, right = self.expr(expr.left, mapping), self.expr(expr.right, mapping)
        match expr.op:
            case "&&":
                return lambda env, frame: _truth(left(env, frame) and right(env, frame))
            case "||":
                return lambda env, frame: _truth(left(env, frame) or right(env, frame))
        try:
            op = _BINARY[expr.op]
        except KeyError:
            raise DslRuntimeError(f"Unknown operator '{expr.op}'.") from None
        return lambda env, frame: op(left(env, frame), right(env, frame))

    def _call(self, call: Call, mapping: Mapping[str, str]) -> ExprFn:
        if call.func in ("MIN", "MAX"):
            return self._atomic(call, mapping)
        if call.func in ("RADD", "RMUL"):
            return self._reduction(call, mapping)
        fn = self._program.function(call.func)
        if fn is None or fn.name == "main":
            raise DslRuntimeError(f"Undefined function '{call.func}'.")
        callee = {
            key: mapping.get(value, value)
            for key, value in call_mapping(fn, call.args).items()
        }
        run = self.function(fn, callee)
        args = [self.expr(a, mapping) for a in call.args]
        return lambda env, frame: run(env, [a(env, frame) for a in args])

    def _method_call(self, call: MethodCall, mapping: Mapping[str, str]) -> ExprFn:
        obj = call.obj
        kind = obj.dtype.kind if obj.dtype is not None else None
        method = call.method
        args = [self.expr(a, mapping) for a in call.args]

        if kind is TypeKind.GRAPH:
            graph = _graph(obj, mapping)
            match method:
                case "read":
                    position = args[0]
                    return lambda env, frame: env.runtime.bind(
                        graph, position(env, frame)
                    )
                case "addPointProperty" | "addEdgeProperty":
                    prop, type_name = call.args
                    assert isinstance(prop, Name) and isinstance(type_name, TypeName)
                    type_ = type_name.name
                    element = (
                        ElementKind.POINT
                        if method == "addPointProperty"
                        else ElementKind.EDGE
                    )
                    return lambda env, frame: env.runtime.declare(
                        graph, prop.id, element, type_
                    )
                case "getweight":
                    p, t = args
                    return lambda env, frame: env.runtime.store(graph).getweight(
                        p(env, frame), t(env, frame)
                    )
                case "npoints":
                    return lambda env, frame: env.runtime.store(graph).n
                case "nedges":
                    return lambda env, frame: env.runtime.store(graph).m
        elif kind in (TypeKind.SET, TypeKind.COLLECTION):
            name = _container(obj, mapping)
            match method:
                case "find":
                    (a,) = args
                    return lambda env, frame: env.runtime.container(name).find(
                        a(env, frame)
                    )
                case "union":
                    a, b = args
                    return lambda env, frame: int(
                        env.runtime.container(name).union(a(env, frame), b(env, frame))
                    )
                case "add":
                    point = args[0]
                    key = args[1] if len(args) > 1 else None

                    def add(env: Env, frame: Frame) -> None:
                        k = 0 if key is None else key(env, frame)
                        env.runtime.container(name).add(point(env, frame), k)

                    return add
                case "size":
                    return lambda env, frame: env.runtime.container(name).size()
        raise DslRuntimeError(f"Unknown method '{method}' on '{render_expr(obj)}'.")


def _break(env: Env, frame: Frame) -> None:
    raise LoopBreak


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
