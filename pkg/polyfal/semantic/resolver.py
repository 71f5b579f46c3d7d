"""Name and type resolution."""

from __future__ import annotations

import logging

import attrs

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
    Node,
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
from polyfal.dsl.types import (
    BOOL,
    FLOAT,
    INT,
    PROPERTY_VALUE_TYPES,
    VOID,
    DslType,
    TypeKind,
)
from polyfal.exceptions import SemanticError
from polyfal.semantic.callgraph import find_recursion
from polyfal.semantic.symbols import (
    ElementKind,
    PropertyInfo,
    Symbol,
    SymbolTable,
    symbolic_graph,
)

try:  # For python < 3.11, use the exceptiongroup backport
    ExceptionGroup
except NameError:
    from exceptiongroup import ExceptionGroup

_logger = logging.getLogger(__name__)

ATOMIC_BUILTINS = ("MIN", "MAX")
"""Atomic compare-and-update builtins taking target, candidate and flag."""

REDUCTION_BUILTINS = ("RADD", "RMUL")
"""Reduction builtins taking target and operand."""

BUILTIN_FUNCTIONS = ATOMIC_BUILTINS + REDUCTION_BUILTINS

EDGE_FIELDS = ("src", "dst", "weight", "id")
"""Fixed members of edges; they cannot be used as property names."""

PROPERTY_DECLARATIONS = {
    "addPointProperty": ElementKind.POINT,
    "addEdgeProperty": ElementKind.EDGE,
}

_ARITHMETIC = ("+", "-", "*", "/", "%")
_EQUALITY = ("==", "!=")

PROPERTY = DslType(TypeKind.PROPERTY)

_SUBJECT_KINDS = {
    IteratorKind.POINTS: TypeKind.GRAPH,
    IteratorKind.EDGES: TypeKind.GRAPH,
    IteratorKind.NBRS: TypeKind.POINT,
    IteratorKind.INNBRS: TypeKind.POINT,
    IteratorKind.OUTNBRS: TypeKind.POINT,
    IteratorKind.SET_ITEMS: TypeKind.SET,
    IteratorKind.COLLECTION_ITEMS: TypeKind.COLLECTION,
}


def _describe(dtype: DslType | None) -> str:
    return "?" if dtype is None else dtype.render()


class Resolver:
    """Resolves names, checks types and annotates a program.

    Errors are collected instead of raised immediately, so that a single run
    reports every problem of a program.
    """

    def __init__(self, program: Program):
        self._program = program
        self.table = SymbolTable()
        self.errors: list[SemanticError] = []
        self._function: FunctionDecl | None = None
        self._loop_depth = 0
        self._main_graphs: set[str] = set()

    def _error(self, message: str, node: Node) -> None:
        line, col = node.loc or (0, 0)
        self.errors.append(SemanticError(message, line, col))

    ##### Program level #####

    def resolve(self) -> Program:
        """Resolve the program and return its annotated copy."""
        self._declare_properties()
        self._check_recursion()

        globals_ = tuple(
            self._var_decl(g, Storage.GLOBAL) for g in self._program.globals
        )
        functions = tuple(self._function_decl(f) for f in self._program.functions)
        main = self._function_decl(self._program.main)
        self._check_main(main)
        return attrs.evolve(
            self._program, globals=globals_, functions=functions, main=main
        )

    def _declare_properties(self) -> None:
        """Register all dynamic properties before any access is checked."""
        for fn in self._program.all_functions:
            for node in fn.body.walk():
                if not (
                    isinstance(node, MethodCall)
                    and node.method in PROPERTY_DECLARATIONS
                    and isinstance(node.obj, Name)
                ):
                    continue
                if (
                    len(node.args) != 2
                    or not isinstance(node.args[0], Name)
                    or not isinstance(node.args[1], TypeName)
                    or node.args[1].name not in PROPERTY_VALUE_TYPES
                ):
                    self._error(
                        f"'{node.method}' expects a property name and one of "
                        f"{sorted(PROPERTY_VALUE_TYPES)}",
                        node,
                    )
                    continue
                name = node.args[0].id
                if name in EDGE_FIELDS:
                    self._error(f"'{name}' is reserved for edge fields", node)
                    continue
                info = PropertyInfo(
                    node.obj.id,
                    name,
                    PROPERTY_VALUE_TYPES[node.args[1].name],
                    PROPERTY_DECLARATIONS[node.method],
                )
                if not self.table.declare_property(info):
                    self._error(
                        f"property '{name}' redeclared on graph '{node.obj.id}'", node
                    )

    def _check_recursion(self) -> None:
        if (cycle := find_recursion(self._program)) is not None:
            fn = self._program.function(cycle[0])
            assert fn is not None
            self._error(f"recursive call chain {' -> '.join(cycle)}", fn)

    def _check_main(self, main: FunctionDecl) -> None:
        if main.ret.kind not in (TypeKind.INT, TypeKind.VOID):
            self._error("'main' must return int or void", main)
        kinds = [p.dtype.kind for p in main.params]
        if kinds not in ([], [TypeKind.INT, TypeKind.ARGV]):
            self._error("'main' takes either no parameters or (int, char *[])", main)

    def _function_decl(self, fn: FunctionDecl) -> FunctionDecl:
        self._function = fn
        self.table.push()
        for p in fn.params:
            dtype = p.dtype
            if p.dtype.kind is TypeKind.ARGV and fn.name != "main":
                self._error("only 'main' can take an argument vector", p)
            if (dtype.is_graph_element or dtype.is_container) and dtype.graph is None:
                dtype = dtype.bound_to(symbolic_graph(p.name))
            elif dtype.graph is not None:
                self._check_binding(dtype.graph, p)
            if dtype.kind is TypeKind.VOID:
                self._error(f"parameter '{p.name}' cannot be void", p)
            self.table.declare(Symbol(p.name, dtype, Storage.PARAM))
        body = self._block(fn.body)
        self.table.pop()
        self._function = None
        self._main_graphs.clear()
        return attrs.evolve(fn, body=body)

    def _check_binding(self, graph: str, node: Node) -> None:
        symbol = self.table.lookup(graph)
        if symbol is None or symbol.dtype.kind is not TypeKind.GRAPH:
            self._error(f"'{graph}' does not name a graph", node)

    def _is_concrete_graph(self, graph: str | None) -> bool:
        if graph is None:
            return False
        symbol = self.table.lookup(graph)
        return (
            symbol is not None
            and symbol.dtype.kind is TypeKind.GRAPH
            and symbol.storage in (Storage.LOCAL, Storage.GLOBAL)
        )

    ##### Statements #####

    def _block(self, block: Block) -> Block:
        self.table.push()
        stmts = tuple(self._stmt(s) for s in block.stmts)
        self.table.pop()
        return attrs.evolve(block, stmts=stmts)

    def _var_decl(self, decl: VarDecl, storage: Storage) -> VarDecl:
        dtype = decl.dtype
        if dtype.kind is TypeKind.VOID:
            self._error(f"variable '{decl.name}' cannot be void", decl)
        if dtype.kind is TypeKind.SET and dtype.graph is None:
            self._error(f"set '{decl.name}' needs a graph binding", decl)
        if dtype.graph is not None:
            self._check_binding(dtype.graph, decl)
        init = decl.init
        if init is not None:
            init = self._expr(init)
            self._check_assignable(dtype, init, decl)
        if dtype.kind is TypeKind.GRAPH:
            if init is not None:
                self._error("graphs cannot be initialized by assignment", decl)
            if storage is Storage.LOCAL and self._function is not None:
                if decl.name in self._main_graphs:
                    self._error(f"graph name '{decl.name}' is not unique", decl)
                self._main_graphs.add(decl.name)
        if self.table.declare(Symbol(decl.name, dtype, storage)) is not None:
            self._error(f"redeclaration of '{decl.name}'", decl)
        return attrs.evolve(decl, init=init)

    def _stmt(self, stmt: Stmt) -> Stmt:
        match stmt:
            case Block():
                return self._block(stmt)
            case VarDecl():
                return self._var_decl(stmt, Storage.LOCAL)
            case Assign():
                return self._assign(stmt)
            case If(cond=cond, then=then, orelse=orelse):
                return attrs.evolve(
                    stmt,
                    cond=self._condition(cond),
                    then=self._scoped(then),
                    orelse=None if orelse is None else self._scoped(orelse),
                )
            case While(cond=cond, body=body):
                cond = self._condition(cond)
                self._loop_depth += 1
                body = self._scoped(body)
                self._loop_depth -= 1
                return attrs.evolve(stmt, cond=cond, body=body)
            case Break():
                if self._loop_depth == 0:
                    self._error("'break' outside loop", stmt)
                return stmt
            case Return(value=value):
                return self._return(stmt, value)
            case ExprStmt(expr=expr):
                return attrs.evolve(stmt, expr=self._expr(expr))
            case Foreach():
                return self._foreach(stmt)
            case Single(target=target, then=then, orelse=orelse):
                target = self._expr(target)
                if target.dtype is not None and target.dtype.kind not in (
                    TypeKind.POINT,
                    TypeKind.EDGE,
                    TypeKind.COLLECTION,
                ):
                    self._error(
                        f"'single' locks points, edges or collections, "
                        f"not {_describe(target.dtype)}",
                        stmt,
                    )
                return attrs.evolve(
                    stmt,
                    target=target,
                    then=self._scoped(then),
                    orelse=None if orelse is None else self._scoped(orelse),
                )
            case ParallelSections(sections=sections):
                resolved = tuple(self._block(s) for s in sections)
                return attrs.evolve(stmt, sections=resolved)
        raise TypeError(f"Unknown statement type '{type(stmt).__name__}'.")

    def _scoped(self, stmt: Stmt) -> Stmt:
        """Resolve a sub-statement in its own scope."""
        self.table.push()
        resolved = self._stmt(stmt)
        self.table.pop()
        return resolved

    def _return(self, stmt: Return, value: Expr | None) -> Return:
        assert self._function is not None
        ret = self._function.ret
        if value is None:
            return stmt
        value = self._expr(value)
        if ret.kind is TypeKind.VOID:
            self._error("void function returns a value", stmt)
        else:
            self._check_assignable(ret, value, stmt)
        return attrs.evolve(stmt, value=value)

    def _assign(self, stmt: Assign) -> Assign:
        target = self._expr(stmt.target)
        self._check_lvalue(target)
        value = None if stmt.value is None else self._expr(stmt.value)
        if target.dtype is not None:
            if stmt.op == "=":
                assert value is not None
                self._check_assignable(target.dtype, value, stmt)
            elif not target.dtype.is_numeric or (
                value is not None and not self._numeric(value)
            ):
                self._error(f"operator '{stmt.op}' needs numeric operands", stmt)
        return attrs.evolve(stmt, target=target, value=value)

    def _foreach(self, stmt: Foreach) -> Foreach:
        subject = self._expr(stmt.subject)
        required = _SUBJECT_KINDS[stmt.iterator]
        var_type: DslType | None = None
        if subject.dtype is not None:
            if subject.dtype.kind is not required:
                self._error(
                    f"iterator '{stmt.iterator.value}' requires a {required.value} "
                    f"subject, found {_describe(subject.dtype)}",
                    stmt,
                )
            elif stmt.iterator is IteratorKind.EDGES:
                var_type = DslType(TypeKind.EDGE, self._graph_of(subject))
            else:
                var_type = DslType(TypeKind.POINT, self._graph_of(subject))

        self.table.push()
        self.table.declare(
            Symbol(stmt.var, var_type or DslType(TypeKind.POINT), Storage.LOCAL)
        )
        filter_ = None if stmt.filter is None else self._condition(stmt.filter)
        # The body runs in parallel, so it cannot leave an enclosing loop
        loop_depth, self._loop_depth = self._loop_depth, 0
        body = self._scoped(stmt.body)
        self._loop_depth = loop_depth
        self.table.pop()
        return attrs.evolve(
            stmt, subject=subject, filter=filter_, body=body, var_type=var_type
        )

    ##### Expressions #####

    @staticmethod
    def _graph_of(expr: Expr) -> str | None:
        """The graph binding of a graph, graph element or container expression."""
        if expr.dtype is None:
            return None
        if expr.dtype.kind is TypeKind.GRAPH:
            return expr.id if isinstance(expr, Name) else None
        return expr.dtype.graph

    @staticmethod
    def _numeric(expr: Expr) -> bool:
        return expr.dtype is None or expr.dtype.is_numeric

    def _condition(self, expr: Expr) -> Expr:
        expr = self._expr(expr)
        if not self._numeric(expr):
            found = _describe(expr.dtype)
            self._error(f"condition must be numeric, found {found}", expr)
        return expr

    def _check_assignable(self, target: DslType, value: Expr, node: Node) -> None:
        if value.dtype is not None and not target.accepts(value.dtype):
            self._error(
                f"type mismatch: cannot assign {_describe(value.dtype)} "
                f"to {_describe(target)}",
                node,
            )

    def _check_lvalue(self, expr: Expr) -> None:
        if isinstance(expr, Name):
            if expr.storage in (Storage.BUILTIN, Storage.PROPERTY):
                self._error(f"'{expr.id}' is not assignable", expr)
            return
        if isinstance(expr, Member) and expr.obj.dtype is not None:
            element = expr.obj.dtype.kind
            if element in (TypeKind.POINT, TypeKind.EDGE) and expr.name not in (
                EDGE_FIELDS
            ):
                return
        self._error("expression is not assignable", expr)

    def _expr(self, expr: Expr) -> Expr:
        match expr:
            case IntLit():
                return attrs.evolve(expr, dtype=INT)
            case FloatLit():
                return attrs.evolve(expr, dtype=FLOAT)
            case BoolLit():
                return attrs.evolve(expr, dtype=BOOL)
            case TypeName():
                return attrs.evolve(expr, dtype=DslType(TypeKind.TYPENAME))
            case Name(id=name):
                symbol = self.table.lookup(name)
                if symbol is None:
                    self._error(f"undefined name '{name}'", expr)
                    return expr
                return attrs.evolve(expr, dtype=symbol.dtype, storage=symbol.storage)
            case Member():
                return self._member(expr)
            case Index():
                return self._index(expr)
            case Call():
                return self._call(expr)
            case MethodCall():
                return self._method_call(expr)
            case Unary(op=op, operand=operand):
                operand = self._expr(operand)
                if not self._numeric(operand):
                    self._error(f"operator '{op}' needs a numeric operand", expr)
                dtype = BOOL if op == "!" else (operand.dtype or INT)
                return attrs.evolve(expr, operand=operand, dtype=dtype)
            case Binary():
                return self._binary(expr)
        raise TypeError(f"Unknown expression type '{type(expr).__name__}'.")

    def _binary(self, expr: Binary) -> Binary:
        left, right = self._expr(expr.left), self._expr(expr.right)
        lt, rt = left.dtype, right.dtype
        dtype: DslType = BOOL
        if lt is None or rt is None:
            dtype = INT if expr.op in _ARITHMETIC else BOOL
        elif expr.op in _EQUALITY and lt.is_graph_element and lt.kind is rt.kind:
            pass
        elif not (lt.is_numeric and rt.is_numeric):
            self._error(
                f"operator '{expr.op}' cannot combine {_describe(lt)} "
                f"and {_describe(rt)}",
                expr,
            )
        elif expr.op in _ARITHMETIC:
            is_float = TypeKind.FLOAT in (lt.kind, rt.kind)
            dtype = FLOAT if is_float else INT
        return attrs.evolve(expr, left=left, right=right, dtype=dtype)

    def _member(self, expr: Member) -> Expr:
        obj = self._expr(expr.obj)
        expr = attrs.evolve(expr, obj=obj)
        if obj.dtype is None:
            return expr
        graph = obj.dtype.graph
        match obj.dtype.kind, expr.name:
            case TypeKind.POINT | TypeKind.EDGE, "id":
                return attrs.evolve(expr, dtype=INT)
            case TypeKind.EDGE, "src" | "dst":
                return attrs.evolve(expr, dtype=DslType(TypeKind.POINT, graph))
            case TypeKind.EDGE, "weight":
                return attrs.evolve(expr, dtype=INT)
            case TypeKind.POINT | TypeKind.EDGE, name:
                element = (
                    ElementKind.POINT
                    if obj.dtype.kind is TypeKind.POINT
                    else ElementKind.EDGE
                )
                info = self.table.lookup_property(
                    graph, name, exact=self._is_concrete_graph(graph)
                )
                if info is None:
                    self._error(f"undefined property '{name}'", expr)
                    return expr
                if info.element is not element:
                    self._error(
                        f"'{name}' is a {info.element.value} property, "
                        f"not a {element.value} property",
                        expr,
                    )
                return attrs.evolve(expr, dtype=info.dtype)
            case TypeKind.GRAPH, "points" | "edges":
                self._error(f"'{expr.name}' must be indexed or iterated", expr)
                return expr
        self._error(f"{_describe(obj.dtype)} has no member '{expr.name}'", expr)
        return expr

    def _index(self, expr: Index) -> Expr:
        index = self._expr(expr.index)
        if index.dtype is not None and index.dtype.kind is not TypeKind.INT:
            self._error("index must be an integer", expr)
        obj = expr.obj
        if isinstance(obj, Member) and obj.name in ("points", "edges"):
            graph_expr = self._expr(obj.obj)
            resolved = attrs.evolve(obj, obj=graph_expr)
            expr = attrs.evolve(expr, obj=resolved, index=index)
            if graph_expr.dtype is None:
                return expr
            if graph_expr.dtype.kind is not TypeKind.GRAPH:
                self._error(f"'{obj.name}' needs a graph", expr)
                return expr
            kind = TypeKind.POINT if obj.name == "points" else TypeKind.EDGE
            return attrs.evolve(expr, dtype=DslType(kind, self._graph_of(graph_expr)))
        obj = self._expr(obj)
        expr = attrs.evolve(expr, obj=obj, index=index)
        if obj.dtype is not None and obj.dtype.kind is TypeKind.ARGV:
            return attrs.evolve(expr, dtype=DslType(TypeKind.STRING))
        if obj.dtype is not None:
            self._error(f"{_describe(obj.dtype)} cannot be indexed", expr)
        return expr

    def _args(self, args: tuple[Expr, ...]) -> tuple[Expr, ...]:
        return tuple(self._expr(a) for a in args)

    def _expect_args(
        self, expr: Expr, args: tuple[Expr, ...], kinds: list[TypeKind], what: str
    ) -> None:
        if len(args) != len(kinds):
            self._error(f"{what} takes {len(kinds)} argument(s), got {len(args)}", expr)
            return
        for arg, kind in zip(args, kinds):
            if arg.dtype is None:
                continue
            if kind is TypeKind.INT:
                ok = arg.dtype.is_numeric
            else:
                ok = arg.dtype.kind is kind
            if not ok:
                self._error(
                    f"{what} expects {kind.value}, found {_describe(arg.dtype)}", arg
                )

    def _call(self, expr: Call) -> Call:
        args = self._args(expr.args)
        expr = attrs.evolve(expr, args=args)
        if expr.func in ATOMIC_BUILTINS:
            self._expect_args(expr, args, [TypeKind.INT] * 3, expr.func)
            if len(args) == 3:
                self._check_lvalue(args[0])
                self._check_lvalue(args[2])
            return attrs.evolve(expr, dtype=VOID)
        if expr.func in REDUCTION_BUILTINS:
            self._expect_args(expr, args, [TypeKind.INT] * 2, expr.func)
            if len(args) == 2:
                self._check_lvalue(args[0])
            return attrs.evolve(expr, dtype=VOID)

        fn = self._program.function(expr.func)
        if fn is None or fn.name == "main":
            self._error(f"undefined function '{expr.func}'", expr)
            return expr
        if len(args) != len(fn.params):
            self._error(
                f"'{fn.name}' takes {len(fn.params)} argument(s), got {len(args)}",
                expr,
            )
        for arg, param in zip(args, fn.params):
            self._check_assignable(param.dtype, arg, arg)
        return attrs.evolve(expr, dtype=fn.ret)

    def _method_call(self, expr: MethodCall) -> Expr:
        obj = self._expr(expr.obj)
        method = expr.method
        if method in PROPERTY_DECLARATIONS:
            args = tuple(
                attrs.evolve(a, dtype=PROPERTY, storage=Storage.PROPERTY)
                if isinstance(a, Name)
                else self._expr(a)
                for a in expr.args
            )
        else:
            args = self._args(expr.args)
        expr = attrs.evolve(expr, obj=obj, args=args)
        if obj.dtype is None:
            return expr

        point = TypeKind.POINT
        match obj.dtype.kind, method:
            case TypeKind.GRAPH, "read":
                self._expect_args(expr, args, [TypeKind.STRING], method)
                return attrs.evolve(expr, dtype=VOID)
            case TypeKind.GRAPH, "addPointProperty" | "addEdgeProperty":
                return attrs.evolve(expr, dtype=VOID)
            case TypeKind.GRAPH, "getweight":
                self._expect_args(expr, args, [point, point], method)
                return attrs.evolve(expr, dtype=INT)
            case TypeKind.GRAPH, "npoints" | "nedges":
                self._expect_args(expr, args, [], method)
                return attrs.evolve(expr, dtype=INT)
            case TypeKind.SET, "find":
                self._expect_args(expr, args, [point], method)
                return attrs.evolve(expr, dtype=DslType(point, obj.dtype.graph))
            case TypeKind.SET, "union":
                self._expect_args(expr, args, [point, point], method)
                return attrs.evolve(expr, dtype=INT)
            case TypeKind.COLLECTION, "add":
                kinds = [point, TypeKind.INT][: max(1, min(len(args), 2))]
                self._expect_args(expr, args, kinds, method)
                return attrs.evolve(expr, dtype=VOID)
            case TypeKind.COLLECTION, "size":
                self._expect_args(expr, args, [], method)
                return attrs.evolve(expr, dtype=INT)
        self._error(f"{_describe(obj.dtype)} has no method '{method}'", expr)
        return expr


def resolve(program: Program) -> tuple[Program, SymbolTable]:
    """Resolve names and types of a parsed program.

    Args:
        program: The parsed program.

    Returns:
        The program with type and storage annotations, and the symbol table that
        holds the globals and the declared properties.

    Raises:
        SemanticError: If the program contains exactly one semantic error.
        ExceptionGroup: If the program contains several semantic errors.
    """
    resolver = Resolver(program)
    resolved = resolver.resolve()
    if errors := resolver.errors:
        if len(errors) == 1:
            raise errors[0]
        raise ExceptionGroup("semantic errors", errors)
    _logger.debug(
        "Resolved %d function(s) and %d global(s).",
        len(resolved.all_functions),
        len(resolved.globals),
    )
    return resolved, resolver.table
