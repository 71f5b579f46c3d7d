"""Alpha-normalization of programs.

Two programs are alpha-equivalent if they only differ in the names of function
parameters, local variables and iteration variables. Normalization renames all
of these to ``v0``, ``v1``, ... in order of their binding occurrence, so that
alpha-equivalent programs normalize to structurally equal trees.
"""

from __future__ import annotations

from collections.abc import Callable

import attrs

from polyfal.dsl.ast import (
    Block,
    Foreach,
    FunctionDecl,
    Name,
    Node,
    Param,
    Program,
    Stmt,
    VarDecl,
)
from polyfal.dsl.types import DslType


class _Renamer:
    """Renames bound names of one function with lexical scoping."""

    def __init__(self) -> None:
        self._scopes: list[dict[str, str]] = [{}]
        self._counter = 0

    def bind(self, name: str) -> str:
        fresh = f"v{self._counter}"
        self._counter += 1
        self._scopes[-1][name] = fresh
        return fresh

    def lookup(self, name: str) -> str:
        for scope in reversed(self._scopes):
            if name in scope:
                return scope[name]
        return name

    def push(self) -> None:
        self._scopes.append({})

    def pop(self) -> None:
        self._scopes.pop()

    def dtype(self, dtype: DslType) -> DslType:
        if dtype.graph is None:
            return dtype
        return dtype.bound_to(self.lookup(dtype.graph))

    def expr(self, node: Node) -> Node:
        if isinstance(node, Name):
            return attrs.evolve(node, id=self.lookup(node.id))
        return node.map_children(self.expr)

    def stmt(self, stmt: Stmt) -> Stmt:
        if isinstance(stmt, VarDecl):
            init = None if stmt.init is None else self.expr(stmt.init)
            dtype = self.dtype(stmt.dtype)
            return attrs.evolve(stmt, dtype=dtype, init=init, name=self.bind(stmt.name))
        if isinstance(stmt, Block):
            self.push()
            stmts = tuple(self.stmt(s) for s in stmt.stmts)
            self.pop()
            return attrs.evolve(stmt, stmts=stmts)
        if isinstance(stmt, Foreach):
            subject = self.expr(stmt.subject)
            self.push()
            var = self.bind(stmt.var)
            filter_ = None if stmt.filter is None else self.expr(stmt.filter)
            body = self.stmt(stmt.body)
            self.pop()
            return attrs.evolve(
                stmt, var=var, subject=subject, filter=filter_, body=body
            )

        def visit(child: Node) -> Node:
            return self.stmt(child) if isinstance(child, Stmt) else self.expr(child)

        return stmt.map_children(visit)

    def function(self, fn: FunctionDecl) -> FunctionDecl:
        params = []
        for p in fn.params:
            dtype = self.dtype(p.dtype)
            params.append(Param(dtype, self.bind(p.name), loc=p.loc))
        body = self.stmt(fn.body)
        assert isinstance(body, Block)
        return attrs.evolve(fn, params=tuple(params), body=body)


def normalize_function(fn: FunctionDecl) -> FunctionDecl:
    """Alpha-normalize a single function."""
    return _Renamer().function(fn)


def alpha_normalize(program: Program) -> Program:
    """Alpha-normalize all functions of a program.

    Global variables, function names and property names are left untouched.

    Example:
        >>> from polyfal.dsl.parser import parse_source
        >>> a = parse_source("void f(int x) { int y = x; } int main() { }")
        >>> b = parse_source("void f(int k) { int z = k; } int main() { }")
        >>> alpha_normalize(a) == alpha_normalize(b)
        True
    """
    return _map_functions(program, normalize_function)


def alpha_equivalent(a: Program, b: Program) -> bool:
    """Whether two programs are equal up to the names of bound variables."""
    return alpha_normalize(a) == alpha_normalize(b)


def _map_functions(
    program: Program, fn: Callable[[FunctionDecl], FunctionDecl]
) -> Program:
    return attrs.evolve(
        program,
        functions=tuple(fn(f) for f in program.functions),
        main=fn(program.main),
    )
