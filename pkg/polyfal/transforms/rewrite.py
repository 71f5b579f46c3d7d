"""Helpers shared by the AST rewrites."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping

import attrs

from polyfal.dsl.ast import (
    Block,
    Call,
    Expr,
    Foreach,
    FunctionDecl,
    Name,
    Node,
    Program,
    Single,
    Stmt,
    VarDecl,
    transform,
)


def used_names(node: Node) -> set[str]:
    """All identifiers bound or referenced anywhere inside a node."""
    names: set[str] = set()
    for n in node.walk():
        match n:
            case Name(id=name) | VarDecl(name=name) | Foreach(var=name):
                names.add(name)
            case FunctionDecl(params=params):
                names |= {p.name for p in params}
    return names


def fresh_name(base: str, taken: Iterable[str]) -> str:
    """Return ``base`` or the first numbered variant of it not in ``taken``.

    Example:
        >>> fresh_name("wl", {"wl", "wl1"})
        'wl2'
    """
    taken = set(taken)
    if base not in taken:
        return base
    index = 1
    while f"{base}{index}" in taken:
        index += 1
    return f"{base}{index}"


def statements(stmt: Stmt) -> tuple[Stmt, ...]:
    """The statements of a block, or the statement itself."""
    return stmt.stmts if isinstance(stmt, Block) else (stmt,)


def rename(node: Node, mapping: Mapping[str, str]) -> Node:
    """Rename variables, including declarations, ``foreach`` variables and bindings."""

    def visit(n: Node) -> Node | None:
        match n:
            case Name(id=name) if name in mapping:
                return attrs.evolve(n, id=mapping[name])
            case VarDecl(name=name, dtype=dtype):
                changes = {}
                if name in mapping:
                    changes["name"] = mapping[name]
                if dtype.graph in mapping:
                    changes["dtype"] = dtype.bound_to(mapping[dtype.graph])
                if n.init is not None:
                    changes["init"] = rename(n.init, mapping)
                return attrs.evolve(n, **changes)
            case Foreach(var=var) if var in mapping:
                renamed = attrs.evolve(n, var=mapping[var])
                return renamed.map_children(lambda c: rename(c, mapping))
        return None

    return transform(node, visit) if mapping else node


def replace_exprs(node: Node, fn: Callable[[Expr], Expr | None]) -> Node:
    """Rewrite expressions top-down; ``fn`` returns a replacement or ``None``."""

    def visit(n: Node) -> Node | None:
        return fn(n) if isinstance(n, Expr) else None

    return transform(node, visit)


def contains(node: Node, kind: type[Node] | tuple[type[Node], ...]) -> bool:
    """Whether a node of the given kind occurs inside ``node``."""
    return any(isinstance(n, kind) for n in node.walk())


def contains_single(node: Node) -> bool:
    """Whether a ``single`` statement occurs inside ``node``."""
    return contains(node, Single)


def calls_of(program: Program, name: str) -> list[Call]:
    """All calls of a user function anywhere in a program."""
    return [
        n
        for fn in program.all_functions
        for n in fn.body.walk()
        if isinstance(n, Call) and n.func == name
    ]


def map_function_bodies(
    program: Program, fn: Callable[[FunctionDecl], FunctionDecl]
) -> Program:
    """Apply a rewrite to every function of a program, including ``main``."""
    return attrs.evolve(
        program,
        functions=tuple(fn(f) for f in program.functions),
        main=fn(program.main),
    )
