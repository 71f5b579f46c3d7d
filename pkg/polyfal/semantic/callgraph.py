"""Call graph of user functions."""

from __future__ import annotations

from polyfal.dsl.ast import Call, FunctionDecl, Program


def callees(fn: FunctionDecl, program: Program) -> list[str]:
    """The user functions called by a function, in order of first call."""
    names: list[str] = []
    for node in fn.body.walk():
        if (
            isinstance(node, Call)
            and program.function(node.func) is not None
            and node.func not in names
        ):
            names.append(node.func)
    return names


def call_graph(program: Program) -> dict[str, list[str]]:
    """Map every function name to the user functions it calls."""
    return {fn.name: callees(fn, program) for fn in program.all_functions}


def find_recursion(program: Program) -> list[str] | None:
    """Find a recursive call chain.

    Returns:
        A call chain that starts and ends with the same function, or ``None`` if
        the call graph is acyclic.

    Example:
        >>> from polyfal.dsl.parser import parse_source
        >>> find_recursion(parse_source("void f() { f(); } int main() { f(); }"))
        ['f', 'f']
    """
    graph = call_graph(program)
    done: set[str] = set()

    def visit(name: str, path: list[str]) -> list[str] | None:
        if name in path:
            return [*path[path.index(name) :], name]
        if name in done:
            return None
        for callee in graph.get(name, []):
            if (cycle := visit(callee, [*path, name])) is not None:
                return cycle
        done.add(name)
        return None

    for fn in program.all_functions:
        if (cycle := visit(fn.name, [])) is not None:
            return cycle
    return None
