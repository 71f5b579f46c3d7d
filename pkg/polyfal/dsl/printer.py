"""Canonical rendering of DSL programs."""

from __future__ import annotations

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
    Param,
    ParallelSections,
    Program,
    Return,
    Single,
    Stmt,
    TypeName,
    Unary,
    VarDecl,
    While,
)
from polyfal.dsl.types import DslType, TypeKind

INDENT = "    "

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
_UNARY_PRECEDENCE = 7
_ATOM_PRECEDENCE = 8


def _precedence(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return _UNARY_PRECEDENCE
    return _ATOM_PRECEDENCE


def _wrap(expr: Expr, minimum: int) -> str:
    text = render_expr(expr)
    return f"({text})" if _precedence(expr) < minimum else text


def render_expr(expr: Expr) -> str:
    """Render an expression with the minimal number of parentheses.

    Example:
        >>> from polyfal.dsl.ast import Binary, IntLit, Name
        >>> render_expr(Binary("*", Binary("+", Name("a"), IntLit(1)), Name("b")))
        '(a + 1) * b'
    """
    match expr:
        case IntLit(value=value):
            return str(value)
        case FloatLit(value=value):
            return repr(value)
        case BoolLit(value=value):
            return "true" if value else "false"
        case Name(id=id_):
            return id_
        case TypeName(name=name):
            return name
        case Member(obj=obj, name=name):
            return f"{_wrap(obj, _ATOM_PRECEDENCE)}.{name}"
        case Index(obj=obj, index=index):
            return f"{_wrap(obj, _ATOM_PRECEDENCE)}[{render_expr(index)}]"
        case Call(func=func, args=args):
            return f"{func}({', '.join(render_expr(a) for a in args)})"
        case MethodCall(obj=obj, method=method, args=args):
            rendered = ", ".join(render_expr(a) for a in args)
            return f"{_wrap(obj, _ATOM_PRECEDENCE)}.{method}({rendered})"
        case Unary(op=op, operand=operand):
            # "- -x" must not collapse into the decrement token
            nested = isinstance(operand, Unary)
            minimum = _ATOM_PRECEDENCE if nested else _UNARY_PRECEDENCE
            return f"{op}{_wrap(operand, minimum)}"
        case Binary(op=op, left=left, right=right):
            level = _PRECEDENCE[op]
            # Left associativity: equal precedence on the right needs parentheses
            return f"{_wrap(left, level)} {op} {_wrap(right, level + 1)}"
    raise TypeError(f"Cannot render expression of type '{type(expr).__name__}'.")


def render_type(dtype: DslType, name: str) -> str:
    """Render a typed name as it appears in declarations and parameter lists."""
    if dtype.kind is TypeKind.ARGV:
        return f"char *{name}[]"
    if dtype.is_graph_element and dtype.graph is not None:
        return f"{dtype.render()} ({dtype.graph}) {name}"
    if dtype.is_container and dtype.graph is not None:
        return f"{dtype.render()} {name}({dtype.graph})"
    return f"{dtype.render()} {name}"


def _header_with_body(header: str, body: Stmt, depth: int) -> list[str]:
    lines = render_stmt(body, depth)
    return [header + lines[0].lstrip(), *lines[1:]]


def _with_else(lines: list[str], orelse: Stmt | None, depth: int) -> list[str]:
    if orelse is None:
        return lines
    pad = INDENT * depth
    else_lines = render_stmt(orelse, depth)
    if lines[-1] == pad + "}":
        joined = pad + "} else " + else_lines[0].lstrip()
        return [*lines[:-1], joined, *else_lines[1:]]
    return [*lines, pad + "else " + else_lines[0].lstrip(), *else_lines[1:]]


def render_stmt(stmt: Stmt, depth: int = 0) -> list[str]:
    """Render a statement into indented lines."""
    pad = INDENT * depth
    match stmt:
        case Block(stmts=stmts):
            inner = [line for s in stmts for line in render_stmt(s, depth + 1)]
            return [pad + "{", *inner, pad + "}"]
        case VarDecl(dtype=dtype, name=name, init=init):
            suffix = "" if init is None else f" = {render_expr(init)}"
            return [f"{pad}{render_type(dtype, name)}{suffix};"]
        case Assign(target=target, op=op, value=value):
            if value is None:
                return [f"{pad}{render_expr(target)}{op};"]
            return [f"{pad}{render_expr(target)} {op} {render_expr(value)};"]
        case If(cond=cond, then=then, orelse=orelse):
            lines = _header_with_body(f"{pad}if ({render_expr(cond)}) ", then, depth)
            return _with_else(lines, orelse, depth)
        case While(cond=cond, body=body):
            return _header_with_body(f"{pad}while ({render_expr(cond)}) ", body, depth)
        case Break():
            return [f"{pad}break;"]
        case Return(value=value):
            if value is None:
                return [f"{pad}return;"]
            return [f"{pad}return {render_expr(value)};"]
        case ExprStmt(expr=expr):
            return [f"{pad}{render_expr(expr)};"]
        case Foreach():
            return _header_with_body(pad + _foreach_header(stmt), stmt.body, depth)
        case Single(target=target, then=then, orelse=orelse):
            header = f"{pad}single ({render_expr(target)}) "
            return _with_else(_header_with_body(header, then, depth), orelse, depth)
        case ParallelSections(sections=sections):
            lines = [pad + "parallel sections {"]
            section_header = INDENT * (depth + 1) + "section "
            for section in sections:
                lines.extend(_header_with_body(section_header, section, depth + 1))
            return [*lines, pad + "}"]
    raise TypeError(f"Cannot render statement of type '{type(stmt).__name__}'.")


def _foreach_header(stmt: Foreach) -> str:
    subject = render_expr(stmt.subject)
    if stmt.iterator not in (IteratorKind.SET_ITEMS, IteratorKind.COLLECTION_ITEMS):
        subject = f"{subject}.{stmt.iterator.value}"
    header = f"foreach ({stmt.var} In {subject}) "
    if stmt.filter is not None:
        header += f"({render_expr(stmt.filter)}) "
    return header


def _render_param(param: Param) -> str:
    return render_type(param.dtype, param.name)


def render_function(fn: FunctionDecl) -> list[str]:
    """Render a function definition into lines."""
    params = ", ".join(_render_param(p) for p in fn.params)
    header = f"{fn.ret.render()} {fn.name}({params}) "
    return _header_with_body(header, fn.body, 0)


def pretty_print(program: Program) -> str:
    """Render a program in canonical layout.

    Globals come first, one declaration per line, followed by the functions in
    source order and finally ``main``, separated by blank lines. Indentation is
    four spaces; every line ends with a line feed.

    Args:
        program: The program to render.

    Returns:
        The canonical source text.

    Example:
        >>> from polyfal.dsl.parser import parse_source
        >>> pretty_print(parse_source("int main(){ }"))
        'int main() {\\n}\\n'
    """
    chunks: list[list[str]] = []
    if program.globals:
        chunks.append([line for g in program.globals for line in render_stmt(g)])
    chunks.extend(render_function(fn) for fn in program.all_functions)
    return "\n".join("\n".join(chunk) + "\n" for chunk in chunks)
