"""Conversion of topology-driven fixpoint loops into worklist-driven loops.

A topology-driven fixpoint loop relaunches its kernels over all points until no
kernel reports a change through a global convergence flag:

.. code-block:: none

    while (1) {
        changed = 0;
        foreach (t In graph.points) relax(t, graph);
        if (changed == 0) break;
    }

The worklist-driven loop only processes points whose values changed in the
previous round. Each successful update of a neighbour pushes that neighbour:

.. code-block:: none

    Collection<Point> wl(graph);
    wl.add(graph.points[0], graph.points[0].dist);
    while (1) {
        foreach (t In wl) relax(t, graph, wl);
        if (wl.size() == 0) break;
    }
"""

from __future__ import annotations

import gc
import logging
from collections.abc import Iterable

import attrs
from attrs import define, field
from typing_extensions import override

from polyfal.dsl.ast import (
    Assign,
    Binary,
    Block,
    Break,
    Call,
    Expr,
    ExprStmt,
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
    Program,
    Stmt,
    VarDecl,
    While,
)
from polyfal.dsl.types import INT, DslType, TypeKind
from polyfal.exceptions import NotConvertibleError
from polyfal.semantic.resolver import ATOMIC_BUILTINS, REDUCTION_BUILTINS
from polyfal.semantic.targets import launched_function
from polyfal.transforms.base import Transform, TransformReport
from polyfal.transforms.rewrite import (
    calls_of,
    contains_single,
    fresh_name,
    statements,
    used_names,
)

_logger = logging.getLogger(__name__)


@define(frozen=True)
class _FixpointLoop:
    """A ``while`` loop driven by convergence flags, with one kernel per flag."""

    loop: While = field()
    flags: tuple[str, ...] = field()
    """The convergence flags in the order of the exit test."""

    launches: tuple[Foreach, ...] = field()
    """The launch reporting to each flag, in flag order."""


##### Detection #####


def _reset_flag(stmt: Stmt, global_names: set[str]) -> str | None:
    """The flag reset by a ``F = 0`` statement."""
    match stmt:
        case Assign(target=Name(id=name), op="=", value=IntLit(value=0)) if (
            name in global_names
        ):
            return name
    return None


def _tested_flags(cond: Expr) -> list[str] | None:
    """The flags of an exit condition ``F == 0 && G == 0 && ...``."""
    match cond:
        case Binary(op="==", left=Name(id=name), right=IntLit(value=0)):
            return [name]
        case Binary(op="&&", left=left, right=right):
            lhs, rhs = _tested_flags(left), _tested_flags(right)
            if lhs is None or rhs is None:
                return None
            return lhs + rhs
    return None


def _exit_test(stmt: Stmt) -> list[str] | None:
    """The flags of an ``if (F == 0 ...) break;`` statement."""
    if not isinstance(stmt, If) or stmt.orelse is not None:
        return None
    if statements(stmt.then) != (Break(),):
        return None
    return _tested_flags(stmt.cond)


def _flag_writes(fn: FunctionDecl, flags: Iterable[str]) -> set[str]:
    """The flags a kernel reports to."""
    flags = set(flags)
    written = set()
    for node in fn.body.walk():
        match node:
            case Call(func=func, args=(_, _, Name(id=name))) if (
                func in ATOMIC_BUILTINS and name in flags
            ):
                written.add(name)
            case Assign(target=Name(id=name)) if name in flags:
                written.add(name)
    return written


def _fixpoint_loop(
    loop: While, program: Program
) -> _FixpointLoop | None:
    """Recognize a fixpoint loop.

    Returns:
        The loop description, or ``None`` if the loop is not driven by flags.

    Raises:
        NotConvertibleError: If the loop is driven by flags but its launches
            cannot be assigned to them.
    """
    stmts = statements(loop.body)
    global_names = set(program.global_names)
    resets = {f for s in stmts if (f := _reset_flag(s, global_names))}
    exits = [flags for s in stmts if (flags := _exit_test(s)) is not None]
    if not resets or len(exits) != 1 or not set(exits[0]) <= resets:
        return None
    flags = tuple(dict.fromkeys(exits[0]))

    launches: dict[str, Foreach] = {}
    for stmt in stmts:
        if not isinstance(stmt, Foreach):
            continue
        fn = launched_function(stmt, program)
        if fn is None:
            continue
        if stmt.iterator is not IteratorKind.POINTS:
            raise NotConvertibleError(
                f"the launch of '{fn.name}' does not iterate the points of a graph"
            )
        reported = _flag_writes(fn, flags)
        if len(reported) != 1:
            raise NotConvertibleError(
                f"'{fn.name}' must report to exactly one convergence flag"
            )
        (flag,) = reported
        if flag in launches:
            raise NotConvertibleError(
                f"convergence flag '{flag}' is shared by several kernels"
            )
        launches[flag] = stmt
    nested = [
        n
        for s in stmts
        if not isinstance(s, Foreach)
        for n in s.walk()
        if isinstance(n, Foreach) and launched_function(n, program) is not None
    ]
    if nested:
        raise NotConvertibleError(
            "a kernel launch of the fixpoint loop is nested in another statement"
        )
    if missing := [f for f in flags if f not in launches]:
        raise NotConvertibleError(f"no kernel reports to flag '{missing[0]}'")
    return _FixpointLoop(loop, flags, tuple(launches[f] for f in flags))


##### Kernel rewrite #####


def _neighbour_vars(fn: FunctionDecl, point: str) -> set[str]:
    return {
        n.var
        for n in fn.body.walk()
        if isinstance(n, Foreach)
        and n.iterator.is_neighbourhood
        and n.subject == Name(point)
    }


def _check_kernel(fn: FunctionDecl, flag: str, program: Program) -> str | None:
    """Check that a kernel only updates visited neighbours.

    Returns:
        The property keying pushed points, if the kernel writes one.
    """
    if not fn.params or fn.params[0].dtype.kind is not TypeKind.POINT:
        raise NotConvertibleError(f"the first parameter of '{fn.name}' is not a Point")
    if len(calls_of(program, fn.name)) != 1:
        raise NotConvertibleError(f"'{fn.name}' is called from more than one place")
    if contains_single(fn.body):
        raise NotConvertibleError(f"'{fn.name}' contains a single statement")
    neighbours = _neighbour_vars(fn, fn.params[0].name)
    global_names = set(program.global_names)
    key: str | None = None
    reports = 0
    assigned = False
    for node in fn.body.walk():
        match node:
            case Call(func=func) if func in REDUCTION_BUILTINS:
                raise NotConvertibleError(
                    f"'{fn.name}' uses the non-idempotent reduction '{func}'"
                )
            case Call(func=func, args=(_, _, report)) if func in ATOMIC_BUILTINS:
                if report != Name(flag):
                    raise NotConvertibleError(
                        f"'{func}' in '{fn.name}' does not report to flag '{flag}'"
                    )
                reports += 1
            case Call(func=func) if program.function(func) is not None:
                raise NotConvertibleError(f"'{fn.name}' calls function '{func}'")
            case MethodCall(method="union" | "add"):
                raise NotConvertibleError(f"'{fn.name}' modifies a shared container")
            case Assign(target=Name(id=name)) if (
                name in global_names and name != flag
            ):
                raise NotConvertibleError(
                    f"'{fn.name}' writes global '{name}' besides its convergence flag"
                )
        target = _update_target(node)
        if target is None:
            continue
        if not (isinstance(target.obj, Name) and target.obj.id in neighbours):
            raise NotConvertibleError(
                f"'{fn.name}' updates property '{target.name}' of a point other "
                f"than a visited neighbour"
            )
        key = key or target.name
        if isinstance(node, Assign):
            assigned = True

    sets = 0
    for node in fn.body.walk():
        if isinstance(node, Assign) and node.target == Name(flag):
            if not (isinstance(node.value, IntLit) and node.value.value != 0):
                raise NotConvertibleError(
                    f"'{fn.name}' assigns flag '{flag}' a value other than a "
                    f"nonzero constant"
                )
            sets += 1
    if assigned and not sets:
        raise NotConvertibleError(
            f"'{fn.name}' assigns a property without setting flag '{flag}'"
        )
    uses = sum(1 for n in fn.body.walk() if n == Name(flag))
    if uses != reports + sets:
        raise NotConvertibleError(f"'{fn.name}' reads flag '{flag}'")
    return key


def _update_target(node: object) -> Member | None:
    match node:
        case Assign(target=Member() as target):
            return target
        case Call(func=func, args=(Member() as target, *_)) if (
            func in ATOMIC_BUILTINS
        ):
            return target
    return None


def _push(worklist: str, point: str, key: str | None) -> Stmt:
    args: tuple[Expr, ...] = (Name(point),)
    if key is not None:
        args += (Member(Name(point), key),)
    return ExprStmt(MethodCall(Name(worklist), "add", args))


def _worklist_kernel(
    fn: FunctionDecl, flag: str, key: str | None, param: str
) -> FunctionDecl:
    """Replace flag reports of a kernel by pushes of the updated neighbour."""
    neighbours = _neighbour_vars(fn, fn.params[0].name)
    updated = fresh_name("upd", used_names(fn))

    def visit(stmt: Stmt, neighbour: str | None) -> Stmt:
        match stmt:
            case ExprStmt(expr=Call(func=func, args=(target, value, report))) if (
                func in ATOMIC_BUILTINS and report == Name(flag)
            ):
                assert isinstance(target, Member) and isinstance(target.obj, Name)
                pushed = target.obj.id
                return Block(
                    (
                        VarDecl(INT, updated, IntLit(0)),
                        ExprStmt(Call(func, (target, value, Name(updated)))),
                        If(
                            Binary("==", Name(updated), IntLit(1)),
                            _push(param, pushed, target.name),
                        ),
                    )
                )
            case Assign(target=Name(id=name)) if name == flag:
                if neighbour is None:
                    raise NotConvertibleError(
                        f"'{fn.name}' sets flag '{flag}' outside a neighbour loop"
                    )
                return _push(param, neighbour, key)
            case Foreach(var=var) if var in neighbours:
                return attrs.evolve(stmt, body=visit(stmt.body, var))
        return stmt.map_children(
            lambda c: visit(c, neighbour) if isinstance(c, Stmt) else c
        )

    body = visit(fn.body, None)
    assert isinstance(body, Block)
    collection = Param(DslType(TypeKind.COLLECTION), param)
    return attrs.evolve(fn, params=(*fn.params, collection), body=body)


##### Host rewrite #####


def _individual_seeds(
    before: Iterable[Stmt], graph: str, properties: set[str]
) -> list[Expr]:
    """Points written individually, as in ``graph.points[0].dist = 0``."""
    seeds: list[Expr] = []
    for stmt in before:
        match stmt:
            case Assign(
                target=Member(
                    obj=Index(obj=Member(obj=Name(id=g), name="points")) as point,
                    name=prop,
                )
            ) if g == graph and prop in properties and point not in seeds:
                seeds.append(point)
    return seeds


def _touched_properties(fn: FunctionDecl) -> set[str]:
    return {
        n.name
        for n in fn.body.walk()
        if isinstance(n, Member) and n.name not in ("id", "src", "dst")
    }


def _seed(
    launch: Foreach,
    worklist: str,
    key: str | None,
    before: Iterable[Stmt],
    fn: FunctionDecl,
) -> list[Stmt]:
    """The statements filling a fresh worklist before the first round."""
    assert isinstance(launch.subject, Name)
    graph = launch.subject.id
    var = launch.var
    if launch.filter is None:
        points = _individual_seeds(before, graph, _touched_properties(fn))
        if points:
            return [
                ExprStmt(
                    MethodCall(
                        Name(worklist),
                        "add",
                        (p,) if key is None else (p, Member(p, key)),
                    )
                )
                for p in points
            ]
    return [
        Foreach(
            var,
            launch.subject,
            IteratorKind.POINTS,
            launch.filter,
            _push(worklist, var, key),
            outer=True,
        )
    ]


@define(frozen=True)
class ToWorklist(Transform):
    """Rewrite fixpoint loops of ``main`` into worklist-driven loops.

    A fixpoint loop resets one or more global flags to zero, launches one kernel
    per flag over the points of a graph and breaks when all flags stay zero. A
    kernel is convertible if it writes properties only of the neighbours it
    visits, through ``MIN``/``MAX`` reporting to its flag or through plain
    assignments accompanied by setting the flag. Each flag gets its own
    worklist, seeded with the points that satisfy the launch filter, or else
    with the individually initialized points, or else with all points.
    """

    @property
    @override
    def name(self) -> str:
        return "to_worklist"

    @override
    def __call__(self, program: Program, /) -> tuple[Program, TransformReport]:
        try:
            return self._convert(program)
        except NotConvertibleError as ex:
            _logger.debug("to_worklist not applied: %s", ex)
            return program, TransformReport.rejected(self.name, str(ex))

    def _convert(self, program: Program) -> tuple[Program, TransformReport]:
        taken = used_names(program)
        kernels: dict[str, FunctionDecl] = {}
        rewritten: list[Foreach] = []

        def convert_loop(found: _FixpointLoop, before: list[Stmt]) -> list[Stmt]:
            prefix: list[Stmt] = []
            worklists: dict[str, str] = {}
            launches: dict[int, Foreach] = {}
            for flag, launch in zip(found.flags, found.launches):
                fn = launched_function(launch, program)
                assert fn is not None and isinstance(launch.subject, Name)
                key = _check_kernel(fn, flag, program)
                worklist = fresh_name("wl", taken)
                taken.add(worklist)
                worklists[flag] = worklist
                param = fresh_name("wl", used_names(fn))
                kernels[fn.name] = _worklist_kernel(fn, flag, key, param)
                graph = launch.subject.id
                prefix.append(
                    VarDecl(DslType(TypeKind.COLLECTION, graph), worklist)
                )
                prefix += _seed(launch, worklist, key, before, fn)
                call = launch.launch_call
                assert call is not None
                launches[id(launch)] = attrs.evolve(
                    launch,
                    subject=Name(worklist),
                    iterator=IteratorKind.COLLECTION_ITEMS,
                    filter=None,
                    outer=False,
                    body=ExprStmt(
                        attrs.evolve(call, args=(*call.args, Name(worklist)))
                    ),
                )
                rewritten.append(launch)

            body: list[Stmt] = []
            for stmt in statements(found.loop.body):
                if _reset_flag(stmt, set(found.flags)) is not None:
                    continue
                if id(stmt) in launches:
                    body.append(launches[id(stmt)])
                elif _exit_test(stmt) is not None:
                    body.append(_drained(stmt, [worklists[f] for f in found.flags]))
                else:
                    body.append(stmt)
            return [*prefix, attrs.evolve(found.loop, body=Block(tuple(body)))]

        def rewrite_block(block: Block) -> Block:
            stmts: list[Stmt] = []
            for stmt in block.stmts:
                found = (
                    _fixpoint_loop(stmt, program) if isinstance(stmt, While) else None
                )
                if found is not None:
                    stmts += convert_loop(found, stmts)
                else:
                    stmts.append(rewrite_stmt(stmt))
            return attrs.evolve(block, stmts=tuple(stmts))

        def rewrite_stmt(stmt: Stmt) -> Stmt:
            if isinstance(stmt, Block):
                return rewrite_block(stmt)
            return stmt.map_children(
                lambda c: rewrite_stmt(c) if isinstance(c, Stmt) else c
            )

        main = attrs.evolve(program.main, body=rewrite_block(program.main.body))
        if not rewritten:
            raise NotConvertibleError(
                "main has no fixpoint loop with a convergence flag"
            )

        converted = attrs.evolve(
            program,
            functions=tuple(kernels.get(f.name, f) for f in program.functions),
            main=main,
        )
        _logger.debug("to_worklist converted %s", ", ".join(kernels))
        return converted, TransformReport(
            self.name,
            True,
            tuple(launch.loc for launch in rewritten),
            tuple(kernels),
        )


def _drained(exit_test: Stmt, worklists: list[str]) -> Stmt:
    """The exit test breaking once all worklists are empty."""
    assert isinstance(exit_test, If)
    conds = [
        Binary("==", MethodCall(Name(w), "size", ()), IntLit(0)) for w in worklists
    ]
    cond = conds[0]
    for c in conds[1:]:
        cond = Binary("&&", cond, c)
    return attrs.evolve(exit_test, cond=cond)


def to_worklist(program: Program) -> tuple[Program, TransformReport]:
    """Rewrite fixpoint loops into worklist-driven loops (see :class:`ToWorklist`).

    Example:
        >>> from polyfal.corpus import corpus_source
        >>> from polyfal.dsl import parse_source
        >>> converted, report = to_worklist(parse_source(corpus_source("sssp")))
        >>> report.rewritten_functions
        ('relaxgraph',)
    """
    return ToWorklist()(program)


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
