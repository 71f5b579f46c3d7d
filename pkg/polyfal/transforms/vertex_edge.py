"""Conversion between vertex-based and edge-based kernels.

A vertex-based kernel is launched over the points of a graph and visits the
neighbours of its point in an inner ``foreach``. The equivalent edge-based
kernel is launched over the edges and derives both endpoints from its edge:

.. code-block:: none

    void k(Point p, Graph g) {            void k(Edge e, Graph g) {
        foreach (t In p.outnbrs) {            Point (g) p;
            MIN(t.d, p.d + g.getweight(p, t), c);   Point (g) t;
        }                                     p = e.src;
    }                                         t = e.dst;
                                              MIN(t.d, p.d + e.weight, c);
                                          }

For ``innbrs`` the orientation is reversed: the point is the destination of the
edge and the neighbour its source.
"""

from __future__ import annotations

import gc
import logging
from collections.abc import Iterator

import attrs
from attrs import define
from typing_extensions import override

from polyfal.dsl.ast import (
    Assign,
    Block,
    Call,
    Expr,
    Foreach,
    FunctionDecl,
    IteratorKind,
    Member,
    MethodCall,
    Name,
    Node,
    Param,
    Program,
    Stmt,
    VarDecl,
    transform,
)
from polyfal.dsl.types import DslType, TypeKind
from polyfal.exceptions import NotEligibleError
from polyfal.semantic.resolver import ATOMIC_BUILTINS, REDUCTION_BUILTINS
from polyfal.semantic.targets import launched_function
from polyfal.transforms.base import Transform, TransformReport
from polyfal.transforms.rewrite import (
    calls_of,
    contains,
    contains_single,
    fresh_name,
    replace_exprs,
    used_names,
)

_logger = logging.getLogger(__name__)

_ENDPOINTS = {
    IteratorKind.OUTNBRS: ("src", "dst"),
    IteratorKind.INNBRS: ("dst", "src"),
}
"""Edge ends of the visited point and of its neighbour, per neighbour iterator."""


##### Shared checks #####


def _outer_launches(
    program: Program, iterator: IteratorKind
) -> Iterator[tuple[Foreach, FunctionDecl]]:
    for host in program.all_functions:
        for node in host.body.walk():
            if isinstance(node, Foreach) and node.outer and node.iterator is iterator:
                fn = launched_function(node, program)
                if fn is not None:
                    yield node, fn


def _graph_param(fn: FunctionDecl, launch: Foreach) -> str | None:
    """The parameter of ``fn`` receiving the graph the launch iterates."""
    call = launch.launch_call
    if call is None or not isinstance(launch.subject, Name):
        return None
    graph = Name(launch.subject.id)
    for param, arg in zip(fn.params, call.args):
        if param.dtype.kind is TypeKind.GRAPH and arg == graph:
            return param.name
    return None


def _check_launch(launch: Foreach, fn: FunctionDecl, program: Program) -> Call:
    """Check the launch shape common to both conversions."""
    call = launch.launch_call
    assert call is not None
    if len(calls_of(program, fn.name)) != 1:
        raise NotEligibleError(f"'{fn.name}' is called from more than one place")
    if not call.args or call.args[0] != Name(launch.var):
        raise NotEligibleError(
            f"the launch of '{fn.name}' does not pass its iteration variable "
            f"as first argument"
        )
    if any(launch.var in used_names(arg) for arg in call.args[1:]):
        raise NotEligibleError(
            f"the launch of '{fn.name}' passes its iteration variable twice"
        )
    if contains_single(fn.body):
        raise NotEligibleError(f"'{fn.name}' contains a single statement")
    return call


def _apply(
    program: Program,
    kernels: dict[str, FunctionDecl],
    launches: dict[int, Foreach],
) -> Program:
    """Replace converted kernels and their launches."""

    def replace_launch(node: Node) -> Node | None:
        return launches.get(id(node))

    def rewrite(fn: FunctionDecl) -> FunctionDecl:
        fn = kernels.get(fn.name, fn)
        return attrs.evolve(fn, body=transform(fn.body, replace_launch))

    return attrs.evolve(
        program,
        functions=tuple(rewrite(f) for f in program.functions),
        main=rewrite(program.main),
    )


##### Vertex to edge #####


def _edge_kernel(fn: FunctionDecl, launch: Foreach) -> tuple[FunctionDecl, str]:
    """Convert a vertex-based kernel; also return the launched point's edge end."""
    if not fn.params or fn.params[0].dtype.kind is not TypeKind.POINT:
        raise NotEligibleError(f"the first parameter of '{fn.name}' is not a Point")
    point = fn.params[0].name
    body = fn.body.stmts
    inner = body[0] if len(body) == 1 else None
    if not (isinstance(inner, Foreach) and inner.iterator.is_neighbourhood):
        raise NotEligibleError(
            f"the body of '{fn.name}' is not a single foreach over neighbours"
        )
    if inner.subject != Name(point):
        raise NotEligibleError(
            f"the inner foreach of '{fn.name}' does not iterate the neighbours "
            f"of '{point}'"
        )
    if inner.iterator not in _ENDPOINTS:
        raise NotEligibleError(
            f"iterator '{inner.iterator.value}' in '{fn.name}' has no edge orientation"
        )
    if inner.filter is not None:
        raise NotEligibleError(f"the inner foreach of '{fn.name}' has a filter")
    if contains(inner.body, Foreach):
        raise NotEligibleError(f"'{fn.name}' nests foreach more than two levels deep")
    graph = _graph_param(fn, launch)
    if graph is None:
        raise NotEligibleError(
            f"'{fn.name}' receives no Graph parameter for the iterated graph"
        )

    point_end, neighbour_end = _ENDPOINTS[inner.iterator]
    neighbour = inner.var
    edge = fresh_name("e", used_names(fn))
    weight_args = (
        (Name(point), Name(neighbour))
        if inner.iterator is IteratorKind.OUTNBRS
        else (Name(neighbour), Name(point))
    )

    def edge_weight(expr: Expr) -> Expr | None:
        if (
            isinstance(expr, MethodCall)
            and expr.method == "getweight"
            and expr.obj == Name(graph)
            and expr.args == weight_args
        ):
            return Member(Name(edge), "weight")
        return None

    inner_body = replace_exprs(inner.body, edge_weight)
    assert isinstance(inner_body, Stmt)
    inner_stmts = inner_body.stmts if isinstance(inner_body, Block) else (inner_body,)
    point_type = DslType(TypeKind.POINT, graph)
    head: tuple[Stmt, ...] = (
        VarDecl(point_type, point),
        VarDecl(point_type, neighbour),
        Assign(Name(point), "=", Member(Name(edge), point_end)),
        Assign(Name(neighbour), "=", Member(Name(edge), neighbour_end)),
    )
    param = Param(DslType(TypeKind.EDGE, fn.params[0].dtype.graph), edge)
    converted = attrs.evolve(
        fn, params=(param, *fn.params[1:]), body=Block((*head, *inner_stmts))
    )
    return converted, point_end


def _edge_launch(launch: Foreach, point_end: str) -> Foreach:
    var = Name(launch.var)

    def endpoint(expr: Expr) -> Expr | None:
        return Member(var, point_end) if expr == var else None

    filter_ = launch.filter
    if filter_ is not None:
        filter_ = replace_exprs(filter_, endpoint)  # type: ignore[assignment]
    return attrs.evolve(launch, iterator=IteratorKind.EDGES, filter=filter_)


@define(frozen=True)
class VertexToEdge(Transform):
    """Rewrite vertex-based kernels into edge-based kernels.

    Every launch over the points of a graph whose kernel visits neighbours is a
    candidate. The transform applies only if all candidates are eligible: the
    kernel body is exactly one ``foreach`` over the ``outnbrs`` or ``innbrs`` of
    the launched point, and the kernel is the only statement of the launch.
    """

    @property
    @override
    def name(self) -> str:
        return "vertex_to_edge"

    @override
    def __call__(self, program: Program, /) -> tuple[Program, TransformReport]:
        candidates = [
            (launch, fn)
            for launch, fn in _outer_launches(program, IteratorKind.POINTS)
            if any(
                isinstance(n, Foreach) and n.iterator.is_neighbourhood
                for n in fn.body.walk()
            )
        ]
        if not candidates:
            return program, TransformReport.rejected(
                self.name, "no kernel launched over points visits neighbours"
            )
        kernels: dict[str, FunctionDecl] = {}
        launches: dict[int, Foreach] = {}
        try:
            for launch, fn in candidates:
                _check_launch(launch, fn, program)
                kernels[fn.name], point_end = _edge_kernel(fn, launch)
                launches[id(launch)] = _edge_launch(launch, point_end)
        except NotEligibleError as ex:
            _logger.debug("vertex_to_edge not applied: %s", ex)
            return program, TransformReport.rejected(self.name, str(ex))

        _logger.debug("vertex_to_edge converted %s", ", ".join(kernels))
        return _apply(program, kernels, launches), TransformReport(
            self.name,
            True,
            tuple(launch.loc for launch, _ in candidates),
            tuple(kernels),
        )


##### Edge to vertex #####


def _endpoint_of(expr: Expr, edge: str) -> str | None:
    """``src`` or ``dst`` if the expression is that end of the edge variable."""
    if (
        isinstance(expr, Member)
        and expr.obj == Name(edge)
        and expr.name in ("src", "dst")
    ):
        return expr.name
    return None


def _derivations(fn: FunctionDecl, edge: str) -> tuple[dict[str, str], set[int]]:
    """Find the endpoint locals of an edge kernel.

    Returns:
        The endpoint locals mapped to their edge end, and the ids of the top-level
        statements declaring or deriving them.
    """
    declared: dict[str, VarDecl] = {}
    ends: dict[str, str] = {}
    derivations: set[int] = set()
    for stmt in fn.body.stmts:
        match stmt:
            case VarDecl(dtype=dtype, name=name, init=init) if (
                dtype.kind is TypeKind.POINT
            ):
                declared[name] = stmt
                if init is not None and (end := _endpoint_of(init, edge)):
                    ends[name] = end
            case Assign(target=Name(id=name), op="=", value=value) if (
                name in declared and value is not None
            ):
                if (end := _endpoint_of(value, edge)) is not None:
                    if name in ends:
                        raise NotEligibleError(
                            f"endpoint local '{name}' of '{fn.name}' is assigned twice"
                        )
                    ends[name] = end
                    derivations.add(id(stmt))
    for name in ends:
        derivations.add(id(declared[name]))
    for end in ("src", "dst"):
        if sum(1 for e in ends.values() if e == end) > 1:
            raise NotEligibleError(
                f"'{fn.name}' derives the edge {end} into more than one local"
            )

    assigned = [
        n.target.id
        for n in fn.body.walk()
        if isinstance(n, Assign)
        and isinstance(n.target, Name)
        and n.target.id in ends
        and id(n) not in derivations
    ]
    if assigned:
        raise NotEligibleError(
            f"endpoint local '{assigned[0]}' of '{fn.name}' is reassigned"
        )
    return ends, derivations


def _written_objects(node: Node) -> Iterator[Expr]:
    """The element expressions whose properties are written inside a node."""
    for n in node.walk():
        match n:
            case Assign(target=Member(obj=obj)):
                yield obj
            case Call(func=func, args=(Member(obj=obj), *_)) if (
                func in ATOMIC_BUILTINS + REDUCTION_BUILTINS
            ):
                yield obj


def _filter_end(launch: Foreach) -> str | None:
    """The edge end read by the launch filter, if it reads exactly one."""
    if launch.filter is None:
        return None
    var = Name(launch.var)
    read = {
        n.name
        for n in launch.filter.walk()
        if isinstance(n, Member) and n.obj == var and n.name in ("src", "dst")
    }
    return read.pop() if len(read) == 1 else None


def _vertex_kernel(
    fn: FunctionDecl, launch: Foreach
) -> tuple[FunctionDecl, str]:
    """Convert an edge-based kernel; also return the launched point's edge end."""
    if not fn.params or fn.params[0].dtype.kind is not TypeKind.EDGE:
        raise NotEligibleError(f"the first parameter of '{fn.name}' is not an Edge")
    if contains(fn.body, Foreach):
        raise NotEligibleError(f"'{fn.name}' already contains a foreach")
    edge = fn.params[0].name
    ends, derivations = _derivations(fn, edge)
    local_of = {end: name for name, end in ends.items()}

    def end_of(expr: Expr) -> str | None:
        if isinstance(expr, Name) and expr.id in ends:
            return ends[expr.id]
        return _endpoint_of(expr, edge)

    point_end = _filter_end(launch) or next(iter(ends.values()), None)
    if point_end is None:
        written = {end_of(obj) for obj in _written_objects(fn.body)}
        point_end = "dst" if "src" in written and "dst" not in written else "src"
    iterator = IteratorKind.OUTNBRS if point_end == "src" else IteratorKind.INNBRS
    neighbour_end = _ENDPOINTS[iterator][1]

    taken = used_names(fn) - set(ends)
    point = local_of.get(point_end) or fresh_name("p", taken)
    neighbour = local_of.get(neighbour_end) or fresh_name("t", taken | {point})
    src, dst = (point, neighbour) if point_end == "src" else (neighbour, point)
    graph = _graph_param(fn, launch)

    def vertex_form(expr: Expr) -> Expr | None:
        if (end := _endpoint_of(expr, edge)) is not None:
            return Name(src if end == "src" else dst)
        if expr == Member(Name(edge), "weight"):
            if graph is None:
                raise NotEligibleError(
                    f"'{fn.name}' reads the edge weight but receives no Graph "
                    f"parameter for the iterated graph"
                )
            return MethodCall(Name(graph), "getweight", (Name(src), Name(dst)))
        if expr == Name(edge):
            raise NotEligibleError(
                f"'{fn.name}' uses edge '{edge}' beyond its endpoints and weight"
            )
        return None

    body = tuple(
        replace_exprs(stmt, vertex_form)
        for stmt in fn.body.stmts
        if id(stmt) not in derivations
    )
    inner = Foreach(neighbour, Name(point), iterator, None, Block(body))
    param = Param(DslType(TypeKind.POINT, fn.params[0].dtype.graph), point)
    converted = attrs.evolve(
        fn, params=(param, *fn.params[1:]), body=Block((inner,))
    )
    return converted, point_end


def _vertex_launch(launch: Foreach, point_end: str) -> Foreach:
    var = Name(launch.var)

    def point(expr: Expr) -> Expr | None:
        if isinstance(expr, Member) and expr.obj == var:
            if expr.name != point_end:
                raise NotEligibleError(
                    f"the launch filter reads '{launch.var}.{expr.name}', which has "
                    f"no vertex-based counterpart"
                )
            return var
        if expr == var:
            raise NotEligibleError(
                f"the launch filter uses the edge '{launch.var}' itself"
            )
        return None

    filter_ = launch.filter
    if filter_ is not None:
        filter_ = replace_exprs(filter_, point)  # type: ignore[assignment]
    return attrs.evolve(launch, iterator=IteratorKind.POINTS, filter=filter_)


@define(frozen=True)
class EdgeToVertex(Transform):
    """Rewrite edge-based kernels into vertex-based kernels.

    Every launch over the edges of a graph is converted. The kernel's first
    parameter must be the edge, which may only be used through its endpoints and
    its weight. Endpoint locals derived at the head of the kernel become the
    point parameter and the neighbour variable. The launched point is the edge end
    read by the launch filter; without one, it is the end derived first at the
    head of the kernel, which is where :class:`VertexToEdge` places it. Kernels
    without endpoint locals launch from the destination if they write
    properties of the edge source only, and from the source otherwise. The
    neighbour direction is ``outnbrs`` for a source point and ``innbrs`` for a
    destination point.
    """

    @property
    @override
    def name(self) -> str:
        return "edge_to_vertex"

    @override
    def __call__(self, program: Program, /) -> tuple[Program, TransformReport]:
        candidates = list(_outer_launches(program, IteratorKind.EDGES))
        if not candidates:
            return program, TransformReport.rejected(
                self.name, "no kernel is launched over edges"
            )
        kernels: dict[str, FunctionDecl] = {}
        launches: dict[int, Foreach] = {}
        try:
            for launch, fn in candidates:
                _check_launch(launch, fn, program)
                kernels[fn.name], point_end = _vertex_kernel(fn, launch)
                launches[id(launch)] = _vertex_launch(launch, point_end)
        except NotEligibleError as ex:
            _logger.debug("edge_to_vertex not applied: %s", ex)
            return program, TransformReport.rejected(self.name, str(ex))

        _logger.debug("edge_to_vertex converted %s", ", ".join(kernels))
        return _apply(program, kernels, launches), TransformReport(
            self.name,
            True,
            tuple(launch.loc for launch, _ in candidates),
            tuple(kernels),
        )


def vertex_to_edge(program: Program) -> tuple[Program, TransformReport]:
    """Rewrite vertex-based kernels into edge-based kernels (see :class:`VertexToEdge`).

    Example:
        >>> from polyfal.corpus import corpus_source
        >>> from polyfal.dsl import alpha_equivalent, parse_source
        >>> converted, report = vertex_to_edge(parse_source(corpus_source("sssp")))
        >>> report.applied, alpha_equivalent(
        ...     converted, parse_source(corpus_source("sssp_edge"))
        ... )
        (True, True)
    """
    return VertexToEdge()(program)


def edge_to_vertex(program: Program) -> tuple[Program, TransformReport]:
    """Rewrite edge-based kernels into vertex-based ones (see :class:`EdgeToVertex`)."""
    return EdgeToVertex()(program)


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
