"""Control-flow graphs of host functions."""

from __future__ import annotations

import gc
import logging
from collections import deque
from enum import Enum

from attrs import define, field
from attrs.validators import ge, instance_of, optional

from polyfal.dsl.ast import (
    Block,
    Break,
    FunctionDecl,
    If,
    ParallelSections,
    Program,
    Return,
    Stmt,
    While,
)
from polyfal.semantic.access import EMPTY, AccessAnalyzer, AccessSet
from polyfal.semantic.targets import launched_function

_logger = logging.getLogger(__name__)


class NodeKind(Enum):
    """Kinds of control-flow graph nodes."""

    KERNEL_LAUNCH = "KERNEL_LAUNCH"
    """A ``foreach`` whose body is a single target-function call."""

    PLAIN = "PLAIN"
    """Any other statement, branch or loop header."""


@define
class CfgNode:
    """A node of a control-flow graph, annotated by the barrier analysis."""

    id: int = field(validator=[instance_of(int), ge(0)])
    stmt: Stmt | None = field(validator=optional(instance_of(Stmt)), repr=False)
    """The statement; ``None`` for the exit node."""

    kind: NodeKind = field(default=NodeKind.PLAIN, validator=instance_of(NodeKind))
    visited: int = field(default=0)
    barrier: bool = field(default=False)
    predecessor_count: int = field(default=0, validator=ge(0))
    rset: AccessSet = field(default=EMPTY)
    wset: AccessSet = field(default=EMPTY)
    successors: list[int] = field(factory=list)

    stmt_sets: tuple[AccessSet, AccessSet] = field(
        default=(EMPTY, EMPTY), repr=False
    )
    """The read and write sets of the statement alone, unaffected by marking."""

    def conflicts(self, other: CfgNode) -> bool:
        """Whether the node and another node access a location in a conflicting way."""
        return (
            self.rset.intersects(other.wset)
            or self.wset.intersects(other.rset)
            or self.wset.intersects(other.wset)
        )


@define
class Cfg:
    """A control-flow graph over the statements of one function."""

    nodes: list[CfgNode] = field(factory=list)
    """The nodes, indexed by their id."""

    root: int = field(default=0)
    exit: int = field(default=0)
    back_edges: set[tuple[int, int]] = field(factory=set)
    """Loop back-edges as ``(source, loop header)`` pairs."""

    def __getitem__(self, node_id: int) -> CfgNode:
        return self.nodes[node_id]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """All edges in node order."""
        return [(n.id, s) for n in self.nodes for s in n.successors]

    def predecessors(self, node_id: int, back_edges: bool = False) -> list[int]:
        """The predecessors of a node, optionally including loop back-edges."""
        return [
            src
            for src, dst in self.edges
            if dst == node_id and (back_edges or (src, dst) not in self.back_edges)
        ]

    def launches(self) -> list[CfgNode]:
        """The kernel-launch nodes in node order."""
        return [n for n in self.nodes if n.kind is NodeKind.KERNEL_LAUNCH]

    def node_of(self, stmt: Stmt) -> CfgNode | None:
        """The node of a statement, compared by identity."""
        return next((n for n in self.nodes if n.stmt is stmt), None)


class _Builder:
    """Builds a CFG statement by statement.

    Each building step receives the ids of the nodes flowing into it and returns
    the ids flowing out.
    """

    def __init__(self, program: Program):
        self._program = program
        self._analyzer = AccessAnalyzer(program)
        self.cfg = Cfg()
        self._breaks: list[list[int]] = []
        self._returns: list[int] = []

    def _node(self, stmt: Stmt | None, preds: list[int], sets: bool = True) -> int:
        kind = (
            NodeKind.KERNEL_LAUNCH
            if stmt is not None and launched_function(stmt, self._program)
            else NodeKind.PLAIN
        )
        node = CfgNode(len(self.cfg.nodes), stmt, kind)
        if stmt is not None and sets:
            node.rset, node.wset = node.stmt_sets = self._sets(stmt)
        self.cfg.nodes.append(node)
        for pred in preds:
            self._edge(pred, node.id)
        return node.id

    def _edge(self, src: int, dst: int) -> None:
        successors = self.cfg.nodes[src].successors
        if dst not in successors:
            successors.append(dst)

    def _sets(self, stmt: Stmt) -> tuple[AccessSet, AccessSet]:
        match stmt:
            case If(cond=cond) | While(cond=cond):
                return self._analyzer.expr_sets(cond)
        return self._analyzer.stmt_sets(stmt)

    def build(self, fn: FunctionDecl) -> Cfg:
        outs = self._stmts(fn.body.stmts, [])
        self.cfg.exit = self._node(None, outs + self._returns)
        self.cfg.root = 0
        return self.cfg

    def _stmts(self, stmts: tuple[Stmt, ...], preds: list[int]) -> list[int]:
        for stmt in stmts:
            preds = self._stmt(stmt, preds)
        return preds

    def _stmt(self, stmt: Stmt, preds: list[int]) -> list[int]:
        match stmt:
            case Block(stmts=stmts):
                return self._stmts(stmts, preds)
            case Break():
                self._breaks[-1].extend(preds)
                return []
            case Return():
                self._returns.append(self._node(stmt, preds))
                return []
            case If(then=then, orelse=orelse):
                branch = self._node(stmt, preds)
                outs = self._stmt(then, [branch])
                outs += self._stmt(orelse, [branch]) if orelse else [branch]
                return outs
            case While(body=body):
                header = self._node(stmt, preds)
                self._breaks.append([])
                for end in self._stmt(body, [header]):
                    self._edge(end, header)
                    self.cfg.back_edges.add((end, header))
                return [header, *self._breaks.pop()]
            case ParallelSections(sections=sections):
                fork = self._node(stmt, preds, sets=False)
                outs: list[int] = []
                for section in sections:
                    outs += self._stmt(section, [fork])
                return outs
        return [self._node(stmt, preds)]


def build_cfg(fn: FunctionDecl, program: Program) -> Cfg:
    """Build the control-flow graph of a host function.

    Every simple statement, branch condition, loop header, host ``foreach`` and
    kernel launch is one node, annotated with its read and write sets. ``while``
    loops get back-edges from the ends of their bodies; ``break`` edges lead to
    the statement following the loop. Parallel sections fork from one node. All
    paths end in a single exit node without statement.

    Args:
        fn: A resolved function of ``program``.
        program: The resolved program.

    Returns:
        The control-flow graph. Node ids follow the source order.
    """
    cfg = _Builder(program).build(fn)
    _logger.debug(
        "CFG of '%s': %d nodes, %d edges", fn.name, len(cfg), len(cfg.edges)
    )
    return cfg


def count_predecessors(cfg: Cfg) -> Cfg:
    """Set the predecessor counts of all nodes.

    Counts the incoming edges of every node from nodes reachable from the root.
    Loop back-edges are not counted, which lets the barrier marking join at loop
    headers after their single entry.
    """
    for node in cfg.nodes:
        node.predecessor_count = 0
    reached = {cfg.root}
    queue = deque([cfg.root])
    while queue:
        node = cfg[queue.popleft()]
        for succ in node.successors:
            if (node.id, succ) not in cfg.back_edges:
                cfg[succ].predecessor_count += 1
            if succ not in reached:
                reached.add(succ)
                queue.append(succ)
    return cfg


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
