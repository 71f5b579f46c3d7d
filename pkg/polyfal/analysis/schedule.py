"""Grouping of barrier-free kernel launches into concurrent groups."""

from __future__ import annotations

import gc
import logging

from attrs import define, field
from attrs.validators import deep_iterable, instance_of

from polyfal.analysis.cfg import Cfg, CfgNode, NodeKind
from polyfal.dsl.ast import Assign, ExprStmt, Foreach, Name, Stmt, Storage
from polyfal.semantic.access import AccessSet
from polyfal.utils.basic import to_tuple

_logger = logging.getLogger(__name__)


@define(frozen=True)
class ConcurrentGroup:
    """Kernel launches that run together without intermediate barriers."""

    launches: tuple[int, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(int))
    )
    """Node ids of the launches, in source order."""

    plains: tuple[int, ...] = field(
        factory=tuple, converter=to_tuple, validator=deep_iterable(instance_of(int))
    )
    """Node ids of plain statements executed after the launches."""

    barrier_after: bool = field(default=True, validator=instance_of(bool))
    """Whether the group must be joined before anything that follows it."""

    @launches.validator
    def _validate_launches(self, _, value: tuple[int, ...]) -> None:  # noqa: DOC101, DOC103
        """Validate that a group holds at least one launch.

        Raises:
            ValueError: If the group is empty.
        """
        if not value:
            raise ValueError("A concurrent group needs at least one launch.")

    @property
    def members(self) -> tuple[int, ...]:
        """All node ids of the group."""
        return self.launches + self.plains


@define(frozen=True)
class Schedule:
    """The concurrent groups of a host function in execution order."""

    groups: tuple[ConcurrentGroup, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(ConcurrentGroup))
    )

    statements: tuple[Stmt | None, ...] = field(
        factory=tuple, converter=to_tuple, eq=False, repr=False
    )
    """The statement of each node id, for lookups by statement."""

    def group_of(self, stmt: Stmt) -> ConcurrentGroup | None:
        """The group containing a statement, compared by identity."""
        for group in self.groups:
            if any(self.statements[i] is stmt for i in group.members):
                return group
        return None

    def is_leader(self, stmt: Stmt) -> bool:
        """Whether the statement is the first launch of its group."""
        group = self.group_of(stmt)
        return group is not None and self.statements[group.launches[0]] is stmt

    def launch_stmts(self, group: ConcurrentGroup) -> list[Stmt]:
        """The launch statements of a group."""
        return [s for i in group.launches if (s := self.statements[i]) is not None]

    def plain_stmts(self, group: ConcurrentGroup) -> list[Stmt]:
        """The plain statements of a group."""
        return [s for i in group.plains if (s := self.statements[i]) is not None]


def _conflict(a: tuple[AccessSet, AccessSet], b: tuple[AccessSet, AccessSet]) -> bool:
    (ra, wa), (rb, wb) = a, b
    return ra.intersects(wb) or wa.intersects(rb) or wa.intersects(wb)


def _movable(node: CfgNode) -> bool:
    """Whether a plain statement may execute after concurrent launches."""
    match node.stmt:
        case Assign(target=Name(storage=storage)):
            return storage is Storage.GLOBAL
        case Assign() | ExprStmt() | Foreach():
            return True
    return False


def _follows(cfg: Cfg, prev: int, node: int) -> bool:
    """Whether control flows from ``prev`` to ``node`` and nowhere else."""
    return cfg[prev].successors == [node] and cfg.predecessors(node, True) == [prev]


def derive_schedule(cfg: Cfg) -> Schedule:
    """Collapse runs of barrier-free launches into concurrent groups.

    A group starts at a kernel launch and extends along straight-line control
    flow. It takes further launches while its last launch is barrier-free, and
    plain statements that write no local variable. Every statement taken must
    not conflict with any launch or plain statement already in the group. A
    launch marked with a barrier ends its group.

    Args:
        cfg: A control-flow graph processed by
            :func:`~polyfal.analysis.barriers.mark_barriers`.

    Returns:
        The schedule, with groups ordered by their first launch.
    """
    groups: list[ConcurrentGroup] = []
    launches: list[int] = []
    plains: list[int] = []
    open_ = False

    def close() -> None:
        nonlocal open_, launches, plains
        if launches:
            groups.append(
                ConcurrentGroup(launches, plains, cfg[launches[-1]].barrier)
            )
        launches, plains, open_ = [], [], False

    def joins(node: CfgNode) -> bool:
        members = launches + plains
        if not open_ or not _follows(cfg, max(members), node.id):
            return False
        return not any(_conflict(node.stmt_sets, cfg[m].stmt_sets) for m in members)

    for node in cfg.nodes:
        if node.kind is NodeKind.KERNEL_LAUNCH:
            if not joins(node):
                close()
            launches.append(node.id)
            open_ = not node.barrier
            if not open_:
                close()
        elif open_ and _movable(node) and joins(node):
            plains.append(node.id)
        else:
            close()
    close()

    _logger.debug("Schedule: %s", [g.launches for g in groups])
    return Schedule(groups, [n.stmt for n in cfg.nodes])


def sync_schedule(cfg: Cfg) -> Schedule:
    """The synchronous schedule: every launch alone, followed by a barrier."""
    groups = [ConcurrentGroup((n.id,)) for n in cfg.launches()]
    return Schedule(groups, [n.stmt for n in cfg.nodes])


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
