"""Marking of kernel launches that need no barrier."""

from __future__ import annotations

import logging
import sys

from polyfal.analysis.cfg import Cfg, CfgNode, NodeKind

_logger = logging.getLogger(__name__)


def mark_barriers(cfg: Cfg) -> Cfg:
    """Mark the kernel launches that must be followed by a barrier.

    The graph is traversed depth-first from the root while tracking the last
    kernel launch. A launch that conflicts with the tracked kernel puts a barrier
    behind the tracked kernel. A launch that does not conflict absorbs the
    tracked kernel's sets, so later conflicts with either of them are detected.
    A plain statement that conflicts with the tracked kernel puts a barrier
    behind it and ends the tracking. A node passes the traversal on once all its
    counted predecessors have reached it.

    Requires the predecessor counts set by
    :func:`~polyfal.analysis.cfg.count_predecessors`. Launches left with
    ``barrier=False`` are barrier-free.
    """
    for node in cfg.nodes:
        node.visited = 0
        node.barrier = False
        node.rset, node.wset = node.stmt_sets

    def parallelize(node: CfgNode, knode: CfgNode | None) -> None:
        node.visited += 1
        if node.kind is NodeKind.KERNEL_LAUNCH:
            if knode is not None:
                if node.conflicts(knode):
                    knode.barrier = True
                else:
                    node.rset = node.rset | knode.rset
                    node.wset = node.wset | knode.wset
            knode = node
        elif knode is not None and node.conflicts(knode):
            knode.barrier = True
            knode = None
        if node.visited == max(node.predecessor_count, 1):
            for succ in node.successors:
                parallelize(cfg[succ], knode)

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(cfg) + 100))
    try:
        if cfg.nodes:
            parallelize(cfg[cfg.root], None)
    finally:
        sys.setrecursionlimit(limit)

    _logger.debug(
        "Barrier-free launches: %s",
        [n.id for n in cfg.launches() if not n.barrier],
    )
    return cfg
