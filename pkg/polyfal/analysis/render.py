"""Textual rendering of control-flow graphs."""

from __future__ import annotations

from polyfal.analysis.cfg import Cfg


def render_cfg(cfg: Cfg) -> str:
    """Render a CFG, one node per line.

    Each line reads ``id kind barrier pred_count -> successors R{...} W{...}``,
    with sets in sorted order.

    Example:
        >>> from polyfal.analysis.cfg import Cfg, CfgNode
        >>> print(render_cfg(Cfg([CfgNode(0, None)])), end="")
        0 PLAIN 0 0 -> R{} W{}
    """
    lines = []
    for node in cfg.nodes:
        barrier = int(node.barrier)
        head = f"{node.id} {node.kind.value} {barrier} {node.predecessor_count}"
        successors = ",".join(str(s) for s in node.successors)
        sets = f"R{node.rset.render()} W{node.wset.render()}"
        lines.append(" ".join(p for p in (head, "->", successors, sets) if p))
    return "".join(f"{line}\n" for line in lines)
