"""Deterministic textual rendering of execution plans."""

from __future__ import annotations

from polyfal.dsl.printer import render_expr, render_stmt
from polyfal.lowering.plan import (
    Branch,
    DeviceAlloc,
    ExecutionPlan,
    HostStmt,
    LaunchGroup,
    Loop,
    PlanStep,
    Sections,
    Transfer,
)

INDENT = "  "


def render_step(step: PlanStep, depth: int = 0) -> list[str]:
    """Render a plan step into indented lines.

    Example:
        >>> print(render_step(DeviceAlloc(0, "graph.dist"))[0])
        ALLOC dev=0 obj=graph.dist
    """
    pad = INDENT * depth
    match step:
        case DeviceAlloc(device=device, obj=obj):
            return [f"{pad}ALLOC dev={device} obj={obj}"]
        case Transfer(device=device, obj=obj, direction=direction, whole=whole):
            return [
                f"{pad}TRANSFER dev={device} obj={obj} dir={direction.value} "
                f"whole={int(whole)}"
            ]
        case HostStmt(stmt=stmt):
            text = " ".join(line.strip() for line in render_stmt(stmt))
            return [f"{pad}HOST {text}"]
        case LaunchGroup():
            kernels = ",".join(step.kernels)
            return [
                f"{pad}LAUNCH dev={step.device_label} group=[{kernels}] "
                f"barrier={int(step.barrier_after)}"
            ]
        case Loop(stmt=stmt, head=head, body=body):
            lines = [f"{pad}LOOP while ({render_expr(stmt.cond)})"]
            if head:
                lines += _block(head, depth + 1)
                lines.append(f"{pad}DO")
            return [*lines, *_block(body, depth + 1), f"{pad}END"]
        case Branch(stmt=stmt, then=then, orelse=orelse):
            lines = [f"{pad}IF ({render_expr(stmt.cond)})", *_block(then, depth + 1)]
            if orelse:
                lines += [f"{pad}ELSE", *_block(orelse, depth + 1)]
            return [*lines, f"{pad}END"]
        case Sections(sections=sections):
            lines = [f"{pad}SECTIONS"]
            for section in sections:
                device = "host" if section.device is None else section.device
                lines.append(f"{INDENT * (depth + 1)}SECTION dev={device}")
                lines += _block(section.steps, depth + 2)
                lines.append(f"{INDENT * (depth + 1)}END")
            return [*lines, f"{pad}END"]
    raise TypeError(f"Cannot render plan step of type '{type(step).__name__}'.")


def _block(steps: tuple[PlanStep, ...], depth: int) -> list[str]:
    return [line for step in steps for line in render_step(step, depth)]


def emit_text(plan: ExecutionPlan) -> str:
    """Render a plan as text, one step per line.

    Nested steps are indented by two spaces and closed by ``END``. The epilogue
    follows an ``EPILOGUE`` line. Every line ends with a line feed, so an empty
    plan renders as the empty string.

    Args:
        plan: The plan to render.

    Returns:
        The rendered plan.
    """
    lines = _block(plan.steps, 0)
    if plan.epilogue:
        lines += ["EPILOGUE", *_block(plan.epilogue, 0)]
    return "".join(f"{line}\n" for line in lines)
