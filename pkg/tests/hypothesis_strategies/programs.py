"""Hypothesis strategies for DSL programs."""

import hypothesis.strategies as st

kernel_names = st.sampled_from(["relax", "push", "visit", "step"])
"""A strategy that generates kernel names."""

point_names = st.sampled_from(["p", "u", "node", "me"])
"""A strategy that generates names of the launched point."""

neighbour_names = st.sampled_from(["t", "w", "nb", "other"])
"""A strategy that generates names of the visited neighbour."""

property_names = st.sampled_from(["dist", "level", "label", "cost"])
"""A strategy that generates point property names."""

directions = st.sampled_from(["outnbrs", "innbrs"])
"""A strategy that generates neighbour iterators."""


@st.composite
def vertex_programs(draw: st.DrawFn):
    """Generate fixpoint programs with one vertex-based kernel.

    Every generated kernel is a single neighbour ``foreach`` that either pushes
    from the launched point to the neighbour or pulls from the neighbour into
    the launched point, which makes it convertible to edges.
    """
    kernel = draw(kernel_names)
    point = draw(point_names)
    neighbour = draw(neighbour_names)
    prop = draw(property_names)
    direction = draw(directions)
    op = draw(st.sampled_from(["MIN", "MAX"]))
    source, target = draw(st.sampled_from([(point, neighbour), (neighbour, point)]))

    weight_args = (point, neighbour) if direction == "outnbrs" else (neighbour, point)
    candidate = draw(
        st.sampled_from(
            [
                f"{source}.{prop}",
                f"{source}.{prop} + 1",
                f"{source}.{prop} + graph.getweight({', '.join(weight_args)})",
            ]
        )
    )
    init = "MAX_INT" if op == "MIN" else "0"
    launch_filter = draw(st.sampled_from(["", f"(t.{prop} != {init}) "]))

    return f"""
int changed = 0;

void {kernel}(Point {point}, Graph graph) {{
    foreach ({neighbour} In {point}.{direction}) {{
        {op}({target}.{prop}, {candidate}, changed);
    }}
}}

int main(int argc, char *argv[]) {{
    Graph graph;
    graph.addPointProperty({prop}, int);
    graph.read(argv[1]);
    foreach (t In graph.points) t.{prop} = {init};
    graph.points[0].{prop} = 1;
    while (1) {{
        changed = 0;
        foreach (t In graph.points) {launch_filter}{kernel}(t, graph);
        if (changed == 0) break;
    }}
    return 0;
}}
"""
