"""Graph files, random graph generators, statistics and reference solutions."""

from polyfal.graphs.generators import RMAT_DEFAULTS, gen_er, gen_rmat
from polyfal.graphs.io import (
    dedupe,
    format_graph,
    parse_graph,
    read_graph,
    symmetrize,
    write_graph,
)
from polyfal.graphs.oracles import (
    ORACLES,
    bfs_levels,
    component_labels,
    mst_weight,
    sssp_distances,
    verify_oracle,
)
from polyfal.graphs.random import Xoshiro256
from polyfal.graphs.stats import GraphStats, stats

__all__ = [
    "ORACLES",
    "RMAT_DEFAULTS",
    "GraphStats",
    "Xoshiro256",
    "bfs_levels",
    "component_labels",
    "dedupe",
    "format_graph",
    "gen_er",
    "gen_rmat",
    "mst_weight",
    "parse_graph",
    "read_graph",
    "sssp_distances",
    "stats",
    "symmetrize",
    "verify_oracle",
    "write_graph",
]
