"""AST-to-AST rewrites between processing modes."""

from polyfal.transforms.base import ChainedTransform, Transform, TransformReport
from polyfal.transforms.pipeline import Mode, apply_mode
from polyfal.transforms.vertex_edge import (
    EdgeToVertex,
    VertexToEdge,
    edge_to_vertex,
    vertex_to_edge,
)
from polyfal.transforms.worklist import ToWorklist, to_worklist

__all__ = [
    "ChainedTransform",
    "EdgeToVertex",
    "Mode",
    "ToWorklist",
    "Transform",
    "TransformReport",
    "VertexToEdge",
    "apply_mode",
    "edge_to_vertex",
    "to_worklist",
    "vertex_to_edge",
]
