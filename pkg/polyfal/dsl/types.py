"""The DSL type system."""

from __future__ import annotations

import gc
from enum import Enum

from attrs import define, field
from attrs.validators import instance_of, optional


class TypeKind(Enum):
    """Enumeration of the DSL value types."""

    INT = "int"
    """64-bit signed integer."""

    FLOAT = "float"
    """Double precision float."""

    BOOL = "bool"
    """Truth value (stored as 0/1)."""

    VOID = "void"
    """Return type of functions without result."""

    GRAPH = "Graph"
    """A graph with CSR and edge-list storage."""

    POINT = "Point"
    """A vertex of a graph."""

    EDGE = "Edge"
    """An edge of a graph."""

    SET = "Set"
    """A union-find set over the points of a graph."""

    COLLECTION = "Collection"
    """A dynamic bag of points (used as worklist)."""

    PROPERTY = "PropertyHandle"
    """The name argument of ``addPointProperty``/``addEdgeProperty``."""

    TYPENAME = "TypeName"
    """A type keyword used as method argument (``addPointProperty(dist, int)``)."""

    ARGV = "argv"
    """The command-line argument vector of ``main``."""

    STRING = "string"
    """An element of the argument vector."""


@define(frozen=True)
class DslType:
    """A DSL type, optionally bound to the graph variable its values belong to."""

    kind: TypeKind = field(validator=instance_of(TypeKind))
    """The type constructor."""

    graph: str | None = field(default=None, validator=optional(instance_of(str)))
    """For Point/Edge/Set/Collection: the graph variable the value belongs to."""

    @property
    def is_numeric(self) -> bool:
        """Whether values of this type take part in arithmetic."""
        return self.kind in (TypeKind.INT, TypeKind.FLOAT, TypeKind.BOOL)

    @property
    def is_graph_element(self) -> bool:
        """Whether values of this type are elements of a graph."""
        return self.kind in (TypeKind.POINT, TypeKind.EDGE)

    @property
    def is_container(self) -> bool:
        """Whether values of this type are shared containers."""
        return self.kind in (TypeKind.SET, TypeKind.COLLECTION)

    def bound_to(self, graph: str | None) -> DslType:
        """Return the same type bound to another graph variable."""
        return DslType(self.kind, graph)

    def render(self) -> str:
        """Render the type as it appears in declarations."""
        if self.kind is TypeKind.COLLECTION:
            return "Collection<Point>"
        return self.kind.value

    def accepts(self, other: DslType) -> bool:
        """Whether a value of type ``other`` can be stored in a slot of this type."""
        if self.is_numeric and other.is_numeric:
            return self.kind is TypeKind.FLOAT or other.kind is not TypeKind.FLOAT
        return self.kind is other.kind


INT = DslType(TypeKind.INT)
FLOAT = DslType(TypeKind.FLOAT)
BOOL = DslType(TypeKind.BOOL)
VOID = DslType(TypeKind.VOID)
GRAPH = DslType(TypeKind.GRAPH)

PROPERTY_VALUE_TYPES = {"int": INT, "float": FLOAT, "bool": BOOL}
"""Types allowed for dynamic properties, keyed by their keyword."""

# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
