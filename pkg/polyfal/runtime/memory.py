"""Host and device memories holding properties and global variables."""

from __future__ import annotations

import gc
from typing import Any

import numpy as np
from attrs import define, field

from polyfal.exceptions import DslRuntimeError
from polyfal.runtime.store import GraphStore
from polyfal.semantic.symbols import ElementKind

PropertyKey = tuple[str, str]
"""A property as ``(graph, property)``."""

PROPERTY_DTYPES = {
    "int": np.int64,
    "bool": np.int64,
    "Point": np.int64,
    "float": np.float64,
}
"""Array element types of the property value types."""


@define(frozen=True)
class PropertyDecl:
    """A dynamic property declared by ``addPointProperty``/``addEdgeProperty``."""

    graph: str
    name: str
    element: ElementKind
    dtype: type

    @property
    def key(self) -> PropertyKey:
        return (self.graph, self.name)

    def allocate(self, store: GraphStore) -> np.ndarray:
        """A zero-filled array for the elements of ``store``."""
        size = store.n if self.element is ElementKind.POINT else store.m
        return np.zeros(size, dtype=self.dtype)


@define(eq=False)
class Memory:
    """One address space: the host or a simulated device.

    Graph topologies, sets and collections are not part of a memory. They are
    shared by all address spaces and only charged for when transferred.
    """

    label: str = field(default="host")
    globals: dict[str, Any] = field(factory=dict)
    props: dict[PropertyKey, np.ndarray] = field(factory=dict, repr=False)

    def prop(self, graph: str, name: str) -> np.ndarray:
        """The array of a property.

        Raises:
            DslRuntimeError: If the property does not exist in this memory.
        """
        try:
            return self.props[(graph, name)]
        except KeyError:
            raise DslRuntimeError(
                f"Property '{name}' of graph '{graph}' is used before it is "
                f"declared and the graph is read ({self.label})."
            ) from None


def split_object(name: str) -> tuple[str, str | None]:
    """Split a transferable object name into graph and property.

    Example:
        >>> split_object("graph.dist"), split_object("lev")
        (('graph', 'dist'), ('lev', None))
    """
    head, _, prop = name.partition(".")
    return head, prop or None


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
