"""Symbols, scopes and the property namespace of resolved programs."""

from __future__ import annotations

import gc
from enum import Enum

from attrs import define, field
from attrs.validators import instance_of

from polyfal.dsl.ast import Storage
from polyfal.dsl.types import INT, DslType

SYMBOLIC_PREFIX = "@"
"""Prefix of graph bindings that are only known at a call site."""


def symbolic_graph(param: str, /) -> str:
    """The binding of an unbound graph-element or container parameter.

    Values derived from such a parameter belong to "the graph of whatever
    argument is passed for it", which is fixed only per call site.

    Example:
        >>> symbolic_graph("p")
        '@p'
    """
    return SYMBOLIC_PREFIX + param


def is_symbolic(graph: str | None, /) -> bool:
    """Whether a graph binding is a call-site placeholder."""
    return graph is not None and graph.startswith(SYMBOLIC_PREFIX)


BUILTIN_CONSTANTS: dict[str, tuple[DslType, int]] = {
    "MAX_INT": (INT, 2**31 - 1),
    "MAX_LONG": (INT, 2**62),
}
"""Builtin integer constants with their values."""


class ElementKind(Enum):
    """The graph elements a dynamic property can be attached to."""

    POINT = "point"
    EDGE = "edge"


@define(frozen=True)
class Symbol:
    """A named value visible in some scope."""

    name: str = field(validator=instance_of(str))
    dtype: DslType = field(validator=instance_of(DslType))
    storage: Storage = field(validator=instance_of(Storage))


@define(frozen=True)
class PropertyInfo:
    """A declared dynamic property."""

    graph: str = field(validator=instance_of(str))
    """The graph variable the property was declared on."""

    name: str = field(validator=instance_of(str))
    dtype: DslType = field(validator=instance_of(DslType))
    element: ElementKind = field(validator=instance_of(ElementKind))


@define
class SymbolTable:
    """A scoped map from identifiers to symbols plus the per-graph property namespace.

    The outermost scope holds builtins and globals. Function, block and
    iteration scopes are pushed and popped during resolution; after resolution
    only the outermost scope remains.
    """

    _scopes: list[dict[str, Symbol]] = field(init=False)
    properties: dict[str, dict[str, PropertyInfo]] = field(factory=dict, init=False)
    """Declared properties, keyed by graph variable and property name."""

    def __attrs_post_init__(self) -> None:
        builtins = BUILTIN_CONSTANTS.items()
        self._scopes = [{n: Symbol(n, t, Storage.BUILTIN) for n, (t, _) in builtins}]

    @property
    def depth(self) -> int:
        """The number of open scopes."""
        return len(self._scopes)

    def push(self) -> None:
        """Open a new innermost scope."""
        self._scopes.append({})

    def pop(self) -> None:
        """Close the innermost scope."""
        if len(self._scopes) == 1:
            raise RuntimeError("The outermost scope cannot be closed.")
        self._scopes.pop()

    def declare(self, symbol: Symbol) -> Symbol | None:
        """Declare a symbol in the innermost scope.

        Returns:
            The symbol previously declared under the same name in the innermost
            scope, if any. The new symbol replaces it.
        """
        previous = self._scopes[-1].get(symbol.name)
        self._scopes[-1][symbol.name] = symbol
        return previous

    def lookup(self, name: str) -> Symbol | None:
        """Find the innermost symbol with the given name."""
        for scope in reversed(self._scopes):
            if name in scope:
                return scope[name]
        return None

    @property
    def globals(self) -> dict[str, Symbol]:
        """The global variables."""
        return {
            n: s for n, s in self._scopes[0].items() if s.storage is Storage.GLOBAL
        }

    def declare_property(self, info: PropertyInfo) -> bool:
        """Register a property; return ``False`` if it was already declared."""
        namespace = self.properties.setdefault(info.graph, {})
        if info.name in namespace:
            return False
        namespace[info.name] = info
        return True

    def lookup_property(
        self, graph: str | None, name: str, exact: bool = True
    ) -> PropertyInfo | None:
        """Look up a property through a graph binding.

        With ``exact``, only the namespace of the given graph variable is searched.
        Otherwise (placeholders, graph parameters) the property may live on any
        graph and the first declaration found is returned.
        """
        if exact and graph is not None and not is_symbolic(graph):
            return self.properties.get(graph, {}).get(name)
        for namespace in self.properties.values():
            if name in namespace:
                return namespace[name]
        return None

    def property_names(self, graph: str) -> list[str]:
        """The properties declared on a graph, in declaration order."""
        return list(self.properties.get(graph, {}))


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
