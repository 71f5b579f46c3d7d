"""Locks used by kernels: striped locks for atomics and non-blocking element locks."""

from __future__ import annotations

import gc
import threading
from collections.abc import Hashable, Iterable

from attrs import define, field
from attrs.validators import ge, instance_of

Element = Hashable
"""A lockable element, usually the key ``(graph, kind, id)``."""


@define(eq=False)
class StripedLocks:
    """A fixed pool of mutexes that serializes updates of array elements.

    Element ``i`` is guarded by stripe ``i mod stripes``.
    """

    stripes: int = field(default=64, validator=[instance_of(int), ge(1)])
    _locks: list[threading.Lock] = field(init=False, repr=False)

    def __attrs_post_init__(self) -> None:
        self._locks = [threading.Lock() for _ in range(self.stripes)]

    def __getitem__(self, index: int) -> threading.Lock:
        return self._locks[index % self.stripes]


@define(eq=False)
class SingleLock:
    """Per-element owner words with a non-blocking try-acquire.

    Example:
        >>> lock = SingleLock()
        >>> single_try(lock, [3, 7], owner="a")
        True
        >>> single_try(lock, 7, owner="b")
        False
    """

    _owners: dict[Element, object] = field(factory=dict, init=False, repr=False)
    _guard: threading.Lock = field(factory=threading.Lock, init=False, repr=False)

    def try_acquire(self, element: Element, owner: object) -> bool:
        """Acquire an element unless a different owner holds it."""
        with self._guard:
            current = self._owners.get(element)
            if current is None:
                self._owners[element] = owner
                return True
            return current is owner

    def release(self, element: Element, owner: object) -> None:
        """Release an element if ``owner`` holds it."""
        with self._guard:
            if self._owners.get(element) is owner:
                del self._owners[element]

    def release_all(self, owner: object) -> None:
        """Release every element held by ``owner``."""
        with self._guard:
            for element in [e for e, o in self._owners.items() if o is owner]:
                del self._owners[element]

    def release_owners(self, owners: Iterable[object]) -> None:
        """Release every element held by one of ``owners``."""
        ids = {id(o) for o in owners}
        with self._guard:
            for element in [e for e, o in self._owners.items() if id(o) in ids]:
                del self._owners[element]

    def holder(self, element: Element) -> object | None:
        """The current owner of an element."""
        with self._guard:
            return self._owners.get(element)


def single_try(
    lock: SingleLock, elements: Element | Iterable[Element], owner: object
) -> bool:
    """Try to acquire one element or all elements of a collection.

    Elements are tried in ascending order. If one of them is held by another
    owner, the elements acquired by this call are released again.

    Args:
        lock: The lock table.
        elements: A single element or an iterable of elements. Any iterable
            other than a string, tuples included, is a collection; a composite
            key is locked by wrapping it in a list.
        owner: The token of the caller.

    Returns:
        Whether the caller owns all elements afterwards.

    Raises:
        ValueError: If an empty collection is given.
    """
    if isinstance(elements, str) or not isinstance(elements, Iterable):
        items = [elements]
    else:
        items = sorted(set(elements))
    if not items:
        raise ValueError("'single' needs at least one element.")

    acquired = []
    for element in items:
        already = lock.holder(element) is owner
        if not lock.try_acquire(element, owner):
            for taken in acquired:
                lock.release(taken, owner)
            return False
        if not already:
            acquired.append(element)
    return True


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
