"""Thread-safe union-find sets over the points of a graph."""

from __future__ import annotations

import gc
import itertools
import time

from attrs import define, field
from attrs.validators import ge, instance_of

from polyfal.runtime.locks import SingleLock, single_try

_tokens = itertools.count()


@define(eq=False)
class UnionFindSet:
    """A disjoint-set forest with path compression and union by rank.

    ``union`` locks the two roots through a :class:`SingleLock` and retries when
    another thread linked one of them in between. Of two roots of equal rank, the
    one with the smaller id stays root.

    Example:
        >>> s = UnionFindSet(4)
        >>> s.union(0, 1), s.union(1, 0)
        (True, False)
        >>> s.find(1)
        0
    """

    n: int = field(validator=[instance_of(int), ge(0)])
    parent: list[int] = field(init=False, repr=False)
    rank: list[int] = field(init=False, repr=False)
    _lock: SingleLock = field(factory=SingleLock, init=False, repr=False)

    def __attrs_post_init__(self) -> None:
        self.parent = list(range(self.n))
        self.rank = [0] * self.n

    def find(self, a: int) -> int:
        """The root of the tree containing ``a``."""
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``.

        Returns:
            Whether the two points were in different sets.
        """
        token = next(_tokens)
        while True:
            ra, rb = self.find(a), self.find(b)
            if ra == rb:
                return False
            if not single_try(self._lock, [ra, rb], token):
                time.sleep(0)
                continue
            try:
                if self.parent[ra] != ra or self.parent[rb] != rb:
                    continue
                self._link(ra, rb)
                return True
            finally:
                self._lock.release_all(token)

    def _link(self, ra: int, rb: int) -> None:
        rank = self.rank
        if rank[ra] < rank[rb] or (rank[ra] == rank[rb] and rb < ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        if rank[ra] == rank[rb]:
            rank[ra] += 1

    def components(self) -> int:
        """The number of disjoint sets."""
        return sum(1 for i in range(self.n) if self.find(i) == i)


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
