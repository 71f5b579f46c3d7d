"""Collection of small basic utilities."""

from __future__ import annotations

from collections.abc import Iterable
from typing import TypeVar

_T = TypeVar("_T")


def to_tuple(x: Iterable[_T], /) -> tuple[_T, ...]:
    """Convert an iterable into a tuple (used as attrs converter)."""
    return x if isinstance(x, tuple) else tuple(x)


def ceil_div(a: int, b: int, /) -> int:
    """Integer division rounding towards positive infinity.

    Example:
        >>> ceil_div(7, 2), ceil_div(8, 2), ceil_div(0, 3)
        (4, 4, 0)
    """
    return -(-a // b)
