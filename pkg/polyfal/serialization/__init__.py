"""Serialization functionality."""

from polyfal.serialization.core import converter
from polyfal.serialization.mixin import SerialMixin

__all__ = [
    "converter",
    "SerialMixin",
]
