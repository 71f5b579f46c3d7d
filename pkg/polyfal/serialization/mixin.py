"""Serialization mixin class."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, TypeVar

from polyfal.serialization.core import _add_type_to_dict, converter

_T = TypeVar("_T", bound="SerialMixin")


class SerialMixin:
    """A mixin class providing dictionary and JSON round-tripping via the converter."""

    # Use slots so that derived attrs classes also remain slotted
    __slots__ = ()

    def to_dict(self) -> dict:
        """Create the object's dictionary representation, tagged with its type."""
        return _add_type_to_dict(converter.unstructure(self), self.__class__.__name__)

    @classmethod
    def from_dict(cls: type[_T], dictionary: dict) -> _T:
        """Create an object from its dictionary representation.

        A ``type`` entry, if present, must name the class itself.

        Args:
            dictionary: The dictionary representation.

        Raises:
            ValueError: If the dictionary is tagged with a different type.

        Returns:
            The reconstructed object.
        """
        dictionary = dict(dictionary)
        if (type_ := dictionary.pop("type", cls.__name__)) != cls.__name__:
            raise ValueError(
                f"Cannot create a '{cls.__name__}' from a dictionary describing a "
                f"'{type_}'."
            )
        return converter.structure(dictionary, cls)

    def to_json(self, path: str | Path | None = None, /, **kwargs: Any) -> str:
        """Create the object's JSON representation and optionally write it to a file.

        Args:
            path: An optional file path the JSON text is written to.
            **kwargs: Additional keyword arguments passed to :func:`json.dumps`.

        Returns:
            The JSON representation as a string.
        """
        string = json.dumps(self.to_dict(), **kwargs)
        if path is not None:
            Path(path).write_text(string, encoding="utf-8")
        return string

    @classmethod
    def from_json(cls: type[_T], source: str | Path, /) -> _T:
        """Create an object from a JSON string or from the path of a JSON file."""
        if isinstance(source, Path) or (
            not source.lstrip().startswith("{") and Path(source).is_file()
        ):
            source = Path(source).read_text(encoding="utf-8")
        return cls.from_dict(json.loads(source))
