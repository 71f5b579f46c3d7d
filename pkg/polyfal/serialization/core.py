"""The converter used for settings files and benchmark matrices."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import cattrs
import numpy as np
from cattrs.strategies import configure_union_passthrough

_TYPE_FIELD = "type"
"""The name of the field used to store the type information in serialized objects."""

converter = cattrs.Converter(
    unstruct_collection_overrides={set: sorted, frozenset: sorted}, use_alias=True
)
"""The default converter for (de-)serializing package objects."""


def _add_type_to_dict(dct: dict[str, Any], type_: str, /) -> dict[str, Any]:
    """Safely add type information to an existing dictionary."""
    if _TYPE_FIELD in dct:
        raise ValueError(
            f"Cannot add type information to the dictionary since it already contains "
            f"a '{_TYPE_FIELD}' field."
        )
    return {_TYPE_FIELD: type_, **dct}


# Register custom (un-)structure hooks
configure_union_passthrough(bool | int | float | str, converter)
converter.register_unstructure_hook(Path, str)
converter.register_structure_hook(Path, lambda x, _: Path(x))
converter.register_unstructure_hook(np.integer, int)
converter.register_unstructure_hook(np.floating, float)
