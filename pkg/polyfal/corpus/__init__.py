"""The shipped DSL programs."""

from importlib.resources import files
from pathlib import Path

CORPUS = (
    "bfs",
    "bfs_edge",
    "sssp",
    "sssp_edge",
    "cc",
    "mst",
    "bfs_sssp",
    "cc_sections",
)
"""Names of the shipped programs."""


def corpus_path(name: str, /) -> Path:
    """Return the path of a shipped program, given with or without extension."""
    stem = name.removesuffix(".fal")
    if stem not in CORPUS:
        raise ValueError(
            f"'{name}' is not a shipped program. Available: {', '.join(CORPUS)}."
        )
    return Path(str(files(__name__) / f"{stem}.fal"))


def corpus_source(name: str, /) -> str:
    """Return the source text of a shipped program."""
    return corpus_path(name).read_text(encoding="utf-8")
