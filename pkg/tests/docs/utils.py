"""Utilities for doc testing."""

import re
from pathlib import Path
from textwrap import dedent


def extract_code_blocks(path: str | Path, language: str = "python") -> list[str]:
    """Extract all code blocks of a language from a markdown file."""
    contents = Path(path).read_text(encoding="utf-8")
    pattern = rf"```{language}\n(.*?)\n\s*```"
    return [dedent(c) for c in re.findall(pattern, contents, flags=re.DOTALL)]
