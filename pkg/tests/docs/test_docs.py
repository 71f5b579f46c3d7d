"""Test the code provided in the docs."""

import os
import shutil
import subprocess
from pathlib import Path
from tempfile import NamedTemporaryFile
from unittest import mock

import pytest

from polyfal.cli.main import build_parser
from tests.docs.utils import extract_code_blocks

ROOT = Path(__file__).parents[2]

doc_files = [ROOT / "README.md", *sorted((ROOT / "docs" / "userguide").glob("*.md"))]
"""Files whose code blocks are to be checked."""

_ids = [f.name for f in doc_files]


@pytest.mark.parametrize("file", doc_files, ids=_ids)
def test_code_executability(file: Path):
    """The code blocks in the file become a valid python script when concatenated."""
    code = "\n".join(extract_code_blocks(file))
    namespace = {"__builtins__": __builtins__}
    with mock.patch.dict(os.environ):
        exec(code, namespace, namespace)


@pytest.mark.parametrize("file", doc_files, ids=_ids)
def test_documented_commands_parse(file: Path):
    """Every documented ``polyfal`` call is accepted by the argument parser."""
    parser = build_parser()
    for block in extract_code_blocks(file, "bash"):
        for line in block.splitlines():
            if line.startswith("polyfal "):
                parser.parse_args(line.split()[1:])


@pytest.mark.skipif(shutil.which("ruff") is None, reason="ruff is not installed.")
@pytest.mark.parametrize("file", doc_files, ids=_ids)
def test_code_format(file: Path):
    """The code blocks in the file are properly formatted.

    If it fails, run `pytest` with the `-s` flag to show the necessary format changes.
    """
    success = True
    for block in extract_code_blocks(file):
        with NamedTemporaryFile("w+", suffix=".py") as f:
            f.write(block)
            f.write("\n")  # the code blocks contain no empty line at the end
            f.flush()
            result = subprocess.run(
                ["ruff", "format", "--diff", f.name],
                check=False,
                capture_output=True,
                text=True,
            )
            if result.returncode:
                success = False
                print(result.stdout)
    assert success
