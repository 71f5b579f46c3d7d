"""Environment variables configuring the package."""

import logging
import os

from polyfal.utils.boolean import strtobool

VARNAME_ITERATION_CAP_FACTOR = "POLYFAL_ITERATION_CAP_FACTOR"
"""Environment variable name for the fixpoint iteration cap factor."""

VARNAME_DEFAULT_THREADS = "POLYFAL_DEFAULT_THREADS"
"""Environment variable name for the default worker count."""

VARNAME_PARALLEL_SECTIONS = "POLYFAL_PARALLEL_SECTIONS"
"""Environment variable name for running parallel sections on concurrent threads."""

VARNAME_LOG_LEVEL = "POLYFAL_LOG_LEVEL"
"""Environment variable name for the command-line logging level."""


def iteration_cap_factor() -> int:
    """The factor by which the vertex count is multiplied to get the loop cap."""
    factor = int(os.environ.get(VARNAME_ITERATION_CAP_FACTOR, "10"))
    if factor < 1:
        raise ValueError(
            f"'{VARNAME_ITERATION_CAP_FACTOR}' must be a positive integer. "
            f"Given: {factor}."
        )
    return factor


def default_threads() -> int:
    """The number of workers used when none is requested explicitly."""
    return max(1, int(os.environ.get(VARNAME_DEFAULT_THREADS, "1")))


def parallel_sections() -> bool:
    """Whether parallel sections run on concurrent threads."""
    return strtobool(os.environ.get(VARNAME_PARALLEL_SECTIONS, "True"))


def log_level() -> int:
    """The logging level requested via the environment."""
    name = os.environ.get(VARNAME_LOG_LEVEL, "WARNING").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING
