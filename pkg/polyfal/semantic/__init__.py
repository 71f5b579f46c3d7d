"""Name resolution, target-function discovery and read/write-set analysis."""

from polyfal.semantic.access import (
    AccessSet,
    compute_rw_sets,
    compute_stmt_rw_sets,
)
from polyfal.semantic.resolver import resolve
from polyfal.semantic.symbols import PropertyInfo, Symbol, SymbolTable
from polyfal.semantic.targets import TargetFunctionInfo, find_target_functions

__all__ = [
    "AccessSet",
    "PropertyInfo",
    "Symbol",
    "SymbolTable",
    "TargetFunctionInfo",
    "compute_rw_sets",
    "compute_stmt_rw_sets",
    "find_target_functions",
    "resolve",
]
