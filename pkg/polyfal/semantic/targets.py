"""Identification of target functions, the units lowered to parallel kernels."""

from __future__ import annotations

import gc
from collections.abc import Iterator

from attrs import define, field
from attrs.validators import instance_of

from polyfal.dsl.ast import Call, Foreach, FunctionDecl, Program, Stmt
from polyfal.semantic.access import AccessAnalyzer, AccessSet, call_mapping


def launched_function(stmt: Stmt, program: Program) -> FunctionDecl | None:
    """Return the target function if the statement is a kernel launch.

    A kernel launch is a ``foreach`` whose body consists of exactly one call of a
    user function.
    """
    if not isinstance(stmt, Foreach):
        return None
    call = stmt.launch_call
    if call is None:
        return None
    fn = program.function(call.func)
    return None if fn is None or fn.name == "main" else fn


def iter_launches(program: Program) -> Iterator[tuple[FunctionDecl, Foreach]]:
    """Iterate over all kernel launches as (enclosing function, launch) pairs."""
    for fn in program.all_functions:
        for node in fn.body.walk():
            if isinstance(node, Foreach) and launched_function(node, program):
                yield fn, node


@define(frozen=True)
class TargetFunctionInfo:
    """A target function together with one of its launches."""

    function: str = field(validator=instance_of(str))
    """The name of the called function."""

    host: str = field(validator=instance_of(str))
    """The name of the function containing the launch."""

    call_site: Foreach = field(validator=instance_of(Foreach))
    """The launching ``foreach`` statement."""

    read_set: AccessSet = field(validator=instance_of(AccessSet))
    """Reads of the called function, instantiated at the call site."""

    write_set: AccessSet = field(validator=instance_of(AccessSet))
    """Writes of the called function, instantiated at the call site."""

    @property
    def outer(self) -> bool:
        """Whether the launch iterates a whole graph outside any other ``foreach``."""
        return self.call_site.outer

    @property
    def call(self) -> Call:
        """The call forming the body of the launch."""
        call = self.call_site.launch_call
        assert call is not None
        return call


def find_target_functions(program: Program) -> list[TargetFunctionInfo]:
    """Find every kernel launch of a resolved program.

    Args:
        program: The resolved program.

    Returns:
        One entry per launching ``foreach``, in source order. The sets exclude the
        launch's filter, which belongs to the launch itself.
    """
    analyzer = AccessAnalyzer(program)
    infos = []
    for host, launch in iter_launches(program):
        call = launch.launch_call
        assert call is not None
        fn = program.function(call.func)
        assert fn is not None
        read, write = analyzer.function_sets(fn)
        mapping = call_mapping(fn, call.args)
        infos.append(
            TargetFunctionInfo(
                fn.name,
                host.name,
                launch,
                read.instantiate(mapping),
                write.instantiate(mapping),
            )
        )
    return infos


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
