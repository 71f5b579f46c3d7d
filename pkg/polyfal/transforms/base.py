"""Base classes for program transforms."""

from __future__ import annotations

import gc
from abc import ABC, abstractmethod

from attrs import define, field
from attrs.validators import deep_iterable, instance_of
from typing_extensions import override

from polyfal.dsl.ast import Loc, Program
from polyfal.utils.basic import to_tuple


@define(frozen=True)
class TransformReport:
    """The outcome of applying a transform to a program."""

    transform: str = field(validator=instance_of(str))
    """The name of the transform."""

    applied: bool = field(validator=instance_of(bool))
    """Whether the program was rewritten."""

    rewritten_foreach: tuple[Loc | None, ...] = field(
        factory=tuple, converter=to_tuple
    )
    """Source positions of the rewritten launching ``foreach`` statements."""

    rewritten_functions: tuple[str, ...] = field(
        factory=tuple, converter=to_tuple, validator=deep_iterable(instance_of(str))
    )
    """Names of the rewritten target functions."""

    reason: str = field(default="", validator=instance_of(str))
    """Why the transform was not applied."""

    @reason.validator
    def _validate_reason(self, _, value: str) -> None:  # noqa: DOC101, DOC103
        """Validate that a rejected transform states its reason.

        Raises:
            ValueError: If the transform was not applied and no reason is given.
        """
        if not self.applied and not value:
            raise ValueError("A transform that was not applied must state a reason.")

    @classmethod
    def rejected(cls, transform: str, reason: str) -> TransformReport:
        """Create the report of a transform that left the program unchanged."""
        return cls(transform, False, reason=reason)

    def render(self) -> str:
        """Render the report as a single line."""
        if not self.applied:
            return f"{self.transform}: not applied ({self.reason})"
        functions = ",".join(self.rewritten_functions)
        return f"{self.transform}: applied to [{functions}]"


@define(frozen=True)
class Transform(ABC):
    """Abstract base class for all program transforms.

    A transform maps a program to a rewritten program and a report. If the
    transform is not applicable, the input program is returned unchanged.
    """

    @property
    def name(self) -> str:
        """The name used in reports."""
        return type(self).__name__

    @abstractmethod
    def __call__(self, program: Program, /) -> tuple[Program, TransformReport]:
        """Apply the transform to a parsed program."""

    def chain(self, transform: Transform, /) -> Transform:
        """Chain another transform after the existing one."""
        return ChainedTransform((self, transform))

    def __or__(self, other: Transform, /) -> Transform:
        return self.chain(other)


@define(frozen=True)
class ChainedTransform(Transform):
    """A sequence of transforms applied one after another.

    The chain stops at the first transform that is not applied and returns the
    untouched input program together with that transform's report.
    """

    transforms: tuple[Transform, ...] = field(
        converter=to_tuple, validator=deep_iterable(instance_of(Transform))
    )

    @override
    def __call__(self, program: Program, /) -> tuple[Program, TransformReport]:
        current = program
        applied: list[TransformReport] = []
        for transform in self.transforms:
            current, report = transform(current)
            if not report.applied:
                return program, report
            applied.append(report)
        return current, TransformReport(
            " | ".join(r.transform for r in applied),
            True,
            tuple(loc for r in applied for loc in r.rewritten_foreach),
            tuple(dict.fromkeys(f for r in applied for f in r.rewritten_functions)),
        )


# Collect leftover original slotted classes processed by `attrs.define`
gc.collect()
