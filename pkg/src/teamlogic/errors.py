"""Exception hierarchy shared by all teamlogic modules."""

from __future__ import annotations


class TeamLogicError(Exception):
    """Base class for every error raised by this package."""


class FragmentError(TeamLogicError):
    """A formula uses a connective or atom outside the admissible fragment."""


class ParseError(TeamLogicError):
    """Syntax error with the byte span of the offending input."""

    def __init__(self, message: str, start: int = 0, end: int = 0):
        super().__init__(f"{message} at [{start}:{end}]")
        self.message = message
        self.span = SourceSpan(start, end)


class ModelError(TeamLogicError):
    """Malformed team, Kripke model or relation interpretation."""


class ResourceError(TeamLogicError):
    """A configured resource cap would be exceeded; no verdict is given."""


class ReductionError(TeamLogicError):
    """An input does not have the shape a reduction requires."""


class SourceSpan:
    __slots__ = ("start", "end")

    def __init__(self, start: int, end: int):
        if start > end:
            raise ValueError("span start after end")
        self.start = start
        self.end = end

    def __repr__(self) -> str:
        return f"SourceSpan({self.start}, {self.end})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SourceSpan) and (self.start, self.end) == (other.start, other.end)

    def __hash__(self) -> int:
        return hash((self.start, self.end))
