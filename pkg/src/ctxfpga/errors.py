"""Exception hierarchy shared by every layer of the toolkit.

Each class carries the process exit code the CLI maps it to.
"""

from __future__ import annotations


class CtxFpgaError(Exception):
    exit_code = 1


class UsageError(CtxFpgaError):
    exit_code = 2


class ParseError(CtxFpgaError):
    """Malformed input text. ``line`` is 1-based when known."""

    exit_code = 3

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ValidationError(ParseError):
    """Well-formed input that violates a model invariant; ``field`` names the culprit."""

    def __init__(self, message: str, field: str | None = None, **kw):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message, **kw)


class DomainError(CtxFpgaError, ValueError):
    exit_code = 2


class DimensionError(CtxFpgaError, ValueError):
    exit_code = 2


class LookupFailure(CtxFpgaError, KeyError):
    exit_code = 3

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class CycleError(ParseError):
    def __init__(self, cycle: list[str], **kw):
        self.cycle = cycle
        super().__init__("combinational cycle: " + " -> ".join(cycle), **kw)


class CadError(CtxFpgaError):
    exit_code = 4
    stage = "cad"


class ResourceError(CadError):
    stage = "pack/place"


class CongestionError(CadError):
    stage = "route"

    def __init__(self, message: str, max_overuse: int):
        self.max_overuse = max_overuse
        super().__init__(f"{message} (max overuse {max_overuse})")


class NotReadyError(CtxFpgaError):
    exit_code = 5


class ContextInUseError(CtxFpgaError):
    exit_code = 6


class ModeError(CtxFpgaError, ValueError):
    exit_code = 2
