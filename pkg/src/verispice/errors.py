"""Exception types shared across the pipeline."""

from __future__ import annotations


class VerispiceError(Exception):
    """Base class for all package errors."""


class InputError(VerispiceError):
    """Problem directory or user input is malformed."""


class StorageError(VerispiceError):
    """Workspace persistence failed."""


class ConfigError(VerispiceError):
    """Run configuration is missing or inconsistent."""


class DetectorError(VerispiceError):
    """External detector is unreachable or failed."""


class ParseError(VerispiceError):
    """Netlist or simulator output could not be parsed.

    Carries the offending line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class GrammarError(VerispiceError):
    """Answer expression text does not parse under the closed grammar.

    The message names the position and what was expected, worded so it
    can be sent back to the model verbatim as a correction request.
    """

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class ExtractionError(VerispiceError):
    """Answer expression could not be obtained after a reprompt."""


class ProviderError(VerispiceError):
    """Chat provider failed (transport, auth, or unscripted mock prompt)."""


class ProtocolError(VerispiceError):
    """Model reply violates the expected reply protocol (e.g. not Yes/No)."""


class StateError(VerispiceError):
    """Operation is invalid in the current pipeline or ticket state."""
