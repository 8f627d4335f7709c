"""Exception hierarchy shared across the engine.

The CLI maps these onto its exit-code contract: config/query problems are
validation failures (exit 1), broken input files are input errors (exit 2),
anything else is internal (exit 3).
"""


class LmscubeError(Exception):
    """Base class for all engine errors."""


class DataError(LmscubeError):
    """An input file or record is malformed or inconsistent."""


class ConfigError(LmscubeError):
    """A configuration artifact failed validation."""


class QueryError(LmscubeError):
    """A query is malformed or references unknown coordinates."""

    def __init__(self, message: str, *, unknown_ref: bool = False):
        super().__init__(message)
        self.unknown_ref = unknown_ref
