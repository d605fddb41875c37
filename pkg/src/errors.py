"""Exceptions raised by the benchmarking tool.

Every exception carries the process exit code the command-line front end
returns when it escapes a command.
"""


class QRBPNError(Exception):
    """Base class for all tool errors."""

    exit_code: int = 1


class InvalidArgumentError(QRBPNError, ValueError):
    """An operation was called outside its preconditions."""

    exit_code = 2


class InsufficientDataError(QRBPNError):
    """Too few points to fit inside a window."""

    def __init__(self, window: tuple[float, float], found: int):
        self.window = window
        self.found = found
        super().__init__(
            f"fit window [{window[0]}, {window[1]}] holds {found} point(s); at least 2 are required"
        )


class ConsistencyError(QRBPNError):
    """An internal numerical check failed."""


class ConfigError(QRBPNError):
    exit_code = 2


class SchemaError(QRBPNError):
    exit_code = 3


class DataIntegrityError(QRBPNError):
    """Imported data does not match what was exported."""

    exit_code = 4

    def __init__(self, message: str, cells: list[str] | None = None):
        self.cells = cells or []
        if self.cells:
            shown = ", ".join(self.cells[:20])
            more = f" (+{len(self.cells) - 20} more)" if len(self.cells) > 20 else ""
            message = f"{message}: {shown}{more}"
        super().__init__(message)
