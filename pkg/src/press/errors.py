"""Exception hierarchy shared by the library and the CLI."""


class PressError(Exception):
    """Base class for all library errors."""


class FormatError(PressError, ValueError):
    """A text or binary document does not follow its format."""

    def __init__(self, message, line=None, source=None):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.source = source


class NetworkError(PressError, ValueError):
    """Invalid road network or reference to a missing edge."""


class UnreachableError(PressError, ValueError):
    """Two edges have no connecting path."""


class TrajectoryError(PressError, ValueError):
    """A trajectory or temporal sequence violates its invariants."""


class CorruptStreamError(PressError, ValueError):
    """A compressed bitstream does not decode cleanly."""


class ModelMismatchError(PressError):
    """A file was produced with a different model or network."""
