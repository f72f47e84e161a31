"""Exception hierarchy shared by every module."""


class GrooveGaitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidQueryError(GrooveGaitError, ValueError):
    """A geometric query was issued outside its domain."""


class OutOfRangeError(GrooveGaitError, ValueError):
    pass


class DegenerateStateError(GrooveGaitError):
    """Both feet coincide, so the body axis is undefined."""

    def __init__(self, message, cycle_index=None):
        if cycle_index is not None:
            message = f"{message} (cycle {cycle_index})"
        super().__init__(message)
        self.cycle_index = cycle_index


class ArityError(GrooveGaitError, ValueError):
    """Wrong number of free parameters for the chosen optimizer."""


class GeometryError(GrooveGaitError, ValueError):
    pass


class ParseError(GrooveGaitError, ValueError):
    """Malformed input file; carries the offending line when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.message = message
        self.path = path
        self.line = line
