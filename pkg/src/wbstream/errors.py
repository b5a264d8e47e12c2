"""Exception hierarchy shared by every module."""


class WbStreamError(Exception):
    """Base class for all library errors."""


class ParameterError(WbStreamError, ValueError):
    pass


class UpdateError(WbStreamError, IndexError):
    """A stream update does not fit the sketch shape or delta cap."""


class SketchStateError(WbStreamError, RuntimeError):
    """Frozen sketch written to, or paired sketches that saw different streams."""


class MergeError(WbStreamError, ValueError):
    pass


class VerifyError(WbStreamError, ValueError):
    pass


class CapacityError(WbStreamError, RuntimeError):
    """Exhaustive search would exceed the desk-scale guard."""


class IntegrityError(WbStreamError, ValueError):
    """Recovered object violates a structural promise of its stream kind."""


class BudgetError(WbStreamError, RuntimeError):
    """An adversary strategy spent more candidate evaluations than allowed."""


class StreamParseError(WbStreamError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BoundsError(StreamParseError):
    """Update index outside the declared shape."""
