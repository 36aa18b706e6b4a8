"""Exception types shared across the toolkit.

Plain ``ValueError`` is used for generic bad arguments; the classes here
cover failure modes a caller may want to catch selectively.
"""


class ShiftOutOfBoundsError(ValueError):
    """A requested mask shift exceeds the master mask margin."""


class OperatorTooLargeError(ValueError):
    """Refused to materialize a dense sensing matrix above the size guard."""


class CalibrationDegenerateError(RuntimeError):
    """Too many calibration pixels fall below the division guard."""


class PluginTransportError(RuntimeError):
    """Base class for failures while talking to an external denoiser."""


class PluginTimeoutError(PluginTransportError):
    """The plugin process did not answer within the endpoint timeout."""


class ProtocolViolationError(PluginTransportError):
    """The plugin sent bytes that do not parse as a valid response."""


class PluginError(PluginTransportError):
    """The plugin answered with an explicit error message."""


class SolverAbortedError(RuntimeError):
    """A reconstruction run died mid-iteration (e.g. plugin failure).

    Carries the partial result so callers can inspect the trace up to the
    failing iteration.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
