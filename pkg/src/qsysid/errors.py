"""Exception types raised by the library."""


class DegenerateModelError(ValueError):
    """Both Rabi couplings are zero, so the mixing angle is undefined."""


class InsufficientDataError(ValueError):
    """Too few samples for the three-function signal model."""


class UndefinedLikelihoodError(ValueError):
    """The data vector is identically zero."""


class InvalidPartitionError(ValueError):
    """A block partition does not match the operator it is applied to."""


class InputFormatError(ValueError):
    """Malformed CSV or JSON input; the message names the line or field."""


class EstimationFailedError(RuntimeError):
    """Neither the seeded nor the exhaustive path produced an estimate.

    ``diagnostics`` holds whatever was computed before giving up, as a
    JSON-serializable dict.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
