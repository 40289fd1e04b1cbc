"""Exception taxonomy shared by every module.

Two broad families matter to callers: DataError (bad or missing input,
CLI exit code 2) and NumericalError (a fit or calibration failed to
converge, CLI exit code 3). Everything else is a plain usage bug and
surfaces as ValueError/TypeError from the offending call.
"""


class CascadekitError(Exception):
    """Base class for all package-specific errors."""


class DataError(CascadekitError):
    """Input data is malformed, missing, or violates a documented precondition."""


class ParseError(DataError):
    """A text input could not be parsed. Carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingInputError(DataError):
    """A referenced file or resource does not exist."""


class ValidationError(DataError):
    """Structurally valid input with inconsistent content."""


class StratificationError(DataError):
    """A class is too small to stratify across the requested partitions."""


class EmptyRegionError(DataError):
    """A mask selects no pixels."""


class ShapeMismatchError(DataError):
    """Image, mask, or feature dimensions disagree."""


class DegenerateTextureError(DataError):
    """The masked region contains no valid co-occurring pixel pair."""


class NumericalError(CascadekitError):
    """A numerical procedure failed; carries enough context to diagnose."""


class ConvergenceError(NumericalError):
    """An iterative fit hit its iteration cap. Carries the residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CalibrationError(NumericalError):
    """Probability calibration is impossible on the given data."""


class CouplingError(NumericalError):
    """The pairwise-probability coupling system could not be solved."""


class TrainingError(DataError):
    """Training preconditions violated (e.g. a class absent from the split)."""


class CalibrationMismatchError(ValidationError):
    """Assignments were binned with a different bin count than the histogram."""


class AdapterError(CascadekitError):
    """The external classifier process failed (crash, protocol break, timeout)."""


class RoutingError(CascadekitError):
    """Routing aborted mid-batch. Carries partial outcomes for the samples
    that were never routed (their fast-stage labels remain valid)."""

    def __init__(self, message, partial=None, failed_ids=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []
        self.failed_ids = failed_ids if failed_ids is not None else []
