"""Error vocabulary shared by every module.

Each class names one failure condition; the CLI serializes the class name
verbatim as the ``kind`` field of its machine-readable error output.
"""


class FateError(Exception):
    """Base class for all errors raised by this package."""

    @property
    def kind(self) -> str:
        return type(self).__name__


# -- numeric core ------------------------------------------------------------

class NotSymmetric(FateError):
    """Matrix expected to be symmetric is not (beyond tolerance)."""


class IndefiniteBeyondJitter(FateError):
    """Matrix has an eigenvalue more negative than the allowed jitter."""


class NoConvergence(FateError):
    """An iterative eigenvalue routine failed to converge."""


class NotPositiveDefinite(FateError):
    """Matrix required to be positive definite fails the check."""


class ShapeMismatch(FateError):
    """Operands have incompatible shapes."""


class DimensionMismatch(FateError):
    """Stored basis and supplied data disagree on dimensionality."""


class RankDeficient(FateError):
    """Column rank collapsed below tolerance."""


# -- configuration / input --------------------------------------------------

class BadConfig(FateError):
    """A configuration value is out of its documented domain."""


class EmptyInput(FateError):
    """An operation received zero rows."""


class LabelOutOfRange(FateError):
    """A label lies outside [0, num_classes) or is not integral."""


class EmptyClass(FateError):
    """A conditioning class has no rows."""


class SingleClass(FateError):
    """Fewer than two distinct classes where at least two are required."""


class EmptyGroup(FateError):
    """A compared group (or group-within-class cell) has no rows."""


class RankTooHigh(FateError):
    """Requested encoder rank exceeds what the factors can support."""


# -- training ----------------------------------------------------------------

class DivergenceDetected(FateError):
    """Training produced a non-finite objective or parameter."""


class DegenerateBatch(FateError):
    """A minibatch lacks the rows a required conditioning slice needs."""


# -- data --------------------------------------------------------------------

class MissingColumn(FateError):
    """A named column is absent from the file."""


class ParseError(FateError):
    """A cell or record could not be parsed."""


class EmptyFile(FateError):
    """File contains no data rows."""


class DegenerateColumn(FateError):
    """Column is constant and cannot be discretized."""


class BadSpec(FateError):
    """Synthetic-data specification is out of domain."""


class RowCountMismatch(FateError):
    """Two files that must align row-for-row do not."""


# -- curves / CLI ------------------------------------------------------------

class EmptyCurve(FateError):
    """A trade-off curve has no points."""


class SchemaError(FateError):
    """A curve JSON document does not match the expected schema."""


class IoError(FateError):
    """Underlying I/O failed."""


class PartialFailure(FateError):
    """Some sweep jobs failed; partial results are available."""

    def __init__(self, message: str, *, failures: list | None = None):
        super().__init__(message)
        self.failures = failures or []
