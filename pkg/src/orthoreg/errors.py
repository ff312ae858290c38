"""Exception types shared across the package."""


class OrthoregError(Exception):
    """Base class for all orthoreg errors."""


class NotSymmetric(OrthoregError):
    """Matrix handed to a symmetric eigensolver is not symmetric."""


class NoConvergence(OrthoregError):
    """Jacobi sweeps hit the cap before reaching the off-diagonal tolerance."""


class ZeroIterate(OrthoregError):
    """Power iteration collapsed to (numerically) zero; callers treat sigma as 0."""


class ZeroColumn(OrthoregError):
    """Mutual coherence is undefined for matrices with a zero column."""


class BudgetExceeded(OrthoregError):
    """Subset enumeration exceeded its combinatorial budget.

    Carries the best lower bound computed before the cap was hit. ``partial``
    is that bound, ``evaluated`` the number of subsets actually scored.
    """

    def __init__(self, message, partial=0.0, evaluated=0):
        super().__init__(message)
        self.partial = partial
        self.evaluated = evaluated


class ShapeMismatch(OrthoregError):
    """Batch or layer shapes are incompatible."""


class NonFiniteLoss(OrthoregError):
    """Training produced a non-finite loss; carries the partial record."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class ParseError(OrthoregError):
    """A CSV cell failed to parse; reports 1-indexed row and column."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class LabelRange(OrthoregError):
    """Dataset labels are not contiguous integers starting at 0."""


class TooFewExamples(OrthoregError):
    """A class has too few examples to split."""


class CenterPlacementFailure(OrthoregError):
    """Rejection sampling could not place blob centers far enough apart."""


class MatrixFileError(OrthoregError):
    """A matrix file (MATF or CSV) is unreadable or malformed."""


class ConfigError(OrthoregError):
    """A run configuration file is invalid; names the offending key."""
