"""Exception types shared across the package."""


class DomlearnError(Exception):
    """Base class for all domlearn errors."""


class EmptyEstimate(DomlearnError):
    """A domain estimate ended up with no active grid points."""


class CapacityExceeded(DomlearnError):
    """An index set grew past the configured size bound."""


class RankDeficient(DomlearnError):
    """Basis columns are (numerically) dependent on the current point set."""


class ZeroChristoffel(DomlearnError):
    """The normalized reciprocal Christoffel function vanished at an active point."""


class UnknownFunction(DomlearnError):
    """Requested built-in test function id is not one of 1..4."""


class SampleOutsideEstimate(DomlearnError):
    """A sample index is not contained in the estimate the fit was built on."""


class Underdetermined(DomlearnError):
    """Fewer samples than basis functions in a least-squares fit."""


class RedrawLimit(DomlearnError):
    """Rejection sampling exhausted the per-slot redraw budget."""


class ZeroNorm(DomlearnError):
    """Relative error is undefined because the reference function has zero norm."""


class EmptyTrueDomain(DomlearnError):
    """The discrete true domain contains no grid points."""


class SchemaMismatch(DomlearnError):
    """A results file does not match the expected column schema."""
