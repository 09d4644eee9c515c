"""Exception hierarchy.

Guard violations (problem too large for the exact desk-scale algorithms)
derive from GuardExceeded so callers can map them to a distinct exit code.
"""


class PlqError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(PlqError):
    pass


class NonSymmetric(PlqError):
    pass


class NotPSD(PlqError):
    pass


class EmptyPolyhedron(PlqError):
    pass


class UnboundedSet(PlqError):
    pass


class PointNotInSet(PlqError):
    pass


class PointNotFeasible(PlqError):
    pass


class PointNotInDomain(PlqError):
    pass


class OutsideDomain(PlqError):
    pass


class InconsistentPieces(PlqError):
    """Active pieces disagree at a point: the input violates continuity."""


class SampleOutsideCone(PlqError):
    pass


class WrongInertia(PlqError):
    """Matrix does not have exactly one eigenvalue below -tol."""


class InvalidCoefficients(PlqError):
    pass


class InvalidParameter(PlqError):
    pass


class NotUnitEigenvector(PlqError):
    pass


class SecondOrderUnavailable(PlqError):
    pass


class NotCompositeConvexPA(PlqError):
    pass


class AlgorithmFailure(PlqError):
    """Internal iteration cap hit; indicates a bug, not bad input."""


class SchemaError(PlqError):
    """Problem file fails schema validation."""


class GuardExceeded(PlqError):
    """Problem size exceeds a configured guard."""


class TooManyConstraints(GuardExceeded):
    pass


class TooManyPieces(GuardExceeded):
    pass
