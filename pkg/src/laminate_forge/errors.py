"""Exception types raised across the package."""


class LaminateError(Exception):
    """Base class for every error raised here."""


class NonConvexSplit(LaminateError):
    pass


class BadIndex(LaminateError):
    pass


class RootMismatch(LaminateError):
    pass


class InvalidSetId(LaminateError):
    pass


class AmbiguousMembership(LaminateError):
    pass


class NotInSet(LaminateError):
    pass


class CounterViolation(LaminateError):
    pass


class UnsupportedRegime(LaminateError):
    pass


class RegimeMismatch(LaminateError):
    pass


class MassBoundViolation(LaminateError):
    pass


class InvalidParams(LaminateError):
    pass


class InsufficientPoints(LaminateError):
    pass


class InvariantViolation(LaminateError):
    """A structural identity (barycenter, weight sum, support) failed."""
