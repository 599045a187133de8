"""Exception hierarchy shared by every module."""


class QuasiextError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QuasiextError, ValueError):
    """An input violates a declared invariant.

    ``invariant`` names the violated property so callers (the CLI in
    particular) can report it in machine-readable form.
    """

    def __init__(self, invariant, message=None):
        self.invariant = invariant
        super().__init__(message or invariant)


class DimensionMismatch(QuasiextError, ValueError):
    pass


class SingularInput(QuasiextError, ValueError):
    pass


class NearSingular(QuasiextError, ValueError):
    pass


class PatternViolation(QuasiextError, ValueError):
    """A seed matrix lies outside the growth algebra it must belong to."""


class ZeroLambda(QuasiextError, ValueError):
    pass


class OffsetOutOfRange(QuasiextError, ValueError):
    pass


class EmptyWindow(QuasiextError, ValueError):
    pass


class PreconditionViolated(QuasiextError, ValueError):
    pass


class TooLarge(QuasiextError, ValueError):
    pass


class NotNormal(QuasiextError, ValueError):
    pass


class NotQuasinormal(QuasiextError, ValueError):
    pass


class NotLiftable(QuasiextError, ValueError):
    pass


class Unclassifiable(QuasiextError, ValueError):
    pass
