"""Exception hierarchy.

Everything raised on bad input derives from :class:`FlagCodesError`, which is
also a :class:`ValueError` so callers that only care about "bad arguments"
can catch that.
"""


class FlagCodesError(ValueError):
    pass


# fields and matrices
class NonPrimeCharacteristic(FlagCodesError):
    pass


class ReducibleModulus(FlagCodesError):
    pass


class DegreeMismatch(FlagCodesError):
    pass


class ShapeMismatch(FlagCodesError):
    pass


class SingularMatrix(FlagCodesError):
    pass


class DependentBasis(FlagCodesError):
    pass


class TooLarge(FlagCodesError):
    """A brute-force or tabulated operation was asked for more than desk scale."""


class DegreeTooLarge(TooLarge):
    pass


# geometry
class AmbientMismatch(FlagCodesError):
    pass


class TypeMismatch(FlagCodesError):
    pass


class NotFullFlag(FlagCodesError):
    pass


# codes
class ParameterMismatch(FlagCodesError):
    pass


class ParameterOutOfRange(FlagCodesError):
    pass


class EmptyDistance(FlagCodesError):
    pass


class NotAGroup(FlagCodesError):
    pass


# channel and decoding
class CapacityExceeded(FlagCodesError):
    pass


class RetryLimitExceeded(FlagCodesError):
    pass


class LengthMismatch(FlagCodesError):
    pass


class EmptyCode(FlagCodesError):
    pass


class RunTooLong(FlagCodesError):
    pass


class InconsistentInput(FlagCodesError):
    pass


class ParseError(FlagCodesError):
    pass
