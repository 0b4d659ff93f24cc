"""Exception hierarchy shared by every module.

Each class corresponds to one failure kind so callers (and the CLI) can map
them to diagnostics without string matching.
"""


class BohrError(Exception):
    """Base class for all errors raised by bohrcheck."""


class ShapeMismatch(BohrError, ValueError):
    pass


class NonSquare(ShapeMismatch):
    pass


class NotHermitian(BohrError, ValueError):
    pass


class NotSymmetric(NotHermitian):
    pass


class NoConvergence(BohrError, ArithmeticError):
    pass


class DomainError(BohrError, ValueError):
    """A matrix function was applied outside the domain of its scalar function."""


class BadParam(BohrError, ValueError):
    pass


class ConditionViolated(BohrError, ValueError):
    """A theorem hypothesis does not hold for the supplied instance."""


class NotUnital(ConditionViolated):
    pass


class TooLarge(BohrError, ValueError):
    pass


class GenerationFailed(BohrError, RuntimeError):
    pass


class UnknownCheck(BohrError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ParseError(BohrError, ValueError):
    pass


class ValidationError(BohrError, ValueError):
    pass
