"""Exception types shared across the package."""


class SymGraphError(Exception):
    """Base class for all errors raised by symgraph."""


class DegreeMismatch(SymGraphError, ValueError):
    pass


class NotAPermutation(SymGraphError, ValueError):
    pass


class ArithmeticOverflow(SymGraphError, ArithmeticError):
    pass


class ScanBudgetExceeded(SymGraphError):
    pass


class NotASubgroup(SymGraphError, ValueError):
    pass


class UnsupportedConstruction(SymGraphError, ValueError):
    pass


class UnknownGroup(SymGraphError, KeyError):
    pass


class OrderMismatch(SymGraphError):
    pass


class AmbientTooLarge(SymGraphError):
    pass


class PreconditionN7(SymGraphError):
    pass


class TooLarge(SymGraphError):
    pass


class StabilizerOrderNotDivisibleBy7(SymGraphError, ValueError):
    pass


class InvolutionConditionFailed(SymGraphError, ValueError):
    pass


class VertexBudgetExceeded(SymGraphError):
    pass


class Irregular(SymGraphError):
    pass


class NotSemiregular(SymGraphError):
    pass


class FewerThanThreeOrbits(SymGraphError):
    pass


class UnknownClaim(SymGraphError, KeyError):
    pass
