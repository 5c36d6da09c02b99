"""Exception types shared across the package."""


class WalksError(Exception):
    """Base class for all library errors."""


class DegenerateModel(WalksError):
    pass


class NonMonomialGroup(WalksError):
    pass


class EndpointOutsideRegion(WalksError):
    pass


class StartOutsideC(WalksError):
    pass


class BadPrime(WalksError):
    pass


class InsufficientModulus(WalksError):
    pass


class DivisionByNonUnit(WalksError, ZeroDivisionError):
    pass


class NonSquareConstantTerm(WalksError):
    pass


class BranchNotSeparated(WalksError):
    pass


class NoFormalSolution(WalksError):
    pass


class ValuationTooLow(WalksError):
    pass


class ZeroSubstitutionIntoNegativePower(WalksError, ZeroDivisionError):
    pass


class SingularEvaluationPoint(WalksError):
    pass


class NoCandidate(WalksError):
    pass


class SequenceTooShort(WalksError):
    pass
