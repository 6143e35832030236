"""Exception types shared across the package."""


class PrrError(Exception):
    """Base class for every error raised by prrtail."""


# algebra
class ExponentOverflow(PrrError):
    pass


class NonMonomialLogSubstitution(PrrError):
    pass


class UnboundSymbol(PrrError):
    pass


class NonPositiveValue(PrrError):
    pass


class ZeroPolynomial(PrrError):
    pass


class MixedSymbols(PrrError):
    pass


class ScanCapExceeded(PrrError):
    pass


# front end
class LRecSyntaxError(PrrError):
    def __init__(self, line, col, expected, found=None):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"line {line}, col {col}: expected {expected}"
        if found is not None:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnboundVariable(PrrError):
    pass


class MultipleProcedures(PrrError):
    pass


# analysis
class StrengtheningFailure(PrrError):
    pass


class NonPositiveW(StrengtheningFailure):
    pass


class NoBoundFound(PrrError):
    pass


class DivergentRecurrence(PrrError):
    pass


class EmptySupport(PrrError):
    pass


class DegenerateInterval(PrrError):
    pass


# simulation
class StepCapExceeded(PrrError):
    pass


class SizeRangeViolationError(PrrError):
    pass


class UnsupportedShape(PrrError):
    pass


class StateExplosion(PrrError):
    pass


class MissingReference(PrrError):
    pass
