"""Exception types raised across the package."""


class TraderError(Exception):
    """Base class for every error raised by curious_trader."""


class NotPositiveDefinite(TraderError, ValueError):
    pass


class NonConvergence(TraderError, ArithmeticError):
    pass


class DimensionMismatch(TraderError, ValueError):
    pass


class TooFewSamples(TraderError, ValueError):
    pass


class NonPositiveVariance(TraderError, ValueError):
    pass


class InvalidEpsilon(TraderError, ValueError):
    pass


class TooFewPoints(TraderError, ValueError):
    pass


class AttemptsExhausted(TraderError, RuntimeError):
    pass


class ParseError(TraderError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonPositivePrice(ParseError):
    pass


class NonMonotoneIndex(ParseError):
    pass


class TooFewTicks(TraderError, ValueError):
    pass


class TooFewElements(TraderError, ValueError):
    pass


class ZeroVariance(TraderError, ArithmeticError):
    pass


class TooFewReturns(TraderError, ValueError):
    pass


class NoAnswers(TraderError, ValueError):
    pass


class ConfigError(TraderError, ValueError):
    pass
