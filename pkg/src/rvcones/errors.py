"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end:
2 for configuration problems, 3 for bad data, 4 for numerical failures.
"""


class RVConesError(Exception):
    exit_code = 1


class ConfigError(RVConesError, ValueError):
    exit_code = 2

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class DataError(RVConesError, ValueError):
    exit_code = 3


class NumericError(RVConesError, ArithmeticError):
    exit_code = 4


# configuration / argument errors
class BadK(ConfigError):
    pass


class BadWeights(ConfigError):
    pass


class BadBlockSize(ConfigError):
    pass


class OutOfRange(ConfigError):
    pass


class DegenerateCorrelation(ConfigError):
    pass


class BadGenerator(ConfigError):
    pass


class MissingBlock(ConfigError):
    pass


# data errors
class ZeroVector(DataError):
    pass


class NonFinite(DataError):
    pass


class NonPositiveBox(DataError):
    pass


class NonPositiveArgument(DataError):
    pass


class NonMonotoneTransform(DataError):
    pass


# the conditioned-limit module names this one NonMonotone
NonMonotone = NonMonotoneTransform


class Unsupported(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        super().__init__(message)


class RaggedRows(DataError):
    pass


class EmptyInput(DataError):
    pass


# numerical failures
class DegenerateSample(NumericError):
    pass


class TooFewExceedances(NumericError):
    pass


class DomainViolation(NumericError):
    pass


class DegenerateConditional(NumericError):
    pass


class GridMismatch(NumericError):
    pass
