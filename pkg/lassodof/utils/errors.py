class LassoDofError(Exception):
    """Base class of every error raised by lassodof."""


class InvalidSpec(LassoDofError, ValueError):
    pass


class DimensionMismatch(LassoDofError, ValueError):
    pass


class RankDeficient(LassoDofError):
    pass


class FullRank(LassoDofError):
    pass


class NotOptimalInput(LassoDofError):
    pass


class TooLarge(LassoDofError):
    pass


class NotConverged(LassoDofError):
    """
    raised when the solver reaches max_iterations above the KKT tolerance

    keeps the last iterate and its KKT residual so callers can still inspect them
    """

    def __init__(self, message, last_iterate, residual, iterations):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations


class FailureQuotaExceeded(LassoDofError):

    def __init__(self, message, failures, replications):
        super().__init__(message)
        self.failures = failures
        self.replications = replications


class NonUnimodalWarning(UserWarning):
    pass
