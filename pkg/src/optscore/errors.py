"""Exception and warning types raised across the package."""


class OptScoreError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(OptScoreError, ValueError):
    pass


class BadLabel(OptScoreError, ValueError):
    pass


class EmptyClass(OptScoreError, ValueError):
    pass


class TooFewClasses(OptScoreError, ValueError):
    pass


class InvalidModel(OptScoreError, ValueError):
    pass


class InvalidProblem(OptScoreError, ValueError):
    pass


class SingularCovariance(OptScoreError, ArithmeticError):
    pass


class BadParameter(OptScoreError, ValueError):
    pass


class EmptyClassAfterRetries(OptScoreError, RuntimeError):
    pass


class ModelNotSparse(OptScoreError, ValueError):
    pass


class TooLarge(OptScoreError, ValueError):
    pass


class ConfigError(OptScoreError, ValueError):
    pass


class CertificateViolation(OptScoreError, AssertionError):
    pass


class DataFileError(OptScoreError, ValueError):
    """A data file exists but cannot be parsed."""


class ConvergenceWarning(UserWarning):
    """Solver hit its iteration cap; the best iterate is returned unconverged."""


class RecenteredModelWarning(UserWarning):
    """Class means did not average to zero and were shifted."""
