"""Exception types raised across the package."""


class MnclabError(Exception):
    """Base class for every error raised by mnclab."""


class InvalidArgument(MnclabError, ValueError):
    pass


class NumericOverflow(MnclabError, ArithmeticError):
    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class NonDifferentiable(MnclabError):
    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class SizeCapExceeded(MnclabError, ValueError):
    pass


class DegenerateDegree(MnclabError):
    """The image measure vanishes, so no degree can be fitted."""


class DegenerateDenominator(MnclabError):
    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius


class NotSemiHomogeneous(MnclabError):
    pass


class PreconditionError(MnclabError):
    pass


class ConfigError(MnclabError, ValueError):
    """Raised while validating an experiment configuration."""
