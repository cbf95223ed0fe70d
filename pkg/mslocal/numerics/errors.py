class MslocalError(Exception):
    """Base class for errors raised by the multi-scale pipeline and harness."""


class InvalidSiteError(MslocalError, IndexError):
    pass


class DimensionError(MslocalError, ValueError):
    pass


class InvariantViolation(MslocalError):
    """An input broke a precondition another stage was supposed to guarantee."""


class NumericalFailure(MslocalError, ArithmeticError):
    """A certified numerical bound (orthogonality, residual) was exceeded."""


class ConvergenceFailure(NumericalFailure):
    pass


class UndefinedGapError(MslocalError, ValueError):
    pass


class LabelingError(MslocalError):
    pass


class ConfigError(MslocalError, ValueError):
    pass
