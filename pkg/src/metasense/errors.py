"""Exception hierarchy shared by all metasense modules."""


class MetasenseError(Exception):
    """Base class for all package errors."""


class DomainError(MetasenseError, ValueError):
    """An argument lies outside the supported range of a model."""


class NonConvergence(MetasenseError, ArithmeticError):
    """A Newton iteration did not converge within its iteration budget."""


class InvalidStimulus(MetasenseError, ValueError):
    pass


class CalibrationFailure(MetasenseError):
    pass


class WindowTooLarge(MetasenseError, ValueError):
    pass


class EmptyTrace(MetasenseError, ValueError):
    pass


class SizeMismatch(MetasenseError, ValueError):
    pass


class DimensionMismatch(MetasenseError, ValueError):
    pass


class SingularSystem(MetasenseError, ArithmeticError):
    pass


class DegenerateTarget(MetasenseError, UserWarning):
    """Training targets are all identical; the model is a constant predictor.

    Emitted as a warning rather than raised.
    """


class DegenerateTruth(MetasenseError, ValueError):
    pass


class ConfigError(MetasenseError, ValueError):
    pass
