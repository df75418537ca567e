"""Exception hierarchy shared by all modules."""


class PhaseLockError(Exception):
    """Base class for numerical failures raised by this package."""


class StepSizeUnderflow(PhaseLockError):
    def __init__(self, t, message=""):
        self.t = t
        super().__init__(f"step size underflow at t={t!r}: {message}".rstrip(": "))


class DegenerateDenominator(PhaseLockError):
    pass


class CoincidentSolutions(PhaseLockError):
    pass


class WrongRegime(PhaseLockError):
    pass


class NotNearInteger(PhaseLockError):
    pass


class InconsistentOrder(PhaseLockError):
    pass


class NegativeRadicand(PhaseLockError):
    pass


class ConfigError(ValueError):
    """Malformed or out-of-range run configuration."""
