"""Exception types shared across the pipeline.

The CLI maps each family onto a process exit code.
"""


class TomoError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class ConfigError(TomoError, ValueError):
    exit_code = 2


class NumericalError(TomoError, ArithmeticError):
    exit_code = 3


class StepSizeError(NumericalError):
    """Integrator step too coarse for the requested accuracy."""


class DiscretizationError(NumericalError):
    """Bin width so large that a per-bin probability exceeds one."""


class RankDeficientError(NumericalError):
    """Not enough distinct sample times to determine the polynomial."""


class LengthMismatchError(NumericalError):
    def __init__(self, message, name=None):
        super().__init__(message)
        self.name = name


class DegenerateRateError(NumericalError):
    """The Stokes inversion divisor delta*gamma0 vanishes."""


class PartitionError(NumericalError):
    """Partition sizes exceed the population size."""


class ArtifactError(TomoError, OSError):
    """An upstream artifact is missing or unreadable."""

    exit_code = 4
