"""Exception hierarchy shared by all modules."""


class PolaritonError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PolaritonError):
    """One or more input values violate a physical or structural constraint.

    Carries the full list of violations, not just the first one found.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ConfigError(PolaritonError):
    """A run configuration file failed to parse or validate."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


class SingularityError(PolaritonError):
    """Steady-state response evaluated at a singular parameter point."""


class NumericalError(PolaritonError):
    """The time integration produced a non-finite value.

    ``step`` is the index of the step at which the divergence was detected.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class BoundaryError(PolaritonError):
    """A characteristic displacement queried a field outside its support."""


class ContainmentError(PolaritonError):
    """The pulse was not contained in the cell when a measure required it."""


class NoSignalError(PolaritonError):
    """No detector peak above threshold where a measurement expected one."""
