"""Exception hierarchy shared by the library and the command line."""


class ClockError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameters(ClockError, ValueError):
    """Coupling or configuration values outside the supported domain."""


class DegenerateCoupling(InvalidParameters):
    """Raised for a = 0, where the map collapses to the identity."""


class EmptyWindow(InvalidParameters):
    pass


class InvalidKickRule(InvalidParameters):
    pass


class NotASaddle(InvalidParameters):
    pass


class NumericalFailure(ClockError, RuntimeError):
    """A numerical procedure failed to reach its contract."""


class NonConvergence(NumericalFailure):
    pass


class StepCollapse(NumericalFailure):
    pass


class GraphValidationFailed(NumericalFailure):
    pass


class NotConverging(NumericalFailure):
    pass
