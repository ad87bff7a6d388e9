"""Exception hierarchy shared by every module."""


class SwabSimError(Exception):
    """Base class for all package errors."""


class ParameterError(SwabSimError, ValueError):
    """A model parameter violates its invariant (e.g. singular mass matrix)."""


class InputError(SwabSimError, ValueError):
    """A runtime input is malformed, out of range or non-finite."""


class ControllerFault(SwabSimError):
    """The adaptive controller became unstable (diverging weights, NaN force)."""


class ScenarioFault(SwabSimError):
    """The simulated world reached an unsafe state (excessive wall penetration)."""


class FitError(SwabSimError, ValueError):
    """A least-squares fit is rank deficient or under-determined."""


class DetectionError(SwabSimError):
    """A sampling-pose stage could not produce a result.

    ``stage`` names the failing stage so callers can report it.
    """

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class ConfigError(SwabSimError, ValueError):
    """Scenario configuration failed to parse or validate."""
