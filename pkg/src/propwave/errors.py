"""Exception hierarchy shared by all solvers."""


class PropwaveError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PropwaveError, ValueError):
    """An argument lies outside the domain where a relation is defined."""


class ConfigurationError(PropwaveError, ValueError):
    """Physical parameters or run configuration are inadmissible.

    ``field`` names the offending entry when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ModelError(PropwaveError):
    """The travelling-wave model cannot be set up for the given inputs."""


class IntegrationError(PropwaveError):
    """The initial-value integrator failed."""

    def __init__(self, message, t=None, context=None):
        super().__init__(message)
        self.t = t
        self.context = context or {}


class BracketError(PropwaveError):
    """A root finder was handed an interval without a sign change."""


class ConvergenceError(PropwaveError):
    """An iterative solver did not converge."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history
