"""Exception hierarchy shared by the model, simulator and CLI."""


class ModelError(ValueError):
    """Base class for errors raised by the market/control models."""


class DomainError(ModelError):
    """An argument lies outside the domain where a model is defined."""


class NoEquilibriumError(ModelError):
    """Supply and demand do not cross inside the admissible price band."""


class SignalError(ModelError):
    """A non-finite value reached a recursive filter or estimator."""


class CalibrationError(ModelError):
    """Not enough attack-free data to calibrate a detector."""


class SimulationError(ModelError):
    """A model error raised at a particular simulation step."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration.

    ``line`` is set for syntax errors when the parser reports a position.
    """

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
