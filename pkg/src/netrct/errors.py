"""Exception types shared across the package."""


class NetrctError(Exception):
    """Base class for all netrct errors."""


class ParameterError(NetrctError, ValueError):
    """Invalid user-supplied parameter or configuration value."""


class GenerationError(NetrctError, RuntimeError):
    """Graph generation failed (e.g. connectivity retry budget exhausted)."""


class StabilityError(NetrctError, ValueError):
    """Requested a closed-form steady state for unstable parameters."""


class NumericError(NetrctError, RuntimeError):
    """A numeric routine failed to converge within its iteration budget."""


class DivergenceError(NetrctError, RuntimeError):
    """Content production diverged during simulation.

    Carries the time step at which divergence was detected. This is an
    expected outcome for unstable parameter sets, so callers usually
    convert it into a flagged result rather than a failure.
    """

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"content production diverged at step {step}")
