"""Exception types shared across the engine."""


class VoxsteerError(Exception):
    """Base class for engine errors."""


class SingularSystem(VoxsteerError):
    """The clamped set leaves rigid-body modes; the system has no unique solution."""


class ZeroLoad(VoxsteerError):
    """No nonzero force on any free DOF."""


class NoConvergence(VoxsteerError):
    """Iterative solver exhausted its iteration budget."""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"PCG did not converge in {iterations} iterations (residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class BisectionFailure(VoxsteerError):
    """No bracket for the volume-constraint multiplier; sensitivities degenerate."""


class ConfigError(VoxsteerError):
    """Invalid run configuration or schedule file."""


class PhaseError(VoxsteerError):
    """Operation not allowed in the session's current phase."""
