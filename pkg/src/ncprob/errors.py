"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad user input: malformed scenario, measure, or parameter."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to meet its contract."""


class ConvergenceError(NumericalError):
    """An iterative solver (Newton, fixed point) did not converge."""


class DegreeCapExceeded(NumericalError):
    """Exact rational composition would exceed the configured degree cap."""


class FlowError(NumericalError):
    """An ODE flow violated its invariant or left its admissible region."""


class RecoveryError(NumericalError):
    """A rational map is not the transform of a positive measure."""


class ZeroMeanError(ValidationError):
    """Operation requires a circle measure with non-zero mean."""
