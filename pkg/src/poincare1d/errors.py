"""Semantic exception hierarchy shared by all modules."""


class PoincareError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(PoincareError, ValueError):
    """Arguments violate a documented contract (bad range, degenerate interval, ...)."""


class DomainError(PoincareError, ValueError):
    """Point outside the domain of the requested quantity."""


class PreconditionError(PoincareError):
    """A mathematical precondition of the method does not hold for these inputs."""


class NotApplicableError(PoincareError):
    """Signal (not a failure): the method does not cover this input; try another route."""


class NumericalError(PoincareError):
    """A numerical procedure failed to converge or produced non-finite values."""


class NoRootError(NumericalError):
    """No sign change found in the scanned interval."""


class DivergenceError(NumericalError):
    """An integral required by the method diverges numerically."""


class CrossValidationError(NumericalError):
    """Two independent computations of the same quantity disagree beyond tolerance."""


class ConvergenceError(NumericalError):
    """An iterative refinement sequence did not stabilize within its schedule."""


class ResourceError(PoincareError):
    """Refinement exceeded the configured resource cap."""


class ModelEvaluationError(PoincareError):
    """A user-supplied model failed to evaluate; carries the failing sample index."""

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(f"model evaluation failed at sample {index}: {message}")
