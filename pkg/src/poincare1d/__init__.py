"""Optimal Poincare constants of truncated 1-D distributions.

Semi-analytical first-zero solvers, a finite-element Neumann spectral-gap
solver, closed-form two-sided bounds, and derivative-based global sensitivity
screening built on top of them.
"""

from .dist import DistributionSpec, Family, IntervalMoments
from .errors import (
    ArgumentError,
    ConvergenceError,
    CrossValidationError,
    DivergenceError,
    DomainError,
    ModelEvaluationError,
    NoRootError,
    NotApplicableError,
    NumericalError,
    PoincareError,
    PreconditionError,
    ResourceError,
)

__version__ = "0.1.0"

__all__ = [
    "DistributionSpec",
    "Family",
    "IntervalMoments",
    "PoincareError",
    "ArgumentError",
    "DomainError",
    "PreconditionError",
    "NotApplicableError",
    "NumericalError",
    "NoRootError",
    "DivergenceError",
    "CrossValidationError",
    "ConvergenceError",
    "ResourceError",
    "ModelEvaluationError",
    "__version__",
]
