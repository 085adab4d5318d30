"""Method resolution for Poincare constants: exact -> FEM -> exhaustion."""
from __future__ import annotations

import numpy as np

from . import dist, exact, fem
from .dist import DistributionSpec
from .errors import ArgumentError, NotApplicableError

_LIMIT_TOL_FLOOR = 1e-3  # quantile exhaustion cannot stabilize tighter than this


def poincare_constant(d: DistributionSpec, method: str = "auto", tol: float = 1e-6,
                      max_elements: int = 2 ** 20):
    """Compute C_P(d); returns (PoincareEstimate, SaturatingFunction or None).

    ``auto`` prefers the semi-analytical route, then FEM on a bounded support,
    then quantile exhaustion for infinite sides.
    """
    if method not in ("auto", "exact", "fem"):
        raise ArgumentError(f"unknown method {method!r}")
    if method == "exact":
        return exact.exact_constant(d)
    if method == "fem":
        return _numerical(d, tol, max_elements)
    try:
        return exact.exact_constant(d)
    except NotApplicableError:
        return _numerical(d, tol, max_elements)


def _numerical(d: DistributionSpec, tol: float, max_elements: int):
    std, _ = dist.standardize(d)
    zlo, zhi = dist._z_truncation(std)
    if np.isfinite(zlo) and np.isfinite(zhi):
        return fem.poincare_fem(d, tol=tol, max_elements=max_elements)
    return fem.unbounded_limit(d, tol=max(tol, _LIMIT_TOL_FLOOR)), None
