"""Shared test helpers: independent quadrature oracles and random spec draws."""
import numpy as np
import scipy.integrate

from poincare1d import dist
from poincare1d.dist import DistributionSpec, Family

ALL_FAMILIES = tuple(Family)


def quad_oracle(f, lo, hi, points=()):
    """scipy-based integration oracle, independent of the package quadrature."""
    pts = sorted(p for p in points if lo < p < hi)
    edges = [lo] + pts + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = scipy.integrate.quad(f, a, b, limit=200)
        total += val
    return total


def pdf_integral_oracle(d: DistributionSpec, mass_cut=1e-12):
    lo, hi = dist.support(d)
    if not np.isfinite(lo):
        lo = float(dist.quantile(d, mass_cut))
    if not np.isfinite(hi):
        hi = float(dist.quantile(d, 1.0 - mass_cut))
    return quad_oracle(lambda x: dist.pdf(d, x), lo, hi, points=dist.interior_kinks(d))


def random_spec(rng, family=None, truncated=True, standard=False) -> DistributionSpec:
    """Random spec with a bounded truncation window drawn by quantile masses."""
    fam = family if family is not None else ALL_FAMILIES[rng.integers(len(ALL_FAMILIES))]
    if standard:
        loc, scale = 0.0, 1.0
    else:
        loc = float(rng.uniform(-3.0, 3.0))
        scale = float(rng.uniform(0.5, 3.0))
    base = DistributionSpec(fam, loc, scale)
    if not truncated:
        return base
    pa = float(rng.uniform(0.02, 0.40))
    pb = float(rng.uniform(0.60, 0.98))
    return dist.truncate(base, float(dist.quantile(base, pa)), float(dist.quantile(base, pb)))
