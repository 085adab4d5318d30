"""Closed-form and quadrature-based two-sided bounds on the Poincare constant.

Cheap enough to sandwich and sanity-check the exact and FEM solvers:
Muckenhoupt's two-sided criterion, the Bobkov-Houdre double-exponential and
logistic monotone-transport upper bounds, symmetric-restriction and bounded
perturbation principles, the Bakry-Emery curvature bound, the variance lower
bound, and a fixed-test-function evaluation of Chen's variational formula.

Suprema/infima over the support are taken on a quantile-mapped grid
q(p), p = (2j+1)/(2N) with N = 2001, followed by golden-section refinement of
the bracketing cells; this avoids picking arbitrary windows for unbounded
supports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import dist
from .dist import DistributionSpec
from .errors import DivergenceError, NotApplicableError, PreconditionError
from .quadrature import gl_cells, gl_fixed

_GRID_N = 2001
_INF = math.inf
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class BoundMethod(str, Enum):
    MUCKENHOUPT = "muckenhoupt"
    TRANSPORT_DOUBLEEXP = "transport_doubleexp"
    TRANSPORT_LOGISTIC = "transport_logistic"
    SYMMETRIC_RESTRICTION = "symmetric_restriction"
    BOUNDED_PERTURBATION = "bounded_perturbation"
    BAKRY_EMERY = "bakry_emery"
    VARIANCE = "variance"
    CHEN = "chen"


@dataclass(frozen=True)
class BoundReport:
    """One- or two-sided bound; the missing side is a +-inf sentinel."""

    lower: float
    upper: float
    method: BoundMethod
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper:
            raise PreconditionError(f"bound report with lower {self.lower} > upper {self.upper}")


def _quantile_grid(d: DistributionSpec, n: int = _GRID_N) -> np.ndarray:
    p = (2.0 * np.arange(n) + 1.0) / (2.0 * n)
    return dist.quantile(d, p)


def _golden_max(f, lo: float, hi: float, iters: int = 90):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    e = a + _GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(iters):
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + _GOLDEN * (b - a)
            fe = f(e)
        if b - a <= 1e-13 * max(1.0, abs(a) + abs(b)):
            break
    return (c, fc) if fc >= fe else (e, fe)


def _grid_sup(objective_grid: np.ndarray, xs: np.ndarray, objective):
    """Max over the grid, then golden refinement on the two bracketing cells."""
    j = int(np.argmax(objective_grid))
    lo = xs[max(j - 1, 0)]
    hi = xs[min(j + 1, len(xs) - 1)]
    if hi > lo:
        x_star, f_star = _golden_max(objective, lo, hi)
    else:
        x_star, f_star = xs[j], objective_grid[j]
    if objective_grid[j] > f_star:
        x_star, f_star = xs[j], float(objective_grid[j])
    return x_star, f_star


def muckenhoupt(d: DistributionSpec) -> BoundReport:
    """Two-sided Muckenhoupt bracket: max(A-, A+)/2 <= C_P <= 4 max(A-, A+).

    A+- are suprema of tail-mass times the integral of 1/density, taken from
    the median outward.
    """
    m = dist.quantile(d, 0.5)
    xs = _quantile_grid(d)
    p = (2.0 * np.arange(_GRID_N) + 1.0) / (2.0 * _GRID_N)
    inv_rho = lambda t: 1.0 / dist.pdf(d, t)

    left = xs[xs < m]
    p_left = p[: len(left)]
    a_minus, x_minus = 0.0, m
    if len(left) >= 1:
        cells = gl_cells(inv_rho, np.append(left, m))
        if not np.all(np.isfinite(cells)):
            raise DivergenceError("integral of 1/density diverges; no Poincare inequality detected")
        inner = np.cumsum(cells[::-1])[::-1]  # integral from left[j] to m
        vals = p_left * inner
        partial = lambda x: gl_fixed(inv_rho, x, m, 16)

        def obj_left(x):
            return dist.cdf(d, x) * partial(x)

        # golden pass evaluates the exact objective; cheap since the integral
        # from x to the median is smooth here
        x_minus, a_minus = _grid_sup(vals, left, obj_left)

    right = xs[xs > m]
    p_right = p[len(p) - len(right):]
    a_plus, x_plus = 0.0, m
    if len(right) >= 1:
        cells = gl_cells(inv_rho, np.insert(right, 0, m))
        if not np.all(np.isfinite(cells)):
            raise DivergenceError("integral of 1/density diverges; no Poincare inequality detected")
        inner = np.cumsum(cells)
        vals = (1.0 - p_right) * inner

        def obj_right(x):
            return (1.0 - dist.cdf(d, x)) * gl_fixed(inv_rho, m, x, 16)

        x_plus, a_plus = _grid_sup(vals, right, obj_right)

    amax = max(a_minus, a_plus)
    if not np.isfinite(amax):
        raise DivergenceError("Muckenhoupt functional diverges; no Poincare inequality detected")
    return BoundReport(
        lower=0.5 * amax,
        upper=4.0 * amax,
        method=BoundMethod.MUCKENHOUPT,
        details={"A_minus": a_minus, "A_plus": a_plus, "median": m,
                 "argmax_minus": x_minus, "argmax_plus": x_plus},
    )


def _transport_bound(d: DistributionSpec, weight) -> float:
    xs = _quantile_grid(d)
    p = (2.0 * np.arange(_GRID_N) + 1.0) / (2.0 * _GRID_N)
    rho = dist.pdf(d, xs)
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        raise DivergenceError("density not positive on the quantile grid")
    grid_vals = weight(p) / rho

    def obj(x):
        q = dist.cdf(d, x)
        r = dist.pdf(d, x)
        return weight(q) / r if r > 0.0 else -_INF

    _, sup = _grid_sup(grid_vals, xs, obj)
    if not np.isfinite(sup):
        raise DivergenceError("transport functional diverges")
    return 4.0 * sup * sup


def transport_doubleexp_bound(d: DistributionSpec) -> float:
    """Bobkov-Houdre bound C_P <= 4 (sup min(F, 1-F) / rho)^2."""
    return _transport_bound(d, lambda q: np.minimum(q, 1.0 - q))


def transport_logistic_bound(d: DistributionSpec) -> float:
    """Logistic-transport bound C_P <= 4 (sup F (1-F) / rho)^2; never worse
    than the double-exponential one since F(1-F) <= min(F, 1-F)."""
    return _transport_bound(d, lambda q: q * (1.0 - q))


def symmetric_restriction_bound(parent: DistributionSpec, interval: tuple,
                                parent_cp: float) -> float:
    """Restriction through a mu(I)-Lipschitz monotone transport:
    C_P(parent|I) <= mu(I)^2 * C_P(parent).

    Requires the parent unimodal with mode at its location and the negative
    half-mass preserved by the restriction (symmetric interval suffices).
    """
    if parent.family not in (dist.Family.UNIFORM, dist.Family.NORMAL,
                             dist.Family.DOUBLE_EXPONENTIAL, dist.Family.LOGISTIC,
                             dist.Family.TRIANGULAR):
        raise PreconditionError(f"{parent.family.value} is not unimodal with mode at the location")
    lo, hi = interval
    restricted = dist.truncate(parent, lo, hi)
    mu_i = dist.cdf(parent, hi) - dist.cdf(parent, lo) if np.isfinite(hi) and np.isfinite(lo) \
        else dist.mass(restricted) * dist.mass(parent)
    mode = parent.location
    neg_parent = dist.cdf(parent, mode)
    neg_restricted = dist.cdf(restricted, mode) if lo < mode < hi else (0.0 if mode <= lo else 1.0)
    if abs(neg_parent - neg_restricted) > 1e-10:
        raise PreconditionError(
            f"negative half-mass not preserved: {neg_parent} vs {neg_restricted}")
    return mu_i ** 2 * parent_cp


def gaussian_symmetric_uniform_bound(b: float) -> float:
    """C_P(N(0,1)|[-b, b]) <= 4 b^2 / pi^2 (compare with the uniform law)."""
    if not b > 0.0:
        raise PreconditionError(f"requires b > 0, got {b}")
    return 4.0 * b * b / math.pi ** 2


def bounded_perturbation_bound(base_cp: float, osc: float) -> float:
    """C_P(perturbed) <= exp(osc) * C_P(base), osc = sup psi - inf psi."""
    if osc < 0.0:
        raise PreconditionError(f"oscillation must be >= 0, got {osc}")
    return math.exp(osc) * base_cp


def bakry_emery_bound(d: DistributionSpec) -> float:
    """Curvature bound C_P <= 1 / inf V''; NotApplicableError when inf V'' <= 0
    or V'' is undefined somewhere in the support."""
    if dist.interior_kinks(d):
        raise NotApplicableError("V'' undefined at an interior kink")
    fam = d.family
    if fam in (dist.Family.UNIFORM, dist.Family.EXPONENTIAL, dist.Family.DOUBLE_EXPONENTIAL):
        raise NotApplicableError("V'' vanishes; no positive curvature")
    xs = _quantile_grid(d)
    lo_s, hi_s = dist.support(d)
    # V'' extends continuously to finite endpoints, where the infimum may sit
    if np.isfinite(lo_s):
        xs = np.concatenate([[lo_s + 1e-9 * (xs[-1] - xs[0])], xs])
    if np.isfinite(hi_s):
        xs = np.concatenate([xs, [hi_s - 1e-9 * (xs[-1] - xs[0])]])
    v2 = dist.potential_v2(d, xs)
    j = int(np.argmin(v2))
    inf_v2 = float(v2[j])
    lo = xs[max(j - 1, 0)]
    hi = xs[min(j + 1, len(xs) - 1)]
    if hi > lo:
        _, neg = _golden_max(lambda x: -float(dist.potential_v2(d, x)), lo, hi)
        inf_v2 = min(inf_v2, -neg)
    if inf_v2 <= 0.0:
        raise NotApplicableError(f"inf V'' = {inf_v2} is not positive")
    return 1.0 / inf_v2


def variance_lower_bound(d: DistributionSpec) -> float:
    """C_P >= Var(d), saturated by linear functions for the Gaussian."""
    return dist.interval_moments(d).variance


def bound_reports(d: DistributionSpec) -> list:
    """All applicable bounds as uniform BoundReports; one-sided methods carry
    a +-inf sentinel on the missing side."""
    reports = []
    try:
        reports.append(muckenhoupt(d))
    except DivergenceError:
        pass
    for method, fn in ((BoundMethod.TRANSPORT_DOUBLEEXP, transport_doubleexp_bound),
                       (BoundMethod.TRANSPORT_LOGISTIC, transport_logistic_bound),
                       (BoundMethod.BAKRY_EMERY, bakry_emery_bound)):
        try:
            reports.append(BoundReport(-_INF, fn(d), method))
        except (NotApplicableError, DivergenceError):
            pass
    reports.append(BoundReport(variance_lower_bound(d), _INF, BoundMethod.VARIANCE))
    return reports


def chen_lower_gap(d: DistributionSpec, grid: np.ndarray, g_prime: np.ndarray) -> float:
    """Spectral-gap lower bound inf (-Lg)'/g' for a fixed test function.

    ``g_prime`` holds g' > 0 sampled on ``grid``; derivatives are taken by
    central finite differences at the grid resolution.  This is a verification
    utility, not a production bound.
    """
    grid = np.asarray(grid, dtype=float)
    g_prime = np.asarray(g_prime, dtype=float)
    if grid.shape != g_prime.shape or grid.ndim != 1 or len(grid) < 7:
        raise PreconditionError("grid and g_prime must be equal-length 1-D arrays (>= 7 points)")
    if np.any(g_prime <= 0.0):
        raise PreconditionError("g' must be strictly positive on the grid")
    v1 = dist.potential_v1(d, grid)
    g2 = np.gradient(g_prime, grid)
    minus_lg = v1 * g_prime - g2  # -(Lg)' integrand numerator: d/dx of this below
    num = np.gradient(minus_lg, grid)
    ratio = num / g_prime
    return float(np.min(ratio[2:-2]))
