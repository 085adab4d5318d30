"""Semi-analytical optimal Poincare constants with saturating functions.

Closed forms for the uniform and triangular laws, trigonometric first-zero
characterizations for the truncated double exponential, and Kummer-function
first-zero characterizations for the truncated normal (with Hermite-zero
intervals as exact special cases).  ``exact_constant`` dispatches on a
:class:`~poincare1d.dist.DistributionSpec`, standardizing first and rescaling
the result.

Every truncated-normal root is cross-validated against the finite-element
solver before being returned: the scan window for the first zero rests on a
variance heuristic, so an independent check guards against a missed first
zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import dist, specfun
from .dist import DistributionSpec, Family
from .errors import ArgumentError, CrossValidationError, NotApplicableError
from .quadrature import adaptive_quad, gl_cells, _leggauss

_SCAN_STEP = 0.01
_SCAN_CHUNK = 2000
_CROSSVAL_FEM_TOL = 1e-5
_CROSSVAL_LIMIT = 1e-4


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    FIRST_ZERO = "first_zero"
    FEM = "fem"
    LIMIT = "limit"


@dataclass(frozen=True)
class PoincareEstimate:
    """A Poincare constant with provenance; value * spectral_gap == 1."""

    value: float
    method: Method
    error_estimate: float
    spectral_gap: float

    @staticmethod
    def of(value: float, method: Method, error_estimate: float = 0.0) -> "PoincareEstimate":
        if not value > 0.0:
            raise ArgumentError(f"Poincare constant must be positive, got {value}")
        return PoincareEstimate(value, method, max(error_estimate, 0.0), 1.0 / value)

    def rescaled(self, factor: float) -> "PoincareEstimate":
        return PoincareEstimate.of(self.value * factor, self.method,
                                   self.error_estimate * factor)


@dataclass(frozen=True)
class SaturatingFunction:
    """Centered, strictly increasing extremal function with its Rayleigh ratio."""

    kind: str  # "closed_form" | "sampled"
    rayleigh: float
    evaluator: Callable
    derivative: Optional[Callable] = None
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None

    def __call__(self, x):
        return self.evaluator(x)

    def rescaled(self, location: float, scale: float) -> "SaturatingFunction":
        """Pullback through x -> (x - location)/scale (affine change of variable)."""
        ev = self.evaluator
        f = lambda x: ev((np.asarray(x, dtype=float) - location) / scale)
        fp = None
        if self.derivative is not None:
            dv = self.derivative
            fp = lambda x: dv((np.asarray(x, dtype=float) - location) / scale) / scale
        grid = None if self.grid is None else location + scale * self.grid
        return SaturatingFunction(self.kind, self.rayleigh / scale ** 2, f, fp,
                                  grid, self.values)


def _guard_width(a: float, b: float):
    if not a < b:
        raise ArgumentError(f"interval requires a < b, got [{a}, {b}]")
    if np.isfinite(a) and np.isfinite(b) and (b - a) < 1e-8 * max(1.0, abs(a), abs(b)):
        raise ArgumentError(f"interval [{a}, {b}] too narrow for a reliable constant")


def _closed_form_saturating(d: DistributionSpec, f, fprime, rayleigh_hint: float,
                            kinks: tuple = ()) -> SaturatingFunction:
    """Center, orient increasing, sup-normalize, and attach the quadrature Rayleigh."""
    lo, hi = dist.support(d)
    xs = np.linspace(lo, hi, 2001)
    fx = f(xs)
    scale = float(np.max(np.abs(fx)))
    sign = 1.0 if fx[-1] >= fx[0] else -1.0
    c = sign / scale
    center = adaptive_quad(lambda x: c * f(x) * dist.pdf(d, x), lo, hi,
                           tol=1e-12, kinks=kinks)
    num = adaptive_quad(lambda x: (c * fprime(x)) ** 2 * dist.pdf(d, x), lo, hi,
                        tol=1e-12, kinks=kinks)
    den = adaptive_quad(lambda x: (c * f(x) - center) ** 2 * dist.pdf(d, x), lo, hi,
                        tol=1e-12, kinks=kinks)
    ray = num / den if den > 0.0 else rayleigh_hint
    ev = lambda x: c * f(np.asarray(x, dtype=float)) - center
    dv = lambda x: c * fprime(np.asarray(x, dtype=float))
    return SaturatingFunction("closed_form", ray, ev, dv)


def uniform_constant(a: float, b: float):
    """C_P of the uniform law on [a, b]: (b-a)^2 / pi^2, saturated by a sine."""
    _guard_width(a, b)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ArgumentError("uniform law requires a bounded interval")
    w = b - a
    mid = 0.5 * (a + b)
    value = w * w / math.pi ** 2
    spec = DistributionSpec(Family.UNIFORM, mid, 0.5 * w)
    f = lambda x: np.sin(math.pi * (np.asarray(x, dtype=float) - mid) / w)
    fp = lambda x: (math.pi / w) * np.cos(math.pi * (np.asarray(x, dtype=float) - mid) / w)
    sat = _closed_form_saturating(spec, f, fp, 1.0 / value)
    return PoincareEstimate.of(value, Method.CLOSED_FORM), sat


def truncated_doubleexp_constant(a: float, b: float):
    """C_P of the standard double exponential restricted to [a, b].

    Same-signed endpoints give (1/4 + (pi/(b-a))^2)^{-1} in closed form; mixed
    signs reduce to the first zero of cotan(|a| w) + cotan(|b| w) + 1/w.  Any
    infinite endpoint gives the whole-line value 4 (restriction to a half line
    does not change the constant), with no saturating function since the
    inequality is not attained there.
    """
    if not a < b:
        raise ArgumentError(f"interval requires a < b, got [{a}, {b}]")
    if math.isinf(a) or math.isinf(b):
        return PoincareEstimate.of(4.0, Method.CLOSED_FORM), None
    _guard_width(a, b)
    spec = DistributionSpec(Family.DOUBLE_EXPONENTIAL, truncation=(a, b))

    if a >= 0.0 or b <= 0.0:
        omega = math.pi / (b - a)
        value = 1.0 / (0.25 + omega * omega)
        if a >= 0.0:
            f = lambda x: np.exp(0.5 * np.asarray(x, dtype=float)) * (
                -omega * np.cos(omega * (np.asarray(x, dtype=float) - a))
                + 0.5 * np.sin(omega * (np.asarray(x, dtype=float) - a)))
            fp = lambda x: np.exp(0.5 * np.asarray(x, dtype=float)) * (
                (0.25 + omega * omega) * np.sin(omega * (np.asarray(x, dtype=float) - a)))
        else:
            # mirror of the positive-side formula through x -> -x
            f = lambda x: -(np.exp(-0.5 * np.asarray(x, dtype=float)) * (
                -omega * np.cos(omega * (-np.asarray(x, dtype=float) + b))
                + 0.5 * np.sin(omega * (-np.asarray(x, dtype=float) + b))))
            fp = lambda x: np.exp(-0.5 * np.asarray(x, dtype=float)) * (
                (0.25 + omega * omega) * np.sin(omega * (-np.asarray(x, dtype=float) + b)))
        sat = _closed_form_saturating(spec, f, fp, 1.0 / value)
        return PoincareEstimate.of(value, Method.CLOSED_FORM), sat

    # mixed signs: a < 0 < b
    cap = min(math.pi / abs(a), math.pi / abs(b))

    def disc(w):
        return (1.0 / math.tan(abs(a) * w) + 1.0 / math.tan(abs(b) * w) + 1.0 / w)

    omega = specfun.first_zero(disc, cap * 1e-9, cap * (1.0 - 1e-12), cap / 2000.0)
    value = 1.0 / (0.25 + omega * omega)
    cot_wa = 1.0 / math.tan(omega * a)
    coef_a = omega * cot_wa - 0.5
    coef_b = 0.5 * cot_wa + omega

    def f(x):
        x = np.asarray(x, dtype=float)
        bsel = coef_b - (np.sign(x) + 1.0) * 0.5 * (coef_a / omega)
        return np.exp(0.5 * np.abs(x)) * (coef_a * np.cos(omega * x) + bsel * np.sin(omega * x))

    def fp(x):
        x = np.asarray(x, dtype=float)
        s = np.sign(x)
        bsel = coef_b - (s + 1.0) * 0.5 * (coef_a / omega)
        cos_t, sin_t = np.cos(omega * x), np.sin(omega * x)
        return np.exp(0.5 * np.abs(x)) * (
            (0.5 * s * coef_a + bsel * omega) * cos_t
            + (0.5 * s * bsel - coef_a * omega) * sin_t)

    sat = _closed_form_saturating(spec, f, fp, 1.0 / value, kinks=(0.0,))
    return PoincareEstimate.of(value, Method.FIRST_ZERO, abs(value) * 1e-12), sat


def triangular_constant():
    """C_P of the standard triangular law on [-1, 1]: 1/r1^2 with r1 the first
    zero of J0; saturated by sign(x) J0(r1 (1 - |x|))."""
    r1 = specfun.bessel_j0_first_zero()
    value = 1.0 / (r1 * r1)
    spec = DistributionSpec(Family.TRIANGULAR)
    j0 = np.vectorize(specfun.bessel_j0, otypes=[float])
    j0p = np.vectorize(specfun._bessel_j0_prime, otypes=[float])

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) * j0(r1 * (1.0 - np.abs(x)))

    def fp(x):
        x = np.asarray(x, dtype=float)
        return -r1 * j0p(r1 * (1.0 - np.abs(x)))

    sat = _closed_form_saturating(spec, f, fp, 1.0 / value, kinks=(0.0,))
    return PoincareEstimate.of(value, Method.CLOSED_FORM), sat


# -- truncated normal --------------------------------------------------------

def _h0(lam, t_sq_half):
    return specfun._kummer_m_vec(0.5 * (1.0 - np.asarray(lam, dtype=float)), 0.5, t_sq_half)


def _h1(lam, t_sq_half):
    return specfun._kummer_m_vec(0.5 * (2.0 - np.asarray(lam, dtype=float)), 1.5, t_sq_half)


def _normal_dispersion_function(a: float, b: float):
    """The lambda-function whose first zero is the spectral gap on [a, b]."""
    za, zb = 0.5 * a * a, 0.5 * b * b
    if abs(a + b) <= 1e-12 * max(abs(a), abs(b)):
        return lambda lam: _h0(lam, zb)
    if a == 0.0:
        return lambda lam: _h1(lam, zb)
    if b == 0.0:
        return lambda lam: _h1(lam, za)

    def det(lam):
        return (b * _h0(lam, za) * _h1(lam, zb) - a * _h0(lam, zb) * _h1(lam, za))

    return det


def _first_zero_chunked(fn, lam_max: float) -> float:
    """First zero of fn on (0, lam_max]: vectorized scan in chunks from 1e-6
    with step 0.01, then Brent refinement of the bracketing cell."""
    start = 1e-6
    n_total = int(math.ceil((lam_max - start) / _SCAN_STEP)) + 1
    prev_lam, prev_val = None, None
    for chunk_lo in range(0, n_total, _SCAN_CHUNK):
        idx = np.arange(chunk_lo, min(chunk_lo + _SCAN_CHUNK, n_total))
        lam = start + idx * _SCAN_STEP
        vals = np.asarray(fn(lam), dtype=float)
        if prev_lam is not None:
            lam = np.insert(lam, 0, prev_lam)
            vals = np.insert(vals, 0, prev_val)
        zero_hits = np.flatnonzero(vals == 0.0)
        sign_flip = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0.0)
        hit = min(zero_hits[0] if len(zero_hits) else np.inf,
                  sign_flip[0] if len(sign_flip) else np.inf)
        if np.isfinite(hit):
            j = int(hit)
            if vals[j] == 0.0:
                return float(lam[j])
            bracket = specfun.RootBracket(float(lam[j]), float(lam[j + 1]),
                                          float(vals[j]), float(vals[j + 1]))
            scalar = lambda l: float(fn(np.array([l]))[0])
            return specfun.refine_bracket(scalar, bracket)
        prev_lam, prev_val = float(lam[-1]), float(vals[-1])
    raise specfun.NoRootError(f"no spectral-gap zero found in (0, {lam_max}]")


def _kummer_saturating(a: float, b: float, lam: float) -> SaturatingFunction:
    """Saturating function for the truncated normal from the Kummer combination.

    The derivative h = c0 h0 + c1 t h1 solves the Dirichlet reformulation and
    vanishes at both endpoints; the saturating function is its centered
    primitive.
    """
    za, zb = 0.5 * a * a, 0.5 * b * b
    h0a = float(_h0(lam, za))
    h1a = float(_h1(lam, za))
    h0b = float(_h0(lam, zb))
    h1b = float(_h1(lam, zb))
    # null vector of the boundary system; pick the better-conditioned row
    if abs(h0a) + abs(a * h1a) >= abs(h0b) + abs(b * h1b):
        c0, c1 = -a * h1a, h0a
    else:
        c0, c1 = -b * h1b, h0b

    def h(t):
        t = np.asarray(t, dtype=float)
        zz = 0.5 * t * t
        return c0 * _h0(lam, zz) + c1 * t * _h1(lam, zz)

    mid = 0.5 * (a + b)
    orient = 1.0 if float(h(np.array([mid]))[0]) >= 0.0 else -1.0
    spec = DistributionSpec(Family.NORMAL, truncation=(a, b))

    # cumulative primitive on cell edges; arbitrary points via in-cell GL
    edges = np.linspace(a, b, 1025)
    cum = np.concatenate([[0.0], np.cumsum(gl_cells(lambda t: orient * h(t), edges, n=6))])
    gx, gw = _leggauss(6)

    def f(x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xx = np.atleast_1d(x)
        k = np.clip(np.searchsorted(edges, xx, side="right") - 1, 0, len(edges) - 2)
        lo = edges[k]
        half = 0.5 * (xx - lo)
        pts = lo[:, None] + half[:, None] * (gx[None, :] + 1.0)
        partial = half * (orient * h(pts.ravel()).reshape(pts.shape) @ gw)
        out = cum[k] + partial
        return float(out[0]) if scalar else out

    fp = lambda x: orient * h(x)
    return _closed_form_saturating(spec, f, fp, lam)


def truncated_normal_constant(a: float, b: float):
    """C_P of the standard normal restricted to a bounded [a, b].

    The spectral gap is the first zero of a Kummer-function combination; the
    scan window extends to 10x the reciprocal truncated variance (the gap
    never exceeds 1/variance) and the root is cross-validated against the FEM
    solver before being returned.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise NotApplicableError("unbounded truncation: use the FEM exhaustion route")
    _guard_width(a, b)
    spec = DistributionSpec(Family.NORMAL, truncation=(a, b))
    variance = dist.interval_moments(spec).variance
    lam_max = 10.0 / variance
    lam = _first_zero_chunked(_normal_dispersion_function(a, b), lam_max)

    from . import fem  # local import: fem does not depend on this module

    check, _ = fem.poincare_fem(spec, tol=_CROSSVAL_FEM_TOL)
    value = 1.0 / lam
    rel = abs(value - check.value) / value
    if rel > _CROSSVAL_LIMIT:
        raise CrossValidationError(
            f"Kummer root 1/{lam} and FEM value {check.value} disagree (rel {rel:.2e})")
    sat = _kummer_saturating(a, b, lam)
    return PoincareEstimate.of(value, Method.FIRST_ZERO, abs(value - check.value)), sat


def hermite_interval_constant(n: int, i: int):
    """Exact constant 1/(n+1) on the interval between consecutive zeros of the
    degree-n Hermite polynomial (1 <= i <= n-1), saturated by the restricted
    degree-(n+1) polynomial."""
    if n < 2:
        raise ArgumentError("needs n >= 2 for an interior interval")
    if not 1 <= i <= n - 1:
        raise ArgumentError(f"interior index must satisfy 1 <= i <= {n - 1}, got {i}")
    zeros = specfun.hermite_zeros(n)
    a, b = zeros[i - 1], zeros[i]
    value = 1.0 / (n + 1.0)
    spec = DistributionSpec(Family.NORMAL, truncation=(a, b))
    f = lambda x: specfun.hermite_eval(n + 1, x)
    fp = lambda x: (n + 1.0) * specfun.hermite_eval(n, x)
    sat = _closed_form_saturating(spec, f, fp, 1.0 / value)
    return (a, b), PoincareEstimate.of(value, Method.CLOSED_FORM), sat


def exact_constant(d: DistributionSpec):
    """Dispatcher over the semi-analytical families.

    Standardizes, dispatches, and rescales.  Raises NotApplicableError (a
    signal, not a failure) for families or truncations without a
    semi-analytical route, so callers can fall back to FEM.
    """
    std, factor = dist.standardize(d)
    zlo, zhi = dist._z_truncation(std)
    fam = std.family

    if fam is Family.UNIFORM:
        est, sat = uniform_constant(zlo, zhi)
    elif fam is Family.TRIANGULAR:
        if not (zlo <= -1.0 and zhi >= 1.0):
            raise NotApplicableError(
                "triangular with a proper truncation has no semi-analytical constant")
        est, sat = triangular_constant()
    elif fam is Family.DOUBLE_EXPONENTIAL:
        est, sat = truncated_doubleexp_constant(zlo, zhi)
    elif fam is Family.NORMAL:
        if not (np.isfinite(zlo) and np.isfinite(zhi)):
            raise NotApplicableError("normal with unbounded truncation: use the FEM route")
        est, sat = truncated_normal_constant(zlo, zhi)
    else:
        raise NotApplicableError(f"no semi-analytical constant for family {fam.value}")

    if d.location == 0.0 and d.scale == 1.0:
        return est, sat
    sat = sat.rescaled(d.location, d.scale) if sat is not None else None
    return est.rescaled(factor), sat
