"""Special functions and root-finding primitives for the semi-analytical solvers.

Kummer's confluent hypergeometric M, the Bessel function J0 with its first
zero, Hermite polynomials (probabilists' convention) with their zeros, and a
first-sign-change scanner with Brent refinement.  Everything here is pure and
deterministic: identical inputs produce bit-identical outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, NoRootError, NumericalError

_KUMMER_MAX_TERMS = 10_000


@dataclass(frozen=True)
class RootBracket:
    """Sign-change bracket: f_lo and f_hi have opposite signs on [lo, hi]."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ArgumentError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not self.f_lo * self.f_hi < 0.0:
            raise ArgumentError("bracket endpoints must have opposite signs")


def kummer_m(a1: float, b1: float, z: float) -> float:
    """Kummer's function M(a1, b1, z) by its ascending series.

    Terms follow x_{p+1}/x_p = (p+a1) z / ((p+b1)(p+1)); the sum is exact
    (finite) when a1 is a nonpositive integer.  Requires z >= 0 and b1 not a
    nonpositive integer.
    """
    if z < 0.0:
        raise ArgumentError(f"kummer_m requires z >= 0, got {z}")
    if b1 <= 0.0 and b1 == math.floor(b1):
        raise ArgumentError(f"kummer_m undefined for nonpositive integer b1 = {b1}")
    total = 1.0
    comp = 0.0  # Kahan compensation
    term = 1.0
    for p in range(_KUMMER_MAX_TERMS):
        term *= (p + a1) * z / ((p + b1) * (p + 1.0))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if term == 0.0:  # polynomial case terminated exactly
            return total
        if abs(term) <= 1e-14 * abs(total) and abs(p + a1) * z < (p + b1) * (p + 1.0):
            return total
    raise NumericalError(f"Kummer series did not converge for ({a1}, {b1}, {z})")


def _kummer_m_vec(a1, b1: float, z) -> np.ndarray:
    """Vectorized Kummer series over arrays of a1 and/or z (same broadcast shape)."""
    a1 = np.asarray(a1, dtype=float)
    z = np.asarray(z, dtype=float)
    total = np.ones(np.broadcast(a1, z).shape)
    term = np.ones_like(total)
    for p in range(_KUMMER_MAX_TERMS):
        term = term * (p + a1) * z / ((p + b1) * (p + 1.0))
        total = total + term
        if np.all(np.abs(term) <= 1e-15 * np.maximum(np.abs(total), 1e-300)):
            if np.all(np.abs(p + a1) * z < (p + b1) * (p + 1.0)):
                return total
    raise NumericalError("vectorized Kummer series did not converge")


def bessel_j0(x: float) -> float:
    """J0 by its ascending power series with compensated summation.

    Intended range |x| <= 12 (all that the solvers need); accuracy degrades
    beyond since no asymptotic branch is provided.
    """
    q = 0.25 * x * x
    total = 1.0
    comp = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= -q / (k * k)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= 1e-17 * max(abs(total), 1e-30) or k > 200:
            return total


def _bessel_j0_prime(x: float) -> float:
    """Series derivative of J0 (equals -J1)."""
    q = 0.25 * x * x
    term = 1.0
    total = 0.0
    k = 0
    while True:
        k += 1
        term *= -q / (k * k)
        contrib = term * (2.0 * k)
        total += contrib
        if abs(contrib) <= 1e-17 * max(abs(total), 1e-30) or k > 200:
            break
    return total / x if x != 0.0 else 0.0


@lru_cache(maxsize=1)
def bessel_j0_first_zero() -> float:
    """First positive zero of J0, refined to relative 1e-12."""
    return _brent(bessel_j0, 2.0, 3.0, bessel_j0(2.0), bessel_j0(3.0), rtol=1e-14)


def hermite_eval(n: int, x):
    """Probabilists' Hermite polynomial He_n via the three-term recurrence."""
    if n < 0:
        raise ArgumentError("hermite_eval requires n >= 0")
    if n > 100:
        raise ArgumentError("hermite_eval limited to n <= 100 (overflow guard)")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, n):
        h, h_prev = x * h - k * h_prev, h
    return h if h.ndim else float(h)


@lru_cache(maxsize=128)
def hermite_zeros(n: int) -> tuple:
    """The n simple real zeros of He_n, ascending, each to ~1e-13.

    Built degree by degree: zeros of He_{k+1} strictly interlace those of
    He_k, so every new zero is bisected inside a guaranteed bracket (all
    brackets of a degree are bisected simultaneously).
    """
    if n < 1:
        raise ArgumentError("hermite_zeros requires n >= 1")
    if n > 100:
        raise ArgumentError("hermite_zeros limited to n <= 100 (overflow guard)")
    zeros = np.array([0.0])
    for k in range(1, n):
        bound = math.sqrt(4.0 * (k + 1) + 2.0)
        lo = np.concatenate([[-bound], zeros])
        hi = np.concatenate([zeros, [bound]])
        flo = hermite_eval(k + 1, lo)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = hermite_eval(k + 1, mid)
            left = flo * fm < 0.0
            hi = np.where(left | (fm == 0.0), mid, hi)
            lo = np.where(left | (fm == 0.0), lo, mid)
            flo = np.where(left | (fm == 0.0), flo, fm)
            if float(np.max(hi - lo)) <= 1e-14:
                break
        zeros = 0.5 * (lo + hi)
    return tuple(float(z) for z in zeros)


def first_zero(f, lo: float, hi: float, step: float = None) -> float:
    """First zero of f in [lo, hi]: scan for the first sign change, then Brent.

    ``step`` defaults to (hi - lo)/2000.  Raises NoRootError when no sign
    change occurs in the window; never returns hi as a silent fallback.
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ArgumentError(f"bad scan window [{lo}, {hi}]")
    if step is None:
        step = (hi - lo) / 2000.0
    if not step > 0.0:
        raise ArgumentError(f"scan step must be > 0, got {step}")
    x0 = lo
    f0 = f(x0)
    if math.isnan(f0):
        raise NumericalError(f"f({x0}) is NaN")
    if f0 == 0.0:
        return x0
    k = 0
    while x0 < hi:
        k += 1
        x1 = min(lo + k * step, hi)
        if x1 <= x0:
            break
        f1 = f(x1)
        if math.isnan(f1):
            raise NumericalError(f"f({x1}) is NaN")
        if f1 == 0.0:
            return x1
        if (f0 < 0.0) != (f1 < 0.0):
            return refine_bracket(f, RootBracket(x0, x1, f0, f1))
        x0, f0 = x1, f1
    raise NoRootError(f"no sign change of f in [{lo}, {hi}] with step {step}")


def refine_bracket(f, bracket: RootBracket, rtol: float = 1e-12) -> float:
    """Brent refinement of a sign-change bracket to relative tolerance rtol."""
    lo, hi, flo, fhi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    # shrink by bisection until both endpoint values are finite (scan windows
    # may legitimately open next to a pole of f)
    for _ in range(200):
        if np.isfinite(flo) and np.isfinite(fhi):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if math.isnan(fm):
            raise NumericalError(f"f({mid}) is NaN")
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return _brent(f, lo, hi, flo, fhi, rtol=rtol)


def _brent(f, a, b, fa, fb, rtol=1e-12, maxiter=200):
    """Classic Brent dekker root refinement on a valid bracket."""
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ArgumentError("brent requires a sign change")
    c, fc = a, fa
    d = e = b - a
    for _ in range(maxiter):
        if fb * fc > 0.0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * np.finfo(float).eps * abs(b) + 0.5 * rtol * max(abs(b), 1e-300)
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        b = b + (d if abs(d) > tol1 else math.copysign(tol1, xm))
        fb = f(b)
        if math.isnan(fb):
            raise NumericalError(f"f({b}) is NaN during refinement")
    raise NumericalError("brent refinement did not converge")
