"""P1 finite-element solver for the Neumann spectral gap of a 1-D density.

The weak form is shifted by the mass term so the assembled rigidity matrix
K = stiffness + mass is positive definite; the pencil eigenvalue theta then
relates to the gap through lambda = theta - 1.  The two smallest pencil
eigenvalues are located by inertia-counting bisection on tridiagonal LDL^T
factorizations (Sylvester's law of inertia keeps every step O(n), where a
dense Cholesky congruence would destroy tridiagonality), and eigenvectors are
polished by shifted inverse iteration with a fixed seed.

``poincare_fem`` drives mesh doubling with Richardson extrapolation on a
bounded support, and ``unbounded_limit`` exhausts infinite supports by
quantile truncation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dist
from .dist import DistributionSpec
from .errors import (ArgumentError, ConvergenceError, NumericalError,
                     PreconditionError, ResourceError)
from .exact import Method, PoincareEstimate, SaturatingFunction
from .quadrature import _leggauss

_SEED = 0x5EED
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Mesh:
    """Sorted node coordinates; ``graded`` marks non-uniform spacing."""

    nodes: np.ndarray
    graded: bool = False

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 3:
            raise ArgumentError("mesh needs at least 3 nodes")
        if not np.all(np.diff(nodes) > 0.0):
            raise ArgumentError("mesh nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @property
    def n(self) -> int:
        return len(self.nodes) - 1

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @staticmethod
    def uniform(a: float, b: float, n: int, kinks: tuple = ()) -> "Mesh":
        """n elements on [a, b]; a node is placed exactly at each interior kink
        so per-element integrands stay smooth."""
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise ArgumentError(f"bad mesh interval [{a}, {b}]")
        if n < 2:
            raise ArgumentError("need at least 2 elements")
        cuts = sorted(k for k in kinks if a < k < b)
        if not cuts:
            return Mesh(np.linspace(a, b, n + 1), graded=False)
        edges = [a] + cuts + [b]
        lengths = np.diff(edges)
        alloc = np.maximum(1, np.floor(n * lengths / lengths.sum()).astype(int))
        while alloc.sum() < n:  # largest-remainder top-up
            alloc[int(np.argmax(lengths / alloc))] += 1
        while alloc.sum() > n:
            big = np.where(alloc > 1)[0]
            alloc[big[int(np.argmin(lengths[big] / alloc[big]))]] -= 1
        parts = [np.linspace(edges[i], edges[i + 1], alloc[i] + 1)[:-1]
                 for i in range(len(alloc))]
        nodes = np.concatenate(parts + [[b]])
        return Mesh(nodes, graded=True)


@dataclass(frozen=True)
class SpectralSystem:
    """Tridiagonal pencil (K, M): K = stiffness + mass (shifted form), M = mass."""

    k_diag: np.ndarray
    k_off: np.ndarray
    m_diag: np.ndarray
    m_off: np.ndarray
    lumped: bool
    mesh: Mesh
    theta_hi: float     # rigorous upper bound on the largest pencil eigenvalue
    s_elem: np.ndarray  # per-element stiffness weights; v'Sv = sum s_e (dv_e)^2

    def dense(self):
        n = len(self.k_diag)
        K = np.diag(self.k_diag) + np.diag(self.k_off, 1) + np.diag(self.k_off, -1)
        M = np.diag(self.m_diag)
        if not self.lumped:
            M += np.diag(self.m_off, 1) + np.diag(self.m_off, -1)
        return K, M


@dataclass(frozen=True)
class SpectralSolution:
    lambda0: float
    lambda1: float
    u1: np.ndarray
    residual: float


def assemble(d: DistributionSpec, mesh: Mesh, lumped: bool = False) -> SpectralSystem:
    """Assemble rigidity and mass matrices with 5-point Gauss-Legendre
    quadrature per element; lumping replaces M by its row-sum diagonal."""
    x = mesh.nodes
    h = np.diff(x)
    gx, gw = _leggauss(5)
    t = 0.5 * (gx + 1.0)          # reference coordinate in (0, 1)
    w = 0.5 * gw
    pts = x[:-1, None] + h[:, None] * t[None, :]
    rho = dist.pdf(d, pts.ravel()).reshape(pts.shape)
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0.0):
        raise PreconditionError(
            "density must be positive and finite at quadrature nodes; "
            "use unbounded_limit or shrink to the interior")
    wrho = rho * w[None, :] * h[:, None]
    s = wrho.sum(axis=1) / h ** 2
    m00 = wrho @ ((1.0 - t) ** 2)
    m01 = wrho @ (t * (1.0 - t))
    m11 = wrho @ (t ** 2)

    n = mesh.n
    m_diag = np.zeros(n + 1)
    if lumped:
        m_diag[:-1] += m00 + m01
        m_diag[1:] += m01 + m11
        m_off = np.zeros(n)
        e00, e01, e11 = m00 + m01, np.zeros(n), m01 + m11
    else:
        m_diag[:-1] += m00
        m_diag[1:] += m11
        m_off = m01.copy()
        e00, e01, e11 = m00, m01, m11

    k_diag = m_diag.copy()
    k_diag[:-1] += s
    k_diag[1:] += s
    k_off = m_off - s

    # per-element pencil bound: theta_max <= max_e lambda_max(K_e, M_e)
    k00, k11 = s + e00, s + e11
    k01 = e01 - s
    A = e00 * e11 - e01 * e01
    B = -(k00 * e11 + k11 * e00 - 2.0 * k01 * e01)
    C = k00 * k11 - k01 * k01
    disc = np.clip(B * B - 4.0 * A * C, 0.0, None)
    theta_hi = float(np.max((-B + np.sqrt(disc)) / (2.0 * A)))
    return SpectralSystem(k_diag, k_off, m_diag, m_off, lumped, mesh,
                          theta_hi * (1.0 + 1e-8) + 1.0, s)


def _negcount(sys: SpectralSystem, theta: float) -> int:
    """Eigenvalues of the pencil (K, M) below theta, by LDL^T inertia.

    The pivot guard must preserve signs: strongly truncated densities span
    many orders of magnitude, so legitimately tiny positive pivots occur and
    only exact zeros may be forced negative (boundary convention).
    """
    kd = sys.k_diag
    ko = sys.k_off
    md = sys.m_diag
    mo = sys.m_off
    pivmin = 1e-290
    count = 0
    d = kd[0] - theta * md[0]
    if d == 0.0:
        d = -pivmin
    elif abs(d) < pivmin:
        d = math.copysign(pivmin, d)
    if d < 0.0:
        count += 1
    kol = ko.tolist()
    mol = mo.tolist()
    kdl = kd.tolist()
    mdl = md.tolist()
    for i in range(1, len(kdl)):
        e = kol[i - 1] - theta * mol[i - 1]
        d = kdl[i] - theta * mdl[i] - e * e / d
        if d == 0.0:
            d = -pivmin
        elif abs(d) < pivmin:
            d = math.copysign(pivmin, d)
        if d < 0.0:
            count += 1
    return count


def _bisect_eigenvalue(sys: SpectralSystem, k: int, maxiter: int = 200) -> float:
    """k-th smallest pencil eigenvalue (k = 1, 2) by inertia bisection."""
    lo, hi = 0.0, sys.theta_hi
    if _negcount(sys, hi) < k:
        hi *= 2.0
        if _negcount(sys, hi) < k:
            raise NumericalError("pencil eigenvalue bound failed")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if _negcount(sys, mid) >= k:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-7 * max(1.0, hi):
            return 0.5 * (lo + hi)
    raise NumericalError(f"bisection failed to localize pencil eigenvalue {k} "
                         f"within {maxiter} iterations")


def _tridiag_solve(sub, diag, sup, rhs):
    """Tridiagonal solve with partial pivoting (handles near-singular shifts)."""
    n = len(diag)
    c = diag.astype(float).copy()
    a = np.concatenate([[0.0], sub]).astype(float)
    b = np.concatenate([sup, [0.0]]).astype(float)
    d2 = np.zeros(n)  # second superdiagonal created by row swaps
    x = rhs.astype(float).copy()
    for i in range(n - 1):
        if abs(a[i + 1]) > abs(c[i]):
            c[i], a[i + 1] = a[i + 1], c[i]
            b[i], c[i + 1] = c[i + 1], b[i]
            d2[i], b[i + 1] = b[i + 1], d2[i]
            x[i], x[i + 1] = x[i + 1], x[i]
        piv = c[i]
        if piv == 0.0:
            piv = c[i] = 1e-300
        m = a[i + 1] / piv
        c[i + 1] -= m * b[i]
        b[i + 1] -= m * d2[i]
        x[i + 1] -= m * x[i]
    if c[-1] == 0.0:
        c[-1] = 1e-300
    x[-1] /= c[-1]
    if n >= 2:
        x[-2] = (x[-2] - b[-2] * x[-1]) / c[-2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - b[i] * x[i + 1] - d2[i] * x[i + 2]) / c[i]
    return x


def _mv(diag, off, v):
    out = diag * v
    if off is not None and len(off):
        out[:-1] += off * v[1:]
        out[1:] += off * v[:-1]
    return out


def solve_gap(sys: SpectralSystem) -> SpectralSolution:
    """Two smallest pencil eigenvalues and the gap eigenvector.

    Bisection brackets theta_0 and theta_1; inverse iteration (3 steps, fixed
    seed, M-orthogonalized against constants) polishes u1, whose stiffness
    Rayleigh quotient defines lambda1 without cancellation.
    """
    n1 = len(sys.k_diag)
    m_off = None if sys.lumped else sys.m_off
    ones = np.ones(n1)
    m_ones = _mv(sys.m_diag, m_off, ones)
    mass_total = float(ones @ m_ones)

    def rayleigh(v):
        energy = float(sys.s_elem @ np.diff(v) ** 2)  # cancellation-free v'Sv
        return energy / float(v @ _mv(sys.m_diag, m_off, v))

    lambda0 = rayleigh(ones)

    theta0 = _bisect_eigenvalue(sys, 1)
    theta1 = _bisect_eigenvalue(sys, 2)
    if not theta1 > theta0 + 1e-9 * max(1.0, theta1):
        raise NumericalError("bisection failed to separate the two smallest eigenvalues")

    rng = np.random.default_rng(_SEED)
    v = rng.standard_normal(n1)
    sub = sys.k_off - theta1 * sys.m_off
    diag = sys.k_diag - theta1 * sys.m_diag
    for _ in range(3):
        v = v - (float(v @ m_ones) / mass_total) * ones
        v = _tridiag_solve(sub, diag, sub, _mv(sys.m_diag, m_off, v))
        v /= float(np.max(np.abs(v)))
    v = v - (float(v @ m_ones) / mass_total) * ones
    if v[-1] < v[0]:
        v = -v
    v /= float(np.max(np.abs(v)))

    lambda1 = rayleigh(v)
    theta = lambda1 + 1.0
    res = _mv(sys.k_diag, sys.k_off, v) - theta * _mv(sys.m_diag, m_off, v)
    residual = float(np.max(np.abs(res))) / float(np.max(np.abs(v)))
    return SpectralSolution(lambda0, lambda1, v, residual)


def _bounded_standard_interval(std: DistributionSpec):
    zlo, zhi = dist._z_truncation(std)
    if not (np.isfinite(zlo) and np.isfinite(zhi)):
        raise PreconditionError(
            "FEM needs a bounded support; use unbounded_limit for infinite sides")
    return zlo, zhi


def poincare_fem(d: DistributionSpec, tol: float = 1e-6, n0: int = 500,
                 lumped: bool = False, max_elements: int = 2 ** 20):
    """Poincare constant by mesh-doubling P1 FEM with Richardson extrapolation.

    Doubles the element count from ``n0`` until consecutive gaps agree to
    relative ``tol``, then extrapolates the final pair at order 2.  Returns the
    estimate plus the sampled, centered, increasing gap eigenfunction.
    """
    if not tol > 0.0:
        raise ArgumentError("tol must be positive")
    std, factor = dist.standardize(d)
    zlo, zhi = _bounded_standard_interval(std)
    kinks = tuple(k for k in dist.interior_kinks(std))

    n = n0
    prev = None
    while True:
        if n > max_elements:
            raise ResourceError(f"mesh refinement exceeded {max_elements} elements")
        mesh = Mesh.uniform(zlo, zhi, n, kinks)
        sol = solve_gap(assemble(std, mesh, lumped=lumped))
        if prev is not None:
            rel = abs(sol.lambda1 - prev.lambda1) / sol.lambda1
            if rel <= tol:
                break
        prev, prev_mesh = sol, mesh
        n *= 2
    lam_star = sol.lambda1 + (sol.lambda1 - prev.lambda1) / 3.0  # order-2 Richardson

    value = factor / lam_star
    est = PoincareEstimate.of(value, Method.FEM, error_estimate=rel * value)

    # center against the discrete mass matrix of the final mesh
    sys_f = assemble(std, mesh, lumped=lumped)
    mo = None if sys_f.lumped else sys_f.m_off
    ones = np.ones_like(sol.u1)
    m_u = _mv(sys_f.m_diag, mo, sol.u1)
    m_1 = _mv(sys_f.m_diag, mo, ones)
    u = sol.u1 - (float(ones @ m_u) / float(ones @ m_1))
    u /= float(np.max(np.abs(u)))
    grid = d.location + d.scale * mesh.nodes
    ev = lambda x, g=grid, vals=u: np.interp(np.asarray(x, dtype=float), g, vals)
    sat = SaturatingFunction("sampled", sol.lambda1 / factor, ev, None, grid, u)
    return est, sat


def unbounded_limit(d: DistributionSpec, tol: float = 1e-3):
    """Constant of a law with >= 1 infinite side, by quantile exhaustion.

    Each infinite side is replaced by the quantile at mass eps for
    eps = 1e-3 ... 1e-6; the constants increase along the exhaustion and the
    last two must agree to 10*tol (relative), else ConvergenceError.  Slowly
    widening spectra (double-exponential tails) legitimately fail here; their
    closed forms live in the exact module.
    """
    std, factor = dist.standardize(d)
    zlo, zhi = dist._z_truncation(std)
    if np.isfinite(zlo) and np.isfinite(zhi):
        raise ArgumentError("support already bounded; use poincare_fem")
    values = []
    for eps in (1e-3, 1e-4, 1e-5, 1e-6):
        lo = None if np.isfinite(zlo) else float(dist.quantile(std, eps))
        hi = None if np.isfinite(zhi) else float(dist.quantile(std, 1.0 - eps))
        clipped = dist.truncate(std, lo, hi)
        est, _ = poincare_fem(clipped, tol=tol / 10.0)
        values.append(est.value)
    increment = abs(values[-1] - values[-2]) / values[-1]
    if increment > 10.0 * tol:
        raise ConvergenceError(
            f"exhaustion not stabilized: last increment {increment:.3e} > {10.0 * tol:.1e} "
            f"(values {values})")
    return PoincareEstimate.of(values[-1] * factor, Method.LIMIT,
                               error_estimate=increment * values[-1] * factor)
