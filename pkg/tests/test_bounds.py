import math

import numpy as np
import pytest

from poincare1d import bounds, dist, exact, fem
from poincare1d.dist import DistributionSpec, Family
from poincare1d.errors import NotApplicableError, PreconditionError

from conftest import ALL_FAMILIES, random_spec

UNIT_UNIFORM = DistributionSpec(Family.UNIFORM, 0.5, 0.5)
TRIANGULAR = DistributionSpec(Family.TRIANGULAR)
NORMAL = DistributionSpec(Family.NORMAL)


class TestMuckenhoupt:
    def test_unit_uniform_analytic_max(self):
        # sup of (1-x)(x-1/2) over (1/2, 1) is 1/16 at x = 3/4
        rep = bounds.muckenhoupt(UNIT_UNIFORM)
        assert rep.details["A_plus"] == pytest.approx(1.0 / 16.0, abs=1e-9)
        assert rep.lower == pytest.approx(1.0 / 32.0, abs=1e-9)
        assert rep.upper == pytest.approx(0.25, abs=1e-9)
        assert rep.lower <= 1.0 / math.pi ** 2 <= rep.upper

    def test_exponential_half_line(self):
        rep = bounds.muckenhoupt(DistributionSpec(Family.EXPONENTIAL))
        # sup of 1 - 2 e^{-x} approached at the far tail; grid stops at mass 1/4002
        assert rep.details["A_plus"] == pytest.approx(1.0, abs=2e-3)
        assert rep.lower == pytest.approx(0.5, abs=1e-3)
        assert rep.upper == pytest.approx(4.0, abs=4e-3)

    def test_triangular_brackets_exact_constant(self):
        rep = bounds.muckenhoupt(TRIANGULAR)
        assert rep.lower <= 0.1729 <= rep.upper


class TestTransports:
    def test_triangular_doubleexp_is_one(self):
        # sup of min(F,1-F)/rho sits at the mode
        assert bounds.transport_doubleexp_bound(TRIANGULAR) == pytest.approx(1.0, abs=1e-9)

    def test_triangular_logistic(self):
        assert bounds.transport_logistic_bound(TRIANGULAR) == pytest.approx(0.296, abs=5e-4)

    def test_standard_normal_doubleexp(self):
        assert bounds.transport_doubleexp_bound(NORMAL) == pytest.approx(2.0 * math.pi, rel=1e-9)

    def test_halfline_normal_values(self):
        d = DistributionSpec(Family.NORMAL, truncation=(-1.875, None))
        assert bounds.transport_doubleexp_bound(d) == pytest.approx(5.912, abs=5e-3)
        assert bounds.transport_logistic_bound(d) == pytest.approx(1.484, abs=5e-3)

    def test_logistic_self_transport_is_tight(self):
        assert bounds.transport_logistic_bound(DistributionSpec(Family.LOGISTIC)) == \
            pytest.approx(4.0, rel=1e-9)

    def test_gumbel_window(self):
        d = DistributionSpec(Family.GUMBEL,
                             truncation=((500.0 - 1013.0) / 558.0, (3000.0 - 1013.0) / 558.0))
        assert bounds.transport_logistic_bound(d) == pytest.approx(2.418, abs=5e-3)

    def test_ordering_logistic_below_doubleexp(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            d = random_spec(rng)
            assert bounds.transport_logistic_bound(d) <= \
                bounds.transport_doubleexp_bound(d) * (1.0 + 1e-12)


class TestSymmetricRestriction:
    def test_gaussian_window_mass_squared(self):
        import scipy.special
        z = float(scipy.special.erf(3.0 / math.sqrt(2.0)))
        got = bounds.symmetric_restriction_bound(NORMAL, (-3.0, 3.0), 1.0)
        assert got == pytest.approx(z * z, rel=1e-10)
        # upper-bounds the exact constant on the same window
        est, _ = exact.truncated_normal_constant(-3.0, 3.0)
        assert est.value <= got

    def test_laplace_window(self):
        d = DistributionSpec(Family.DOUBLE_EXPONENTIAL)
        mass = dist.cdf(d, 2.0) - dist.cdf(d, -2.0)
        assert bounds.symmetric_restriction_bound(d, (-2.0, 2.0), 4.0) == \
            pytest.approx(4.0 * mass * mass, rel=1e-12)

    def test_full_support_returns_parent(self):
        assert bounds.symmetric_restriction_bound(NORMAL, (-np.inf, np.inf), 1.0) == \
            pytest.approx(1.0)

    def test_mass_balance_precondition(self):
        with pytest.raises(PreconditionError):
            bounds.symmetric_restriction_bound(NORMAL, (-1.0, 3.0), 1.0)
        with pytest.raises(PreconditionError):
            bounds.symmetric_restriction_bound(DistributionSpec(Family.GUMBEL), (-1, 1), 1.0)


class TestSmallClosedForms:
    def test_gaussian_uniform_comparison(self):
        assert bounds.gaussian_symmetric_uniform_bound(math.pi / 2.0) == pytest.approx(1.0)
        b1 = bounds.gaussian_symmetric_uniform_bound(1.0)
        assert b1 == pytest.approx(0.4053, abs=1e-4)
        assert b1 > 1.0 / 3.0  # dominated by the exact 1/3 on [-1, 1]
        # at b = 3 the transport route wins
        assert bounds.gaussian_symmetric_uniform_bound(3.0) == pytest.approx(3.648, abs=1e-3)
        assert bounds.symmetric_restriction_bound(NORMAL, (-3, 3), 1.0) < \
            bounds.gaussian_symmetric_uniform_bound(3.0)

    def test_bounded_perturbation(self):
        assert bounds.bounded_perturbation_bound(1.7, 0.0) == 1.7
        assert bounds.bounded_perturbation_bound(0.3, math.log(2.0)) == pytest.approx(0.6)

    def test_perturbation_dominates_exact_gaussian_window(self):
        # uniform base perturbed by the Gaussian weight: e^{b^2/2} * C_P(U[-b,b])
        for b in (0.8, 1.5, 2.5):
            base, _ = exact.uniform_constant(-b, b)
            osc = 0.5 * b * b
            bound = bounds.bounded_perturbation_bound(base.value, osc)
            est, _ = exact.truncated_normal_constant(-b, b)
            assert est.value <= bound + 1e-12


class TestBakryEmery:
    def test_gaussian_exact(self):
        assert bounds.bakry_emery_bound(NORMAL) == pytest.approx(1.0, rel=1e-12)
        assert bounds.bakry_emery_bound(DistributionSpec(Family.NORMAL, 0.0, 3.0)) == \
            pytest.approx(9.0, rel=1e-12)

    def test_zero_curvature_not_applicable(self):
        with pytest.raises(NotApplicableError):
            bounds.bakry_emery_bound(DistributionSpec(Family.DOUBLE_EXPONENTIAL))
        with pytest.raises(NotApplicableError):
            bounds.bakry_emery_bound(UNIT_UNIFORM)

    def test_truncated_gumbel_positive_curvature(self):
        d = DistributionSpec(Family.GUMBEL, truncation=(-1.0, 2.0))
        # V'' = e^{-z}: infimum at the right end
        assert bounds.bakry_emery_bound(d) == pytest.approx(math.exp(2.0), rel=1e-6)


class TestVarianceLowerBound:
    def test_reference_values(self):
        assert bounds.variance_lower_bound(TRIANGULAR) == pytest.approx(0.167, abs=5e-4)
        assert bounds.variance_lower_bound(NORMAL) == pytest.approx(1.0, rel=1e-12)
        d = DistributionSpec(Family.GUMBEL,
                             truncation=((500.0 - 1013.0) / 558.0, (3000.0 - 1013.0) / 558.0))
        assert bounds.variance_lower_bound(d) == pytest.approx(1.012, abs=5e-3)


class TestChen:
    def test_gaussian_linear_test_function(self):
        grid = np.linspace(-6.0, 6.0, 3001)
        gap = bounds.chen_lower_gap(NORMAL, grid, np.ones_like(grid))
        assert gap == pytest.approx(1.0, abs=1e-6)

    def test_uniform_cosine(self):
        grid = np.linspace(1e-4, 1.0 - 1e-4, 2001)
        gp = math.pi * np.sin(math.pi * grid)
        gap = bounds.chen_lower_gap(UNIT_UNIFORM, grid, gp)
        assert gap == pytest.approx(math.pi ** 2, rel=1e-4)

    def test_triangular_saturating_function(self):
        est, sat = exact.triangular_constant()
        grid = np.linspace(0.01, 0.985, 1000)  # one-sided: V' kink at 0 excluded
        gap = bounds.chen_lower_gap(TRIANGULAR, grid, sat.derivative(grid))
        assert gap >= est.spectral_gap - 1e-3
        assert gap <= est.spectral_gap + 1e-3

    def test_positivity_precondition(self):
        grid = np.linspace(-1.0, 1.0, 100)
        with pytest.raises(PreconditionError):
            bounds.chen_lower_gap(NORMAL, grid, grid)


class TestSandwichOnExactConstants:
    def test_known_constants_sit_inside_every_bound(self):
        cases = [
            (DistributionSpec(Family.UNIFORM, 0.5, 0.5),
             exact.uniform_constant(0.0, 1.0)[0].value),
            (TRIANGULAR, exact.triangular_constant()[0].value),
            (DistributionSpec(Family.DOUBLE_EXPONENTIAL, truncation=(-1.0, 1.0)),
             exact.truncated_doubleexp_constant(-1.0, 1.0)[0].value),
            (DistributionSpec(Family.DOUBLE_EXPONENTIAL, truncation=(0.5, 3.0)),
             exact.truncated_doubleexp_constant(0.5, 3.0)[0].value),
            (DistributionSpec(Family.NORMAL, truncation=(-2.0, 2.0)),
             exact.truncated_normal_constant(-2.0, 2.0)[0].value),
            (DistributionSpec(Family.NORMAL, truncation=(-0.7, 1.8)),
             exact.truncated_normal_constant(-0.7, 1.8)[0].value),
        ]
        for d, c_star in cases:
            muck = bounds.muckenhoupt(d)
            assert muck.lower <= c_star + 1e-9
            assert c_star <= muck.upper + 1e-9
            assert bounds.variance_lower_bound(d) <= c_star + 1e-9
            assert c_star <= bounds.transport_doubleexp_bound(d) + 1e-9
            assert c_star <= bounds.transport_logistic_bound(d) + 1e-9
            try:
                assert c_star <= bounds.bakry_emery_bound(d) + 1e-9
            except NotApplicableError:
                pass


class TestBoundReports:
    def test_sentinel_sides_compose(self):
        reports = {r.method.value: r for r in bounds.bound_reports(NORMAL)}
        assert math.isinf(reports["transport_doubleexp"].lower)
        assert reports["transport_doubleexp"].upper == pytest.approx(2 * math.pi, rel=1e-9)
        assert math.isinf(reports["variance"].upper)
        assert reports["variance"].lower == pytest.approx(1.0, rel=1e-12)
        muck = reports["muckenhoupt"]
        assert muck.lower <= 1.0 <= muck.upper
        assert reports["bakry_emery"].upper == pytest.approx(1.0, rel=1e-12)

    def test_inapplicable_methods_are_omitted(self):
        methods = {r.method.value for r in bounds.bound_reports(UNIT_UNIFORM)}
        assert "bakry_emery" not in methods
        assert {"muckenhoupt", "transport_doubleexp", "transport_logistic",
                "variance"} <= methods


class TestRestrictionMonotonicity:
    @pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f.value)
    def test_nested_windows(self, fam):
        rng = np.random.default_rng(100 + hash(fam.value) % 997)
        exact_families = {Family.UNIFORM, Family.DOUBLE_EXPONENTIAL}
        reps = 50 if fam in exact_families else 12
        for _ in range(reps):
            base = DistributionSpec(fam)
            pa, pb = float(rng.uniform(0.02, 0.3)), float(rng.uniform(0.7, 0.98))
            qa, qb = float(dist.quantile(base, pa)), float(dist.quantile(base, pb))
            outer = dist.truncate(base, qa, qb)
            shrink = 0.25 * float(rng.uniform(0.2, 1.0)) * (qb - qa)
            inner = dist.truncate(base, qa + shrink, qb - shrink)

            def constant(d):
                if fam in exact_families:
                    return exact.exact_constant(d)[0].value
                return fem.poincare_fem(d, tol=1e-6, n0=250)[0].value

            assert constant(inner) <= constant(outer) + 1e-6
