import json
import math

import numpy as np
import pytest
import scipy.integrate
import scipy.special

from poincare1d import dist
from poincare1d.dist import DistributionSpec, Family
from poincare1d.errors import ArgumentError, DomainError

from conftest import ALL_FAMILIES, pdf_integral_oracle, random_spec

SQRT2PI = math.sqrt(2.0 * math.pi)


class TestPdf:
    def test_triangular_peak(self):
        assert dist.pdf(DistributionSpec(Family.TRIANGULAR), 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_standard_normal_at_zero(self):
        assert dist.pdf(DistributionSpec(Family.NORMAL), 0.0) == pytest.approx(1.0 / SQRT2PI, rel=1e-14)

    def test_truncated_normal_uses_erf_mass(self):
        # oracle mass from scipy's erf, independent of the package CDF
        z_oracle = scipy.special.erf(3.0 / math.sqrt(2.0))
        d = DistributionSpec(Family.NORMAL, truncation=(-3.0, 3.0))
        assert dist.pdf(d, 0.0) == pytest.approx((1.0 / SQRT2PI) / z_oracle, rel=1e-13)

    def test_zero_outside_window(self):
        d = DistributionSpec(Family.NORMAL, truncation=(-1.0, 1.0))
        assert dist.pdf(d, 1.5) == 0.0
        assert dist.pdf(d, -2.0) == 0.0


class TestPotential:
    def test_normal_derivatives(self):
        _, v1, v2 = dist.potential(DistributionSpec(Family.NORMAL), 2.0)
        assert v1 == pytest.approx(2.0, abs=1e-14)
        assert v2 == pytest.approx(1.0, abs=1e-14)

    def test_double_exponential_slope(self):
        _, v1, v2 = dist.potential(DistributionSpec(Family.DOUBLE_EXPONENTIAL), -1.5)
        assert v1 == pytest.approx(-1.0, abs=1e-14)
        assert v2 == 0.0

    def test_triangular_slope_matches_finite_differences(self):
        d = DistributionSpec(Family.TRIANGULAR)
        _, v1, _ = dist.potential(d, 0.5)
        assert v1 == pytest.approx(2.0, rel=1e-13)
        for h in (1e-3, 1e-4):
            fd = (-math.log(1.0 - 0.5 - h) + math.log(1.0 - 0.5 + h)) / (2.0 * h)
            assert abs(fd - v1) < 5.0 * h * h / (1 - 0.5) ** 3

    def test_kinks_have_no_second_derivative(self):
        for fam in (Family.TRIANGULAR, Family.DOUBLE_EXPONENTIAL):
            assert dist.potential(DistributionSpec(fam), 0.0)[2] is None

    def test_outside_support_raises(self):
        with pytest.raises(DomainError):
            dist.potential(DistributionSpec(Family.TRIANGULAR), 1.5)
        with pytest.raises(DomainError):
            dist.potential(DistributionSpec(Family.NORMAL, truncation=(0.0, 2.0)), -1.0)

    def test_pdf_equals_exp_of_minus_v(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            d = random_spec(rng)
            lo, hi = dist.support(d)
            x = float(rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)))
            v, _, _ = dist.potential(d, x)
            assert math.exp(-v) == pytest.approx(dist.pdf(d, x), rel=1e-12)


class TestCdfQuantile:
    def test_gumbel_at_zero(self):
        assert dist.cdf(DistributionSpec(Family.GUMBEL), 0.0) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_logistic_median(self):
        assert dist.cdf(DistributionSpec(Family.LOGISTIC), 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_truncated_normal_median_is_zero(self):
        d = DistributionSpec(Family.NORMAL, truncation=(-3.0, 3.0))
        assert dist.quantile(d, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_quantile_domain(self):
        d = DistributionSpec(Family.NORMAL)
        for bad in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(DomainError):
                dist.quantile(d, bad)

    def test_normal_quantile_against_scipy(self):
        d = DistributionSpec(Family.NORMAL)
        for p in (1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9):
            assert dist.quantile(d, p) == pytest.approx(
                scipy.special.ndtri(p), rel=1e-12, abs=1e-13)


class TestIntervalMoments:
    def test_triangular_variance(self):
        m = dist.interval_moments(DistributionSpec(Family.TRIANGULAR))
        assert m.mean == pytest.approx(0.0, abs=1e-14)
        assert m.variance == pytest.approx(1.0 / 6.0, rel=1e-12)

    def test_standard_normal(self):
        m = dist.interval_moments(DistributionSpec(Family.NORMAL))
        assert m.variance == pytest.approx(1.0, rel=1e-13)

    def test_truncated_normal_closed_form(self):
        d = DistributionSpec(Family.NORMAL, truncation=(-3.0, 3.0))
        z = scipy.special.erf(3.0 / math.sqrt(2.0))
        phi3 = math.exp(-4.5) / SQRT2PI
        expected = 1.0 - 2.0 * 3.0 * phi3 / z
        m = dist.interval_moments(d)
        assert m.variance == pytest.approx(expected, rel=1e-12)
        # cross-check with an independent quadrature of the second moment
        quad = scipy.integrate.quad(lambda x: x * x * dist.pdf(d, x), -3, 3)[0]
        assert m.variance == pytest.approx(quad, abs=1e-8)

    def test_quadrature_path_matches_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(15):
            d = random_spec(rng)
            lo, hi = dist.support(d)
            mean = scipy.integrate.quad(
                lambda x: x * dist.pdf(d, x), lo, hi,
                points=dist.interior_kinks(d), limit=200)[0]
            var = scipy.integrate.quad(
                lambda x: (x - mean) ** 2 * dist.pdf(d, x), lo, hi,
                points=dist.interior_kinks(d), limit=200)[0]
            m = dist.interval_moments(d)
            assert m.mean == pytest.approx(mean, abs=1e-8)
            assert m.variance == pytest.approx(var, abs=1e-8)


class TestStandardize:
    def test_scaled_normal(self):
        d = DistributionSpec(Family.NORMAL, 0.0, 50.0, (-150.0, 150.0))
        s, factor = dist.standardize(d)
        assert s.truncation == (-3.0, 3.0)
        assert (s.location, s.scale) == (0.0, 1.0)
        assert factor == 2500.0

    def test_flood_gumbel_window(self):
        d = DistributionSpec(Family.GUMBEL, 1013.0, 558.0, (500.0, 3000.0))
        s, factor = dist.standardize(d)
        assert s.truncation[0] == pytest.approx(-0.919355, abs=5e-7)
        assert s.truncation[1] == pytest.approx(3.560932, abs=5e-7)
        assert factor == pytest.approx(558.0 ** 2)

    def test_unit_uniform(self):
        s, factor = dist.standardize(DistributionSpec(Family.UNIFORM, 8.0, 1.0))
        assert s == DistributionSpec(Family.UNIFORM)
        assert factor == 1.0


class TestInvariants:
    @pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f.value)
    def test_mass_monotonicity_inverse(self, fam):
        rng = np.random.default_rng(hash(fam.value) % 2 ** 31)
        for k in range(100):
            truncated = bool(k % 2)
            d = random_spec(rng, family=fam, truncated=truncated)
            if k < 10:  # quadrature oracle is slow; spot-check the mass
                assert pdf_integral_oracle(d) == pytest.approx(1.0, abs=1e-8)
            ps = np.sort(rng.uniform(0.005, 0.995, size=12))
            xs = dist.quantile(d, ps)
            cs = dist.cdf(d, xs)
            assert np.all(np.diff(cs) >= -1e-14)  # monotone cdf
            assert np.allclose(cs, ps, atol=1e-8)  # quantile is the inverse
            back = dist.quantile(d, np.clip(cs, 1e-12, 1 - 1e-12))
            assert np.allclose(back, xs, atol=1e-8 * max(1.0, float(np.max(np.abs(xs)))))

    @pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f.value)
    def test_potential_derivative_by_central_differences(self, fam):
        rng = np.random.default_rng(42 + hash(fam.value) % 1000)
        for _ in range(10):
            d = random_spec(rng, family=fam)
            lo, hi = dist.support(d)
            x = float(rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)))
            if any(abs(x - k) < 0.05 * d.scale for k in dist.interior_kinks(d)):
                continue
            _, v1, _ = dist.potential(d, x)
            errs = []
            for h in (1e-3 * d.scale, 1e-4 * d.scale):
                vp = dist.potential(d, x + h)[0]
                vm = dist.potential(d, x - h)[0]
                errs.append(abs((vp - vm) / (2.0 * h) - v1))
            assert errs[0] < 1e-2
            # second order in h, down to the roundoff floor of the difference
            assert errs[1] <= errs[0] / 25.0 + 1e-9


class TestConstruction:
    def test_truncation_composes_by_intersection(self):
        d = DistributionSpec(Family.NORMAL, truncation=(-2.0, 3.0))
        t = dist.truncate(d, 0.0, 5.0)
        assert t.truncation == (0.0, 3.0)

    def test_empty_intersection_rejected(self):
        d = DistributionSpec(Family.NORMAL, truncation=(-2.0, -1.0))
        with pytest.raises(ArgumentError):
            dist.truncate(d, 0.0, 1.0)

    def test_bad_scale_and_window(self):
        with pytest.raises(ArgumentError):
            DistributionSpec(Family.NORMAL, 0.0, -1.0)
        with pytest.raises(ArgumentError):
            DistributionSpec(Family.NORMAL, truncation=(2.0, 2.0))
        with pytest.raises(ArgumentError):
            DistributionSpec(Family.UNIFORM, 0.0, 1.0, (5.0, 9.0))  # no mass

    def test_json_round_trip(self):
        raw = {"family": "normal", "location": 30, "scale": 8, "truncation": [15, None]}
        d = DistributionSpec.from_dict(raw)
        assert d.truncation == (15.0, math.inf)
        again = DistributionSpec.from_dict(json.loads(json.dumps(d.to_dict())))
        assert again == d

    def test_unknown_family_rejected(self):
        with pytest.raises(ArgumentError):
            DistributionSpec.from_dict({"family": "weibull"})
