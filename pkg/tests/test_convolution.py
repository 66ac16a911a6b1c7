import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kingman.convolution import (
    SampleBatch,
    combine,
    combine_scalar,
    convolve_batches,
    k_symmetrize,
    point_convolution_expectation,
)
from kingman.distributions import sample_rayleigh
from kingman.kernel import gauss_jacobi_rule, lambda_kernel
from kingman.radchf import chf_empirical, default_grid, radchf_empirical
from kingman.verify import ks_critical_1pct, ks_two_sample

nonneg = st.floats(0.0, 1e3, allow_nan=False)
orders = st.sampled_from([-0.5, 0.0, 0.3, 1.0, 4.0])


class TestSampleBatch:
    def test_column_from_vector(self):
        b = SampleBatch(0.0, [1.0, 2.0, 3.0])
        assert b.n == 3 and b.dim == 1

    @pytest.mark.parametrize("data", [[-1.0], [[np.inf]], np.zeros((0, 2))])
    def test_invalid(self, data):
        with pytest.raises(ValueError):
            SampleBatch(0.0, data)

    def test_point_mass(self):
        b = SampleBatch.point_mass(1.0, [1.0, 2.0], 4)
        assert b.data.shape == (4, 2)
        assert np.all(b.data == [1.0, 2.0])


class TestCombine:
    def test_unit_element(self, rng):
        assert combine_scalar(0.5, 2.7, 0.0, rng) == 2.7
        assert combine_scalar(0.5, 0.0, 2.7, rng) == 2.7

    def test_support(self, rng):
        z = combine(0.0, np.full(10**5, 3.0), 4.0, rng)
        assert z.min() >= 1.0 and z.max() <= 7.0

    def test_second_moment(self, rng):
        z2 = combine(1.0, np.full(10**6, 3.0), 4.0, rng) ** 2
        assert z2.mean() == pytest.approx(25.0, abs=4 * z2.std() / 1000)

    def test_negative(self, rng):
        with pytest.raises(ValueError):
            combine_scalar(0.0, -1.0, 1.0, rng)

    def test_minus_half_is_sum_or_difference(self, rng):
        z = combine(-0.5, np.full(1000, 3.0), 4.0, rng)
        assert set(np.round(z, 12)) == {1.0, 7.0}

    @settings(max_examples=200, deadline=None)
    @given(orders, nonneg, nonneg, st.integers(0, 2**32 - 1))
    def test_support_property(self, s, x, y, seed):
        z = combine_scalar(s, x, y, np.random.default_rng(seed))
        assert abs(x - y) <= z <= x + y

    @settings(max_examples=50, deadline=None)
    @given(orders, nonneg, st.integers(0, 2**32 - 1))
    def test_unit_property(self, s, x, seed):
        assert combine_scalar(s, x, 0.0, np.random.default_rng(seed)) == x


class TestPointConvolutionExpectation:
    def test_probability(self):
        assert point_convolution_expectation(1.0, 3.0, 4.0, lambda z: np.ones_like(z),
                                             gauss_jacobi_rule(1.0, 5)) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("s", [-0.5, 0.0, 0.5, 2.0])
    def test_second_moment_exact(self, s):
        assert point_convolution_expectation(s, 3.0, 4.0, lambda z: z**2,
                                             gauss_jacobi_rule(s, 2)) == pytest.approx(25.0, abs=1e-12)

    @pytest.mark.parametrize("s,t", [(0.0, 1.0), (0.5, 0.7), (1.0, 2.0), (3.0, 1.3)])
    def test_kernel_product_formula(self, s, t):
        x, y = 1.2, 0.8
        got = point_convolution_expectation(s, x, y, lambda z: lambda_kernel(s, t * z), gauss_jacobi_rule(s, 60))
        assert got == pytest.approx(lambda_kernel(s, t * x) * lambda_kernel(s, t * y), abs=1e-8)

    @pytest.mark.parametrize("s", [0.0, 1.0])
    def test_associativity(self, s):
        # (d_x o d_y) o d_w and d_x o (d_y o d_w) against a smooth test function
        x, y, w = 0.9, 1.4, 0.6
        rule = gauss_jacobi_rule(s, 40)

        def f(z):
            return np.exp(-z * z / 3.0)

        left = rule.expect(lambda u: np.array([
            point_convolution_expectation(s, zz, w, f, rule)
            for zz in np.sqrt(np.maximum(x * x + 2 * u * x * y + y * y, 0.0))]))
        right = rule.expect(lambda u: np.array([
            point_convolution_expectation(s, x, zz, f, rule)
            for zz in np.sqrt(np.maximum(y * y + 2 * u * y * w + w * w, 0.0))]))
        assert left == pytest.approx(right, abs=1e-6)

    def test_rule_order_mismatch(self):
        with pytest.raises(ValueError):
            point_convolution_expectation(1.0, 1.0, 1.0, np.cos, gauss_jacobi_rule(0.0, 3))


class TestConvolveBatches:
    def test_zero_batch_is_identity(self, rng):
        a = SampleBatch(0.5, sample_rayleigh(0.5, rng, size=(1000, 2)))
        out = convolve_batches(a, SampleBatch.point_mass(0.5, [0.0, 0.0], 1000), rng)
        np.testing.assert_array_equal(out.data, a.data)

    def test_mismatch(self, rng):
        a = SampleBatch(0.0, np.ones((3, 2)))
        with pytest.raises(ValueError):
            convolve_batches(a, SampleBatch(1.0, np.ones((3, 2))), rng)
        with pytest.raises(ValueError):
            convolve_batches(a, SampleBatch(0.0, np.ones((3, 1))), rng)

    def test_unequal_sizes_resample(self, rng):
        a = SampleBatch(0.0, np.ones((10, 1)))
        b = SampleBatch(0.0, np.full((25, 1), 2.0))
        out = convolve_batches(a, b, rng)
        assert out.n == 25
        assert out.meta["resampled"] == "a" and out.meta["resampled_from"] == 10

    def test_commutative_in_law(self, rng):
        n = 10**5
        s = 1.0
        a = SampleBatch(s, sample_rayleigh(s, rng, size=(n, 2)))
        b = SampleBatch(s, 0.5 + sample_rayleigh(s, rng, size=(n, 2)))
        grid = default_grid(2)
        ab, se_ab = radchf_empirical(convolve_batches(a, b, rng), grid, return_se=True)
        ba, se_ba = radchf_empirical(convolve_batches(b, a, rng), grid, return_se=True)
        assert np.all(np.abs(ab - ba) <= 4 * np.sqrt(se_ab**2 + se_ba**2))

    @pytest.mark.parametrize("s", [0.0, 1.5])
    def test_multiplicative(self, rng, s):
        n = 10**5
        a = SampleBatch(s, sample_rayleigh(s, rng, size=(n, 1)))
        b = SampleBatch(s, rng.exponential(size=(n, 1)))
        grid = default_grid(1)
        ab, se_ab = radchf_empirical(convolve_batches(a, b, rng), grid, return_se=True)
        ra, se_a = radchf_empirical(a, grid, return_se=True)
        rb, se_b = radchf_empirical(b, grid, return_se=True)
        se = np.sqrt(se_ab**2 + (rb * se_a) ** 2 + (ra * se_b) ** 2)
        assert np.all(np.abs(ab - ra * rb) <= 4 * se)

    @pytest.mark.parametrize("s", [0.0, 0.5, 2.0])
    def test_rayleigh_stability(self, rng, s):
        n = 10**5
        a = SampleBatch(s, sample_rayleigh(s, rng, size=n)).scaled(3.0)
        b = SampleBatch(s, sample_rayleigh(s, rng, size=n)).scaled(4.0)
        conv = convolve_batches(a, b, rng).data[:, 0]
        ref = 5.0 * sample_rayleigh(s, rng, size=n)
        assert ks_two_sample(conv, ref) < ks_critical_1pct(n, n)

    def test_ks_harness_rejects_wrong_scale(self, rng):
        n = 10**5
        a = 3.0 * sample_rayleigh(0.0, rng, size=n)
        b = 4.0 * sample_rayleigh(0.0, rng, size=n)
        assert ks_two_sample(a, b) > ks_critical_1pct(n, n)


class TestSymmetrize:
    def test_absolute_values(self, rng):
        batch = SampleBatch(0.0, rng.random((1000, 3)))
        np.testing.assert_array_equal(np.abs(k_symmetrize(batch, rng)), batch.data)

    def test_means_vanish(self, rng):
        batch = SampleBatch(0.0, 1 + rng.random((10**5, 2)))
        sym = k_symmetrize(batch, rng)
        assert np.all(np.abs(sym.mean(axis=0)) <= 4 * sym.std(axis=0) / math.sqrt(sym.shape[0]))

    def test_idempotent_in_law(self, rng):
        n = 10**5
        batch = SampleBatch(0.0, 1 + rng.random((n, 2)))
        once = k_symmetrize(batch, rng)
        twice = k_symmetrize(k_symmetrize(batch, rng), rng)
        grid = np.array([[0.5, 1.0], [1.0, -2.0], [2.0, 0.5]])
        c1, se1 = chf_empirical(once, grid, return_se=True)
        c2, se2 = chf_empirical(twice, grid, return_se=True)
        # 2 MC errors, one MC error being the 95% band (2 standard errors) of the difference
        assert np.all(np.abs(c1 - c2) <= 2 * (2 * np.sqrt(se1**2 + se2**2)))

    def test_imaginary_part_vanishes(self, rng):
        n = 10**5
        sym = k_symmetrize(SampleBatch(0.0, 1 + rng.random((n, 2))), rng)
        c = chf_empirical(sym, np.array([[0.5, 1.0], [2.0, -1.0]]))
        assert np.all(np.abs(c.imag) <= 4 / math.sqrt(n))
