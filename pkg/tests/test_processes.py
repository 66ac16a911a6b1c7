import math

import numpy as np
import pytest

from kingman.convolution import SampleBatch
from kingman.distributions import sample_rayleigh
from kingman.processes import (
    PathGrid,
    SymmetricLevySpec,
    bessel_increment,
    bessel_path,
    levy_ito_decompose_check,
    psi,
    sample_mu,
    simulate_brownian,
    simulate_kl_path,
    simulate_symmetric_levy_1d,
    transition_sample,
)
from kingman.radchf import LevyPair, chf_empirical, default_grid, levy_khinchine_radchf, radchf_empirical
from kingman.verify import TEST_PAIRS, ks_critical_1pct, ks_two_sample

N = 10**5


class TestPathGrid:
    @pytest.mark.parametrize("times", [[0.5, 1.0], [0.0, 1.0, 1.0], [0.0, 2.0, 1.0], []])
    def test_bad_times(self, times):
        with pytest.raises(ValueError):
            PathGrid(times, np.zeros((1, len(times), 1)))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            PathGrid([0.0, 1.0], np.zeros((1, 3, 1)))

    def test_off_grid(self):
        with pytest.raises(ValueError):
            PathGrid([0.0, 1.0], np.zeros((2, 1))).at(0.5)

    def test_single_path(self):
        grid = PathGrid([0.0, 1.0], np.arange(4.0).reshape(2, 2))
        assert grid.n_paths == 1 and grid.dim == 2
        np.testing.assert_array_equal(grid.at(1.0), [[2.0, 3.0]])


class TestBrownian:
    def test_second_moment(self, rng):
        w = simulate_brownian(3, [0.0, 0.5, 2.0], 0.7, rng, n_paths=N)
        sq = np.sum(w.at(2.0) ** 2, axis=1)
        assert sq.mean() == pytest.approx(3 * 0.7 * 2.0, abs=4 * sq.std() / math.sqrt(N))

    def test_starts_at_zero(self, rng):
        assert np.all(simulate_brownian(2, [0.0, 1.0], rng=rng, n_paths=10).at(0.0) == 0)

    def test_disjoint_increments_uncorrelated(self, rng):
        w = simulate_brownian(1, [0.0, 1.0, 3.0], rng=rng, n_paths=N)
        a = w.at(1.0)[:, 0]
        b = w.at(3.0)[:, 0] - a
        assert abs(np.corrcoef(a, b)[0, 1]) <= 4 / math.sqrt(N)

    def test_non_increasing(self, rng):
        with pytest.raises(ValueError):
            simulate_brownian(1, [0.0, 1.0, 0.5], rng=rng)


class TestBessel:
    def test_starts_at_zero(self, rng):
        assert np.all(bessel_path(0.5, [0.0, 1.0], rng, n_paths=5).at(0.0) == 0)

    def test_non_integer_dimension(self, rng):
        with pytest.raises(ValueError):
            bessel_path(0.25, [0.0, 1.0], rng)

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
    def test_marginal_is_rayleigh(self, rng, s):
        b1 = bessel_path(s, [0.0, 1.0], rng, n_paths=N).at(1.0)[:, 0]
        assert ks_two_sample(b1, sample_rayleigh(s, rng, size=N)) < ks_critical_1pct(N, N)

    @pytest.mark.parametrize("s", [0.0, 1.0])
    def test_radchf(self, rng, s):
        t = 2.0
        b = bessel_path(s, [0.0, t], rng, n_paths=N).at(t)
        x = np.array([[0.5], [1.0], [2.0]])
        ref = np.exp(-t * x[:, 0] ** 2 / (4 * (s + 1)))
        assert np.all(np.abs(radchf_empirical(SampleBatch(s, b), x) - ref) <= 4 / math.sqrt(N))

    def test_standard_flag(self, rng):
        b = bessel_path(0.5, [0.0, 1.0], rng, n_paths=N, standard=True).at(1.0)[:, 0]
        # |W_1|^2 is chi-square with 3 degrees of freedom
        assert (b**2).mean() == pytest.approx(3.0, abs=4 * (b**2).std() / math.sqrt(N))

    def test_increment_rejects_zero_length(self, rng):
        _, w = bessel_path(0.0, [0.0, 1.0], rng, return_brownian=True)
        with pytest.raises(ValueError):
            bessel_increment(w, 1.0, 1.0)
        with pytest.raises(ValueError):
            bessel_increment(w, 0.0, 0.5)

    def test_increments_stationary(self, rng):
        s = 0.0
        b, w = bessel_path(s, [0.0, 1.0, 2.0], rng, n_paths=N, return_brownian=True)
        inc = bessel_increment(w, 1.0, 2.0)
        # |W_2 - W_1| is independent of B_1 = |W_1| and should share its law
        assert ks_two_sample(inc, b.at(1.0)[:, 0]) < ks_critical_1pct(N, N)
        x = np.array([[0.5], [1.0], [2.0]])
        ref = np.exp(-x[:, 0] ** 2 / (4 * (s + 1)))
        assert np.all(np.abs(radchf_empirical(SampleBatch(s, inc), x) - ref) <= 4 / math.sqrt(N))


class TestKingmanLevy:
    def test_trivial_pair(self, rng):
        paths = simulate_kl_path(LevyPair(0.0, [0.0, 0.0]), [0.0, 1.0, 2.0], rng, n_paths=10)
        assert np.all(paths.states == 0)

    def test_invalid_pair(self, rng):
        with pytest.raises(ValueError):
            simulate_kl_path(LevyPair(0.0, [1.0], [[0.0]], [1.0]), [0.0, 1.0], rng)

    def test_nonnegative(self, rng):
        paths = simulate_kl_path(TEST_PAIRS["atom+lambda"], [0.0, 0.5, 1.0], rng, n_paths=1000, dt=0.05)
        assert np.all(paths.states >= 0)

    def test_rayleighian_marginal(self, rng):
        pair = LevyPair(1.0, [0.8, 0.3])
        paths = simulate_kl_path(pair, [0.0, 0.7, 2.0], rng, n_paths=N, dt=0.1)
        grid = default_grid(2)
        for t in (0.7, 2.0):
            emp = radchf_empirical(SampleBatch(1.0, paths.at(t)), grid)
            assert np.all(np.abs(emp - levy_khinchine_radchf(pair.scaled(t), grid)) <= 4 / math.sqrt(N))

    @pytest.mark.parametrize("s", [0.0, 1.5])
    def test_single_atom(self, rng, s):
        pair = LevyPair(s, [0.0], [[1.0]], [1.0])
        t = 1.0
        paths = simulate_kl_path(pair, [0.0, t], rng, n_paths=N, dt=0.05)
        grid = default_grid(1)
        emp = radchf_empirical(SampleBatch(s, paths.at(t)), grid)
        assert np.all(np.abs(emp - levy_khinchine_radchf(pair.scaled(t), grid)) <= 4 / math.sqrt(N))

    def test_grid_refinement(self, rng):
        pair = LevyPair(0.5, [1.0])
        coarse = simulate_kl_path(pair, [0.0, 1.0], rng, n_paths=N, dt=0.1).at(1.0)[:, 0]
        fine = simulate_kl_path(pair, [0.0, 1.0], rng, n_paths=N, dt=0.05).at(1.0)[:, 0]
        assert ks_two_sample(coarse, fine) < ks_critical_1pct(N, N)

    def test_mu_has_semigroup_exponent(self, rng):
        pair = TEST_PAIRS["atom+lambda"]
        draws = sample_mu(pair, 0.8, rng, N)
        grid = default_grid(2)
        emp = radchf_empirical(SampleBatch(pair.order, draws), grid)
        assert np.all(np.abs(emp - levy_khinchine_radchf(pair.scaled(0.8), grid)) <= 4 / math.sqrt(N))


class TestTransition:
    def test_from_origin_is_mu(self, rng):
        pair = TEST_PAIRS["single-atom"]
        draws = transition_sample(pair, 1.0, [0.0], rng, n=N)
        grid = default_grid(1)
        emp = radchf_empirical(SampleBatch(pair.order, draws), grid)
        assert np.all(np.abs(emp - levy_khinchine_radchf(pair.scaled(1.0), grid)) <= 4 / math.sqrt(N))

    def test_trivial_pair_returns_x(self, rng):
        x = np.array([0.3, 1.7])
        np.testing.assert_array_equal(transition_sample(LevyPair(0.0, [0.0, 0.0]), 1.0, x, rng), x)

    def test_nonpositive_time(self, rng):
        with pytest.raises(ValueError):
            transition_sample(TEST_PAIRS["rayleighian"], 0.0, [0.0, 0.0], rng)

    @pytest.mark.parametrize("name", list(TEST_PAIRS))
    def test_chapman_kolmogorov(self, rng, name):
        pair = TEST_PAIRS[name]
        x0 = np.array([0.7, 1.2][: pair.dim])
        two = transition_sample(pair, 0.6, transition_sample(pair, 0.4, x0, rng, n=N), rng)
        one = transition_sample(pair, 1.0, x0, rng, n=N)
        grid = default_grid(pair.dim)
        r2, se2 = radchf_empirical(SampleBatch(pair.order, two), grid, return_se=True)
        r1, se1 = radchf_empirical(SampleBatch(pair.order, one), grid, return_se=True)
        assert np.all(np.abs(r2 - r1) <= 4 * np.sqrt(se1**2 + se2**2))


class TestSymmetricLevy:
    def test_psi(self):
        assert psi(SymmetricLevySpec(1.0), 1.0) == pytest.approx(0.5)
        assert psi(SymmetricLevySpec(0.0, [(1.0, 1.0)]), math.pi) == pytest.approx(2.0)

    @pytest.mark.parametrize("atoms", [[(0.0, 1.0)], [(1.0, -1.0)], [(np.inf, 1.0)]])
    def test_invalid_spec(self, atoms):
        with pytest.raises(ValueError):
            SymmetricLevySpec(1.0, atoms)

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            SymmetricLevySpec(-1.0)

    def test_brownian(self, rng):
        t = 1.5
        paths = simulate_symmetric_levy_1d(SymmetricLevySpec(1.0), [0.0, t], rng, n_paths=N)
        x = np.array([0.25, 0.5, 1.0, 2.0])
        emp = chf_empirical(paths.at(t), x[:, None])
        assert np.all(np.abs(emp - np.exp(-t * x**2 / 2)) <= 4 / math.sqrt(N))
        assert np.all(paths.at(0.0) == 0)

    def test_compound_poisson(self, rng):
        t = 1.0
        spec = SymmetricLevySpec(0.0, [(1.0, 2.0)])
        paths = simulate_symmetric_levy_1d(spec, [0.0, t], rng, n_paths=N, dt=0.1)
        x = np.array([0.5, 1.0, 2.0, math.pi])
        emp = chf_empirical(paths.at(t), x[:, None])
        assert np.all(np.abs(emp - np.exp(-t * 2 * (1 - np.cos(x)))) <= 4 / math.sqrt(N))

    def test_dict_round_trip(self):
        spec = SymmetricLevySpec(0.5, [(1.0, 2.0), (0.3, 4.0)])
        assert SymmetricLevySpec.from_dict(spec.to_dict()) == spec

    @pytest.mark.parametrize("spec", [
        SymmetricLevySpec(1.0),
        SymmetricLevySpec(0.0, [(1.0, 1.0)]),
        SymmetricLevySpec(1.0, [(1.0, 1.0)]),
    ])
    def test_decomposition(self, rng, spec):
        rep = levy_ito_decompose_check(spec, 1.0, N, rng)
        assert rep.passed
        assert rep.threshold == pytest.approx(4 / math.sqrt(N))
