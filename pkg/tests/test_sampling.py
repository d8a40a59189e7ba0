"""Tests for Poisson/Wiener sampling and the per-path seeding contract."""

import numpy as np
import pytest
from scipy import stats

import indproc as ip

N_BIG = 100_000


@pytest.fixture(scope="module")
def rate2_counts():
    """Counts of rate-2 paths on [0, 10], read at t=2 and t=10."""
    intensity = ip.ConstantIntensity(2.0)
    at_2 = np.empty(N_BIG)
    at_10 = np.empty(N_BIG)
    for i in range(N_BIG):
        path = ip.sample_poisson_path(intensity, 10.0, ip.SeedSpec(2024, i))
        at_2[i] = path.count(2.0)
        at_10[i] = path.count(10.0)
    return at_2, at_10


def test_zero_intensity_gives_empty_path():
    path = ip.sample_poisson_path(ip.ConstantIntensity(0.0), 5.0, ip.SeedSpec(0, 0))
    assert len(path.times) == 0
    assert path.count(5.0) == 0


def test_same_seed_gives_bitwise_identical_paths():
    a = ip.sample_poisson_path(ip.ConstantIntensity(2.0), 10.0, ip.SeedSpec(5, 17))
    b = ip.sample_poisson_path(ip.ConstantIntensity(2.0), 10.0, ip.SeedSpec(5, 17))
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.sizes, b.sizes)


def test_mean_count_matches_poisson_mean(rate2_counts):
    _, at_10 = rate2_counts
    # Var[N(10)] = 20, so the sample mean has s.e. sqrt(20 / n)
    assert abs(at_10.mean() - 20.0) <= 4.0 * np.sqrt(20.0 / N_BIG)


def test_count_distribution_matches_poisson_pmf(rate2_counts):
    at_2, _ = rate2_counts  # rate * t = 4
    mean = 4.0
    pmf = np.exp(-mean)
    for k in range(9):
        if k > 0:
            pmf *= mean / k
        freq = np.mean(at_2 == k)
        se = np.sqrt(pmf * (1.0 - pmf) / N_BIG)
        assert abs(freq - pmf) <= 4.0 * se, f"k={k}: freq={freq} pmf={pmf}"


def test_counts_start_at_zero_and_never_decrease():
    grid = np.linspace(0.0, 6.0, 301)
    for i in range(300):
        path = ip.sample_poisson_path(ip.ConstantIntensity(1.5), 6.0, ip.SeedSpec(9, i))
        counts = path.count(grid)
        assert counts[0] == 0
        assert np.all(np.diff(counts) >= 0)
        assert np.all(path.times > 0.0) and np.all(path.times <= 6.0)
        assert np.all(np.diff(path.times) > 0.0)


def test_invalid_rate_and_horizon_rejected():
    with pytest.raises(ValueError):
        ip.ConstantIntensity(-1.0)
    with pytest.raises(ValueError):
        ip.sample_poisson_path(ip.ConstantIntensity(1.0), -2.0, ip.SeedSpec(0, 0))


def test_count_outside_horizon_rejected():
    path = ip.sample_poisson_path(ip.ConstantIntensity(1.0), 2.0, ip.SeedSpec(0, 0))
    with pytest.raises(ValueError):
        path.count(2.5)


def test_constant_table_matches_homogeneous_sampler():
    table = ip.TabulatedIntensity(np.array([0.0, 5.0]), np.array([1.0, 1.0]), max_rate=1.0)
    thinned = np.empty(N_BIG)
    direct = np.empty(N_BIG)
    for i in range(N_BIG):
        thinned[i] = ip.sample_inhomogeneous_poisson_path(table, 5.0, ip.SeedSpec(31, i)).total_count
        direct[i] = ip.sample_poisson_path(ip.ConstantIntensity(1.0), 5.0, ip.SeedSpec(32, i)).total_count
    se_diff = np.sqrt(2.0 * 5.0 / N_BIG)  # both counts have variance rate*T = 5
    assert abs(thinned.mean() - direct.mean()) <= 4.0 * se_diff


def test_linear_intensity_mean_count_matches_integral():
    # lambda(t) = t on [0, 2]: mean count a(2) = integral = 2
    table = ip.TabulatedIntensity(np.array([0.0, 2.0]), np.array([0.0, 2.0]), max_rate=2.0)
    n = 20_000
    counts = np.array([
        ip.sample_inhomogeneous_poisson_path(table, 2.0, ip.SeedSpec(11, i)).total_count
        for i in range(n)
    ])
    assert abs(counts.mean() - 2.0) <= 4.0 * np.sqrt(2.0 / n)


def test_table_peak_above_max_rate_rejected():
    with pytest.raises(ValueError):
        ip.TabulatedIntensity(np.array([0.0, 1.0]), np.array([0.0, 3.0]), max_rate=2.0)
    with pytest.raises(ValueError):
        ip.TabulatedIntensity(np.array([0.0, 1.0]), np.array([-0.1, 1.0]), max_rate=2.0)


def test_thinned_interarrivals_pass_exponential_ks():
    # real thinning (max_rate twice the target rate); first gaps on a long
    # horizon are exponential(1) with censoring probability e^{-50} ~ 0
    table = ip.TabulatedIntensity(np.array([0.0, 50.0]), np.array([1.0, 1.0]), max_rate=2.0)
    gaps = []
    for i in range(8000):
        path = ip.sample_inhomogeneous_poisson_path(table, 50.0, ip.SeedSpec(7, i))
        if len(path.times):
            gaps.append(path.times[0])
    result = stats.kstest(gaps, "expon", args=(0.0, 1.0))
    assert result.pvalue > 0.01


def test_product_count_zero_absorbing():
    empty = ip.JumpPath(4.0, np.empty(0), np.empty(0, dtype=np.int64))
    busy = ip.JumpPath(4.0, np.array([0.5, 1.0, 2.0]), np.ones(3, dtype=np.int64))
    assert ip.product_count(empty, busy, 3.0) == 0


def test_product_count_multiplies():
    n1 = ip.JumpPath(4.0, np.array([0.5, 1.0, 2.0]), np.ones(3, dtype=np.int64))
    n2 = ip.JumpPath(4.0, np.array([0.7, 1.5]), np.ones(2, dtype=np.int64))
    assert ip.product_count(n1, n2, 3.0) == 6


def test_product_parity_odd_iff_both_odd():
    # brute force over all count pairs in 0..10
    for c1 in range(11):
        for c2 in range(11):
            n1 = ip.JumpPath(20.0, np.arange(1.0, c1 + 1.0), np.ones(c1, dtype=np.int64))
            n2 = ip.JumpPath(20.0, np.arange(1.0, c2 + 1.0), np.ones(c2, dtype=np.int64))
            product = ip.product_count(n1, n2, 15.0)
            assert product % 2 == (c1 % 2) * (c2 % 2)


def test_product_count_beyond_horizon_rejected():
    n1 = ip.JumpPath(2.0, np.empty(0), np.empty(0, dtype=np.int64))
    n2 = ip.JumpPath(4.0, np.empty(0), np.empty(0, dtype=np.int64))
    with pytest.raises(ValueError):
        ip.product_count(n1, n2, 3.0)


def test_wiener_single_interval_moments():
    draws = np.array([
        ip.sample_wiener_increments(np.array([0.0, 1.0]), ip.SeedSpec(3, i))[0]
        for i in range(N_BIG)
    ])
    assert abs(draws.mean()) <= 4.0 / np.sqrt(N_BIG)
    assert abs(draws.var() - 1.0) <= 0.05


def test_wiener_zero_length_interval_is_exactly_zero():
    increments = ip.sample_wiener_increments(np.array([0.0, 1.0, 1.0, 2.0]), ip.SeedSpec(1, 1))
    assert increments[1] == 0.0


def test_wiener_same_seed_identical():
    grid = np.linspace(0.0, 2.0, 9)
    a = ip.sample_wiener_increments(grid, ip.SeedSpec(4, 4))
    b = ip.sample_wiener_increments(grid, ip.SeedSpec(4, 4))
    assert np.array_equal(a, b)


def test_wiener_bad_grid_rejected():
    with pytest.raises(ValueError):
        ip.sample_wiener_increments(np.array([0.0, 2.0, 1.0]), ip.SeedSpec(0, 0))
    with pytest.raises(ValueError):
        ip.sample_wiener_increments(np.array([1.0, 2.0]), ip.SeedSpec(0, 0))


def test_derived_rng_is_pure():
    a = ip.derive_path_rng(ip.SeedSpec(123, 45)).uniform(size=8)
    b = ip.derive_path_rng(ip.SeedSpec(123, 45)).uniform(size=8)
    assert np.array_equal(a, b)


def test_derived_rng_distinct_across_path_indices():
    a = ip.derive_path_rng(ip.SeedSpec(123, 0)).uniform(size=4)
    b = ip.derive_path_rng(ip.SeedSpec(123, 1)).uniform(size=4)
    assert not np.array_equal(a, b)


def test_negative_path_index_rejected():
    with pytest.raises(ValueError):
        ip.SeedSpec(1, -1)


def test_derived_streams_first_draws_uniform():
    # chi-square over 20 equal bins at the 1% level
    draws = np.array([ip.derive_path_rng(ip.SeedSpec(0, i)).uniform() for i in range(10_000)])
    counts, _ = np.histogram(draws, bins=20, range=(0.0, 1.0))
    expected = len(draws) / 20.0
    statistic = ((counts - expected) ** 2 / expected).sum()
    assert statistic < stats.chi2.ppf(0.99, 19)
