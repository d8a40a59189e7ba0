"""Tests for Monte Carlo estimators and the closed-form characteristic functions."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

import indproc as ip
from indproc.charfn import two_subspace_coefficients


def _const_velocity_path(grid, speed):
    return lambda seed: speed * grid


def test_estimate_at_zero_frequency_is_exactly_one():
    grid = np.array([0.0, 1.0, 2.0])
    kp = ip.KacParams(1.0, 1.0)
    est = ip.estimate_charfn(
        lambda s: ip.simulate_kac(kp, 2.0, grid, s).state, grid, [0.0, 1.0], 1000, 5,
    )
    assert np.all(est.mean[:, 0] == 1.0 + 0.0j)
    assert np.all(est.stderr[:, 0] == 0.0)


def test_estimate_of_deterministic_path_has_no_spread():
    grid = np.linspace(0.0, 2.0, 5)
    beta = 1.3
    est = ip.estimate_charfn(_const_velocity_path(grid, 0.7), grid, [beta], 500, 0)
    assert np.max(np.abs(est.mean[:, 0] - np.exp(1j * beta * 0.7 * grid))) < 1e-12
    # identical summands: spread is pure cancellation rounding
    assert np.max(est.stderr) < 1e-6


def test_estimate_modulus_bounded_by_one_plus_spread():
    grid = np.linspace(0.0, 2.0, 5)
    kp = ip.KacParams(1.0, 1.0)
    est = ip.estimate_charfn(
        lambda s: ip.simulate_kac(kp, 2.0, grid, s).state, grid, [0.5, 1.0, 2.0], 4000, 6,
    )
    assert np.all(np.abs(est.mean) <= 1.0 + 3.0 * est.stderr)


def test_estimate_requires_two_paths():
    with pytest.raises(ValueError):
        ip.estimate_charfn(_const_velocity_path(np.array([0.0, 1.0]), 1.0),
                           np.array([0.0, 1.0]), [1.0], 1, 0)


def test_estimate_invariant_under_thread_count():
    grid = np.linspace(0.0, 2.0, 5)
    kp = ip.KacParams(1.0, 1.0)

    def path(seed):
        return ip.simulate_kac(kp, 2.0, grid, seed).state

    serial = ip.estimate_charfn(path, grid, [0.5, 1.0], 10_000, 7, n_threads=1, chunk_size=1024)
    threaded = ip.estimate_charfn(path, grid, [0.5, 1.0], 10_000, 7, n_threads=4, chunk_size=1024)
    assert np.array_equal(serial.mean, threaded.mean)
    assert np.array_equal(serial.stderr, threaded.stderr)


def test_pair_frequency_zero_cell_exact():
    grid = np.array([0.0, 1.0])
    tp = ip.TwoSubspaceParams(1.0, 1.0)
    est = ip.estimate_charfn(
        lambda s: ip.simulate_two_subspace(tp, 1.0, grid, s).state,
        grid, np.array([[0.0, 0.0], [1.0, 2.0]]), 500, 9,
    )
    assert np.all(est.mean[:, 0] == 1.0 + 0.0j)
    assert np.all(est.stderr[:, 0] == 0.0)


# ------------------------------------------------------------- closed forms

def test_flip_motion_charfn_at_zero_frequency():
    t = np.linspace(0.0, 5.0, 11)
    assert np.max(np.abs(ip.kac_charfn(1.0, 1.0, 0.0, t) - 1.0)) < 1e-14


def test_flip_motion_charfn_small_time_expansion():
    lam, c, beta, h = 1.0, 1.0, 1.0, 1e-3
    value = ip.kac_charfn(lam, c, beta, h)
    # |I''| <= 2 lam c beta + (c beta)^2 near 0 bounds the quadratic term
    bound = (2.0 * lam * c * beta + (c * beta) ** 2) * h**2
    assert abs(value - (1.0 + 1j * c * beta * h)) <= bound


def test_flip_motion_charfn_conjugate_symmetry():
    t = np.linspace(0.0, 5.0, 21)
    for beta in (0.5, 1.0, 2.0):
        plus = ip.kac_charfn(1.0, 1.0, beta, t)
        minus = ip.kac_charfn(1.0, 1.0, -beta, t)
        assert np.max(np.abs(minus - np.conj(plus))) < 1e-12


def test_flip_motion_charfn_matches_monte_carlo():
    lam = c = beta = 1.0
    grid = np.linspace(0.0, 5.0, 11)
    kp = ip.KacParams(speed=c, switch_rate=lam)
    est = ip.estimate_charfn(
        lambda s: ip.simulate_kac(kp, 5.0, grid, s).state, grid, [beta], 30_000, 17,
    )
    analytic = ip.kac_charfn(lam, c, beta, grid)
    for i in range(1, len(grid)):
        dev = max(abs(est.mean[i, 0].real - analytic[i].real),
                  abs(est.mean[i, 0].imag - analytic[i].imag))
        assert dev <= 4.0 * est.stderr[i, 0]


def test_two_subspace_equal_frequencies_lose_randomness():
    for t in (0.5, 1.0, 2.0):
        for alpha in (0.7, 1.0, 1.9):
            value = ip.two_subspace_charfn(1.0, 1.0, alpha, alpha, t)
            assert abs(value - math.exp(-0.5 * alpha**2 * t)) < 1e-10


def test_two_subspace_alpha_zero_matches_gated_diffusion_coefficients():
    for lam, b, beta in ((1.0, 1.0, 1.0), (2.0, 0.5, 1.7), (0.3, 2.0, 0.4)):
        damping, stiffness = two_subspace_coefficients(lam, b, 0.0, beta)
        assert damping == 0.5 * ((beta * b) ** 2 + 4.0 * lam)
        assert stiffness == 0.5 * lam * (beta * b) ** 2


def test_two_subspace_variants_disagree_only_where_expected():
    # the printed statement reading differs from the corrected one by a
    # stray factor beta^2 on the stiffness, so they coincide at beta = 1
    c = two_subspace_coefficients(1.0, 1.0, 2.0, 1.0, "corrected")
    s = two_subspace_coefficients(1.0, 1.0, 2.0, 1.0, "printed_statement")
    assert c == s
    c2 = two_subspace_coefficients(1.0, 1.0, 1.0, 2.0, "corrected")
    s2 = two_subspace_coefficients(1.0, 1.0, 1.0, 2.0, "printed_statement")
    assert c2[0] == s2[0] and s2[1] == pytest.approx(4.0 * c2[1])
    with pytest.raises(ValueError):
        two_subspace_coefficients(1.0, 1.0, 1.0, 1.0, "bogus")


def test_two_subspace_idle_component_charfn_matches_monte_carlo():
    # frequency pair (0, beta) reads the component that starts idle; the
    # corrected closed form then starts with zero slope
    lam, b, beta = 1.0, 1.0, 1.5
    grid = np.linspace(0.0, 2.0, 9)
    tp = ip.TwoSubspaceParams(diffusion=b, switch_rate=lam)
    est = ip.estimate_charfn(
        lambda s: ip.simulate_two_subspace(tp, 2.0, grid, s).state,
        grid, np.array([[0.0, beta]]), 30_000, 23,
    )
    analytic = ip.two_subspace_charfn(lam, b, 0.0, beta, grid)
    h = 1e-6
    slope = (ip.two_subspace_charfn(lam, b, 0.0, beta, h)
             - ip.two_subspace_charfn(lam, b, 0.0, beta, 0.0)) / h
    assert abs(slope) < 1e-4
    for i in range(1, len(grid)):
        dev = max(abs(est.mean[i, 0].real - analytic[i].real),
                  abs(est.mean[i, 0].imag - analytic[i].imag))
        assert dev <= 4.0 * est.stderr[i, 0]


def test_gated_diffusion_charfn_basics():
    t = np.linspace(0.0, 50.0, 501)
    values = ip.delay_charfn(1.0, 1.0, 0.0, t)
    assert np.max(np.abs(values - 1.0)) < 1e-14
    values = ip.delay_charfn(1.0, 1.0, 1.0, t)
    assert np.all(values > 0.0)
    assert np.all(np.diff(values) <= 1e-15)  # non-increasing for real beta
    assert ip.delay_charfn(1.0, 1.0, 1.0, 100.0) < 1e-9  # decays to zero


def test_gated_diffusion_charfn_matches_monte_carlo():
    lam = b = beta = 1.0
    grid = np.linspace(0.0, 5.0, 11)
    params = ip.DelayDiffusionParams(drift=0.0, diffusion=b, driver_rate=lam)
    est = ip.estimate_charfn(
        lambda s: ip.simulate_delay_diffusion(params, 5.0, grid, s).state,
        grid, [beta], 30_000, 29,
    )
    analytic = ip.delay_charfn(lam, b, beta, grid)
    for i in range(1, len(grid)):
        dev = max(abs(est.mean[i, 0].real - analytic[i]), abs(est.mean[i, 0].imag))
        assert dev <= 4.0 * est.stderr[i, 0]


def test_charfn_odes_satisfy_finite_difference_residual():
    h = 1e-4
    t = np.linspace(0.1, 3.0, 30)
    cases = []
    lam, c, beta = 1.0, 1.0, 2.0
    cases.append((2.0 * lam, (c * beta) ** 2, lambda s: ip.kac_charfn(lam, c, beta, s)))
    for variant in ip.ODE_VARIANTS:
        damping, stiffness = two_subspace_coefficients(1.0, 1.0, 1.0, 2.0, variant)
        cases.append((damping, stiffness,
                      lambda s, v=variant: ip.two_subspace_charfn(1.0, 1.0, 1.0, 2.0, s, variant=v)))
    bb = 1.0
    cases.append((0.5 * (bb + 4.0), 0.5 * bb, lambda s: ip.delay_charfn(1.0, 1.0, 1.0, s)))
    for p, q, fn in cases:
        y = np.asarray(fn(t), dtype=complex)
        d1 = (fn(t + h) - fn(t - h)) / (2.0 * h)
        d2 = (fn(t + h) - 2.0 * y + fn(t - h)) / h**2
        residual = np.max(np.abs(d2 + p * d1 + q * y))
        y_max = np.max(np.abs(np.asarray(fn(np.linspace(0.0, 3.0, 60)), dtype=complex)))
        assert residual <= 1e-6 * max(abs(p), abs(q), 1.0) * y_max


# ------------------------------------------------------------------ moments

def test_msd_rate_endpoints_and_value():
    assert ip.msd_rate(1.0, 1.0, 1.0, 0.0) == 1.0
    assert abs(ip.msd_rate(1.0, 1.0, 1.0, 100.0) - 0.75) <= 1e-6
    assert abs(ip.msd_rate(1.0, 1.0, 1.0, 1.0) - 0.8130887318961229) < 1e-12
    # independent evaluation: 1 - 0.25 (1 - e^{-2})^2
    assert abs(ip.msd_rate(1.0, 1.0, 1.0, 1.0) - (1.0 - 0.25 * (1.0 - math.exp(-2.0)) ** 2)) < 1e-15
    assert ip.msd_rate(2.0, 1.0, 1.0, 0.0) == 4.0


def test_msd_rate_matches_numerical_msd_derivative():
    # differentiate the Monte Carlo E[y^2] across a small window around t=1
    b, mu = 1.0, 1.0
    params = ip.DelayDiffusionParams(drift=0.0, diffusion=b, driver_rate=(mu, mu))
    grid = np.array([0.0, 0.9, 1.1])
    n = 30_000
    est = ip.estimate_moment(
        lambda s: ip.simulate_delay_diffusion(params, 1.1, grid, s).state, grid, n, 31, power=2,
    )
    slope = (est.mean[2] - est.mean[1]) / 0.2
    se = math.sqrt(est.stderr[1] ** 2 + est.stderr[2] ** 2) / 0.2
    assert abs(slope - ip.msd_rate(b, mu, mu, 1.0)) <= 4.0 * se


def test_msd_closed_form_matches_quadrature_including_zero_rates():
    for b, mu1, mu2, t in ((1.0, 1.0, 1.0, 2.0), (0.7, 0.0, 1.0, 3.0), (2.0, 0.0, 0.0, 1.5)):
        numeric, _ = quad(lambda s: ip.msd_rate(b, mu1, mu2, s), 0.0, t)
        assert abs(ip.mean_square_displacement(b, mu1, mu2, t) - numeric) < 1e-10


def test_msd_rejects_bad_parameters():
    with pytest.raises(ValueError):
        ip.msd_rate(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ip.mean_square_displacement(1.0, -0.5, 1.0, 1.0)


# ------------------------------------------------------------------ mixture

def test_mixture_normalizes_and_degenerates():
    assert ip.mixture_charfn([0.3, 0.4], [1.0, 1.0, 1.0]) == 1.0
    phi = complex(np.exp(0.7j))
    assert ip.mixture_charfn([1.0], [phi, np.exp(2.0j)]) == phi


def test_mixture_matches_enumeration_and_monte_carlo():
    q = np.array([0.2, 0.375])
    beta = 1.0
    g = np.array([1.0, 2.0, 3.0])
    phi = np.exp(1j * beta * g)
    value = ip.mixture_charfn(q, phi)

    # exhaustive enumeration over the 4 indicator configurations
    enum = 0.0 + 0.0j
    for c1 in (0, 1):
        for c2 in (0, 1):
            prob = (q[0] if c1 else 1 - q[0]) * (q[1] if c2 else 1 - q[1])
            k = 0 if c1 else (1 if c2 else 2)
            enum += prob * phi[k]
    assert abs(value - enum) < 1e-12

    # Monte Carlo over indicator draws
    n = 30_000
    total = 0.0 + 0.0j
    values = np.empty(n, dtype=complex)
    for i in range(n):
        rng = ip.derive_path_rng(ip.SeedSpec(37, i))
        chi = rng.uniform(size=2) < q
        k = 0 if chi[0] else (1 if chi[1] else 2)
        values[i] = phi[k]
    mc = values.mean()
    se = max(values.real.std(), values.imag.std()) / math.sqrt(n)
    assert max(abs(mc.real - value.real), abs(mc.imag - value.imag)) <= 4.0 * se


def test_mixture_rejects_bad_inputs():
    with pytest.raises(ValueError):
        ip.mixture_charfn([0.5], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        ip.mixture_charfn([1.5], [1.0, 1.0])
