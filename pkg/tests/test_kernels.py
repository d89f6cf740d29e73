import math

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from phasenoise.errors import ConvergenceError, ParameterError
from phasenoise.kernels import (
    Regime,
    classify_regime,
    coherence_generator,
    gamma1_closed_form,
    gamma2_oscillation_threshold,
    rates,
    sign_changes,
    solve_kernels,
)

T10 = np.linspace(0, 10, 1001)


def test_gamma1_at_zero():
    for d in (0.0, 1.0, 4.0, 7.0):
        assert gamma1_closed_form(1.0, d, 0.0) == 1.0


def test_gamma1_zero_diffusion_limit():
    assert gamma1_closed_form(1.0, 0.0, math.pi / 2) == pytest.approx(-1.0, abs=1e-14)
    t = np.linspace(0, 5, 51)
    np.testing.assert_allclose(gamma1_closed_form(2.0, 0.0, t), np.cos(4 * t), atol=1e-13)


def test_gamma1_overdamped_value():
    expected = math.exp(-2.5) * (math.cosh(1.5) + 5 / 3 * math.sinh(1.5))
    assert gamma1_closed_form(1.0, 5.0, 1.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.48441, abs=2e-5)


@pytest.mark.parametrize("eps", [0.0, 1e-10, -1e-10, 1e-6, -1e-6])
def test_gamma1_continuous_across_critical_damping(eps):
    t = np.linspace(0, 10, 101)
    critical = np.exp(-2 * t) * (1 + 2 * t)
    np.testing.assert_allclose(gamma1_closed_form(1.0, 4.0 + eps, t), critical, atol=1e-5)


def test_gamma1_rejects_bad_domain():
    with pytest.raises(ParameterError):
        gamma1_closed_form(0.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        gamma1_closed_form(1.0, -1.0, 1.0)


@pytest.mark.parametrize("ratio", [0.1, 1.0, 2.606, 4.0, 5.0])
def test_hierarchy_gamma1_matches_closed_form(ratio):
    k = solve_kernels(1.0, ratio, T10)
    assert np.abs(k.gamma_cap_1 - gamma1_closed_form(1.0, ratio, T10)).max() <= 1e-6


def test_kernel_invariants():
    for ratio in (0.1, 3.0, 5.0):
        k = solve_kernels(1.0, ratio, T10)
        assert k.gamma_cap_1[0] == 1.0 and k.gamma_cap_2[0] == 1.0
        assert np.abs(k.gamma_cap_1).max() <= 1 + 1e-12
        assert np.abs(k.gamma_cap_2).max() <= 1 + 1e-12
        assert np.isrealobj(k.gamma_cap_1) and np.isrealobj(k.gamma_cap_2)


def test_gamma2_zero_diffusion_limit():
    t = np.array([0.0, math.pi / 4, 1.0, 2.0])
    k = solve_kernels(1.0, 0.0, t)
    assert k.gamma_cap_2[1] == pytest.approx(0.5, abs=1e-8)
    np.testing.assert_allclose(k.gamma_cap_2, np.cos(t) ** 2, atol=1e-8)


def test_gamma2_matches_generator_exponential():
    # independent route: closed 3x3 block propagated with a matrix exponential
    from scipy.linalg import expm

    d = 1.3
    t = np.linspace(0, 6, 61)
    k = solve_kernels(1.0, d, t)
    gen = coherence_generator(1.0, d)
    # uniform initial phase: only the n = 0 moment is populated
    expected = np.array([(expm(gen * s) @ np.array([1.0, 0.0, 0.0]))[0] for s in t])
    np.testing.assert_allclose(k.gamma_cap_2, expected, atol=1e-8)


def test_truncation_convergence():
    t = np.linspace(0, 10, 201)
    a = solve_kernels(1.0, 0.7, t, truncation=2)
    b = solve_kernels(1.0, 0.7, t, truncation=6)
    assert np.abs(a.gamma_cap_1 - b.gamma_cap_1).max() < 1e-8
    assert np.abs(a.gamma_cap_2 - b.gamma_cap_2).max() < 1e-8


def test_convergence_error_carries_iterates():
    with pytest.raises(ConvergenceError) as info:
        solve_kernels(1.0, 0.7, np.linspace(0, 1, 5), truncation=2, max_truncation=4)
    assert info.value.previous.shape == (2, 5)


def test_solve_kernels_rejects_bad_grid():
    with pytest.raises(ParameterError):
        solve_kernels(1.0, 1.0, [0.5, 1.0])
    with pytest.raises(ParameterError):
        solve_kernels(1.0, 1.0, [0.0, 2.0, 1.0])
    with pytest.raises(ParameterError):
        solve_kernels(1.0, 1.0, T10, truncation=1)


def test_mixing_vanishes_at_start_and_is_bounded():
    k = solve_kernels(1.0, 5.0, T10)
    assert k.coherence_mixing[0] == 0.0
    # zero diffusion, zero phase: x is the drive axis so lambda1 = 1, lambda2 = cos(2t)
    k0 = solve_kernels(1.0, 0.0, T10)
    np.testing.assert_allclose(k0.coherence_mixing, (1 - np.cos(2 * T10)) / 2, atol=1e-8)


def test_rates_at_origin_vanish():
    r = rates(solve_kernels(1.0, 2.0, T10))
    assert r.gamma12[0] == pytest.approx(0.0, abs=1e-14)


def test_rates_singular_near_first_zero_of_gamma1():
    t = np.linspace(0, 2, 200001)
    k = solve_kernels(1.0, 0.1, t)
    r = rates(k)
    flagged = t[r.singular_flags]
    assert flagged.size > 0
    zero = t[np.argmax(k.gamma_cap_1 < 0)]
    assert abs(flagged[0] - zero) < 1e-3
    assert abs(zero - math.pi / 4) < 0.05
    assert np.all(np.isnan(r.gamma12[r.singular_flags]))


def test_rates_regular_in_markov_regime():
    r = rates(solve_kernels(1.0, 5.0, T10))
    assert not r.singular_flags.any()
    assert np.all(np.isfinite(r.gamma12)) and np.all(np.isfinite(r.gamma3))


def test_rates_reproduce_coefficients_by_quadrature():
    t = np.linspace(0, 5, 20001)
    k = solve_kernels(1.0, 5.0, t)
    r = rates(k)
    lam3 = np.exp(-2 * cumulative_trapezoid(2 * r.gamma12, t, initial=0))
    lam1 = np.exp(-2 * cumulative_trapezoid(r.gamma12 + r.gamma3, t, initial=0))
    np.testing.assert_allclose(lam3, k.gamma_cap_1, atol=1e-6)
    np.testing.assert_allclose(lam1, k.gamma_cap_2, atol=1e-6)


@pytest.mark.parametrize(
    "ratio, regime",
    [(0.1, Regime.BOTH_OSCILLATORY), (2.0, Regime.BOTH_OSCILLATORY), (3.0, Regime.GAMMA1_ONLY), (5.0, Regime.MONOTONE)],
)
def test_classify_regime(ratio, regime):
    assert classify_regime(1.0, ratio) is regime
    assert classify_regime(2.0, 2 * ratio) is regime


def test_gamma2_threshold_from_generator_spectrum():
    threshold = gamma2_oscillation_threshold()
    assert round(threshold, 3) == 2.606
    below = np.linalg.eigvals(coherence_generator(1.0, threshold - 0.01))
    above = np.linalg.eigvals(coherence_generator(1.0, threshold + 0.01))
    assert np.abs(below.imag).max() > 0
    assert np.abs(above.imag).max() == 0


def test_sign_changes_ignores_noise_floor():
    assert sign_changes([1.0, 1e-14, -1e-14, 1e-14, 0.5]) == 0
    assert sign_changes([1.0, 0.2, -0.3, 0.1]) == 2
