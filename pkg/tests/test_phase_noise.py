import numpy as np
import pytest

from phasenoise.errors import ParameterError
from phasenoise.io import read_csv, write_trajectory_csv
from phasenoise.kernels import solve_kernels
from phasenoise.phase_noise import (
    average_state,
    estimate_channel,
    propagate_trajectory,
    sample_phase_trajectory,
    step_unitary,
)

from conftest import random_qubit_state

EXCITED = np.diag([1.0, 0.0]).astype(complex)


def test_zero_diffusion_gives_constant_path():
    traj = sample_phase_trajectory(0.0, 0.01, 50, seed=3, initial_phase=0.4)
    np.testing.assert_array_equal(traj.phases, np.full(51, 0.4))


def test_increment_variance_follows_wiener_scaling():
    d, dt = 0.05, 0.01
    traj = sample_phase_trajectory(d, dt, 100_000, seed=11)
    inc = np.diff(traj.phases)
    assert traj.phases[0] == 0.0
    assert abs(inc.var() / (2 * d * dt) - 1) < 0.03
    assert abs(inc.mean()) < 4 * np.sqrt(2 * d * dt / inc.size)


def test_equal_seeds_give_identical_paths():
    a = sample_phase_trajectory(0.3, 0.01, 200, seed=5)
    b = sample_phase_trajectory(0.3, 0.01, 200, seed=5)
    c = sample_phase_trajectory(0.3, 0.01, 200, seed=6)
    np.testing.assert_array_equal(a.phases, b.phases)
    assert not np.array_equal(a.phases, c.phases)


@pytest.mark.parametrize("kwargs", [dict(dt=0.0), dict(dt=-1.0), dict(n_steps=0), dict(d=-0.1)])
def test_sample_rejects_bad_parameters(kwargs):
    args = dict(d=0.1, dt=0.01, n_steps=10, seed=0)
    args.update(kwargs)
    with pytest.raises(ParameterError):
        sample_phase_trajectory(**args)


def test_step_unitary_is_rotation_about_drive_axis():
    phi, lam, dt = 0.7, 1.3, 0.2
    h = lam * np.array([[0, np.exp(-1j * phi)], [np.exp(1j * phi), 0]])
    w, v = np.linalg.eigh(h)
    expected = v @ np.diag(np.exp(-1j * w * dt)) @ v.conj().T
    np.testing.assert_allclose(step_unitary(lam, dt, phi), expected, atol=1e-14)


def test_no_drive_leaves_state_constant(rng):
    rho = random_qubit_state(rng)
    traj = sample_phase_trajectory(0.5, 0.01, 100, seed=1)
    states = propagate_trajectory(rho, 0.0, traj)
    np.testing.assert_allclose(states, np.broadcast_to(rho, states.shape), atol=1e-15)


def test_rabi_flopping_at_fixed_phase():
    traj = sample_phase_trajectory(0.0, 0.01, 500, seed=0)
    states = propagate_trajectory(EXCITED, 1.0, traj)
    np.testing.assert_allclose(states[:, 0, 0].real, np.cos(traj.times) ** 2, atol=1e-12)


def test_maximally_mixed_is_invariant_per_trajectory():
    traj = sample_phase_trajectory(1.0, 0.01, 300, seed=2)
    states = propagate_trajectory(np.eye(2) / 2, 1.0, traj)
    np.testing.assert_allclose(states, np.broadcast_to(np.eye(2) / 2, states.shape), atol=1e-15)


def test_trajectory_evolution_is_unitary(rng):
    rho = random_qubit_state(rng)
    traj = sample_phase_trajectory(2.0, 0.005, 400, seed=9)
    states = propagate_trajectory(rho, 1.0, traj)
    ev0 = np.linalg.eigvalsh(rho)
    for s in states[::50]:
        assert abs(np.trace(s) - 1) < 1e-10
        np.testing.assert_allclose(np.linalg.eigvalsh(s), ev0, atol=1e-10)


def test_pure_state_stays_pure():
    traj = sample_phase_trajectory(2.0, 0.005, 400, seed=9)
    states = propagate_trajectory(EXCITED, 1.0, traj)
    purity = np.einsum("kij,kji->k", states, states).real
    np.testing.assert_allclose(purity, 1.0, atol=1e-12)


def test_trajectory_dump(tmp_path):
    traj = sample_phase_trajectory(0.2, 0.01, 20, seed=4)
    states = propagate_trajectory(EXCITED, 1.0, traj)
    path = write_trajectory_csv(tmp_path / "traj.csv", traj, states)
    cols, rows = read_csv(path)
    assert cols == ["step", "phi", "re_rho11", "re_rho10", "im_rho10"]
    assert len(rows) == 21
    assert float(rows[5][2]) == pytest.approx(states[5, 0, 0].real)


def test_estimate_at_time_zero_is_exact():
    est = estimate_channel(1.0, 0.5, [0.0, 0.5], 200, seed=1)
    assert est.lambda1[0] == 1.0 and est.lambda2[0] == 1.0 and est.lambda3[0] == 1.0
    assert est.stderr1[0] == 0.0


def test_estimate_rejects_small_ensembles():
    with pytest.raises(ParameterError):
        estimate_channel(1.0, 0.5, [0.5], 99, seed=0)


def test_estimate_rejects_off_lattice_times():
    with pytest.raises(ParameterError):
        estimate_channel(1.0, 0.5, [0.5003], 100, seed=0, dt=0.005)


def test_stderr_scales_as_inverse_root_n():
    t = [1.0, 2.0, 3.0]
    small = estimate_channel(1.0, 1.0, t, 2000, seed=21)
    large = estimate_channel(1.0, 1.0, t, 4000, seed=21)
    ratio = large.stderr3 / small.stderr3
    np.testing.assert_allclose(ratio, 1 / np.sqrt(2), rtol=0.1)


def test_replay_is_bit_identical_across_worker_counts():
    t = np.linspace(0.5, 3.0, 6)
    a = estimate_channel(1.0, 2.0, t, 2500, seed=8, workers=1)
    b = estimate_channel(1.0, 2.0, t, 2500, seed=8, workers=3)
    for field in ("lambda1", "lambda2", "lambda3", "stderr1", "stderr3", "gamma2"):
        np.testing.assert_array_equal(getattr(a, field), getattr(b, field))


def test_averaged_map_is_unital():
    t = np.linspace(0, 4, 9)
    avg = average_state(np.eye(2) / 2, 1.0, 0.7, t, 300, seed=2)
    np.testing.assert_allclose(avg, np.broadcast_to(np.eye(2) / 2, avg.shape), atol=1e-12)


def test_averaged_state_is_valid(rng):
    rho = random_qubit_state(rng)
    avg = average_state(rho, 1.0, 0.7, np.linspace(0, 4, 9), 300, seed=2)
    for s in avg:
        np.testing.assert_allclose(s, s.conj().T, atol=1e-14)
        assert abs(np.trace(s) - 1) < 1e-12
        assert np.linalg.eigvalsh(s).min() > -1e-12


def test_real_probe_coherence_stays_real_on_average():
    t = np.linspace(0.5, 5, 10)
    est = estimate_channel(1.0, 1.0, t, 4000, seed=17)
    assert np.all(np.abs(est.im_plus) <= 4 * est.stderr_im_plus + 1e-12)


def test_fixed_phase_estimates_match_hierarchy_with_mixing():
    t = np.linspace(0.5, 5, 10)
    est = estimate_channel(1.0, 1.0, t, 4000, seed=4)
    k = solve_kernels(1.0, 1.0, np.concatenate([[0.0], t]))
    g2, mix = k.gamma_cap_2[1:], k.coherence_mixing[1:]
    assert np.all(np.abs(est.gamma2 - g2) <= 4 * est.stderr_gamma2)
    assert np.all(np.abs(est.mixing - mix) <= 4 * est.stderr_mixing)


def test_uniform_phase_removes_mixing_at_zero_diffusion():
    t = np.linspace(0.25, 2.5, 10)
    est = estimate_channel(1.0, 0.0, t, 4000, seed=6, initial_phase="uniform")
    np.testing.assert_allclose(est.lambda3, np.cos(2 * t), atol=1e-9)
    assert np.all(np.abs(est.lambda1 - np.cos(t) ** 2) <= 4 * est.stderr1)
    assert np.all(np.abs(est.lambda2 - np.cos(t) ** 2) <= 4 * est.stderr2)
