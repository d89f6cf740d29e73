"""Correlation dynamics of two qubits driven by independent phase-noisy lasers."""

__version__ = "0.1.0"

from .channel import UnitalChannelParams, apply_single, check_cp, pauli_weights
from .correlations import (
    bell_diagonal_coeffs,
    concurrence_x,
    correlations_bell_diagonal,
    discord_numerical,
    initial_concurrence,
    r_star,
    von_neumann_entropy,
)
from .kernels import classify_regime, gamma1_closed_form, rates, solve_kernels
from .phase_noise import estimate_channel, propagate_trajectory, sample_phase_trajectory
from .two_qubit import EWLParams, Family, evolve_elements, evolve_general, ewl_state
