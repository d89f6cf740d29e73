"""Single-qubit unital channels in Pauli-diagonal form.

A unital qubit map is fixed by three real coefficients that scale the Bloch
vector components.  In the basis ``{|1>, |0>}`` it acts on matrix elements as

    rho11 -> [(1 + L3) rho11 + (1 - L3) rho00] / 2
    rho10 -> [(L1 + L2) rho10 + (L1 - L2) rho01] / 2

and admits the random-unitary representation ``sum_mu p_mu s_mu rho s_mu``
with Pauli weights ``p_mu``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StateError, ValidityError

CP_TOL = 1e-12

# Pauli matrices in the {|1>, |0>} basis, |1> being the excited state.
IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class UnitalChannelParams:
    """Channel coefficients ``(lambda1, lambda2, lambda3)``.

    Negative values are allowed; validity is decided by :func:`check_cp`.
    """

    lambda1: float
    lambda2: float
    lambda3: float

    def as_array(self):
        return np.array([self.lambda1, self.lambda2, self.lambda3], dtype=float)

    @classmethod
    def phase_noisy(cls, gamma_cap_1, gamma_cap_2):
        """Coefficients of the phase-noisy laser map, ``(G2, G2, G1)``."""
        return cls(float(gamma_cap_2), float(gamma_cap_2), float(gamma_cap_1))


@dataclass(frozen=True)
class PauliWeights:
    p0: float
    p1: float
    p2: float
    p3: float

    def as_array(self):
        return np.array([self.p0, self.p1, self.p2, self.p3], dtype=float)


@dataclass(frozen=True)
class CPVerdict:
    valid: bool
    margin: float

    def __bool__(self):
        return self.valid


def _weights(params):
    l1, l2, l3 = params.lambda1, params.lambda2, params.lambda3
    return np.array(
        [
            (1 + l1 + l2 + l3) / 4,
            (1 + l1 - l2 - l3) / 4,
            (1 - l1 + l2 - l3) / 4,
            (1 - l1 - l2 + l3) / 4,
        ]
    )


def check_cp(params: UnitalChannelParams) -> CPVerdict:
    """Complete-positivity verdict; the margin is the smallest Pauli weight."""
    w = _weights(params)
    margin = float(w.min())
    return CPVerdict(margin >= -CP_TOL, margin)


def _require_cp(params):
    verdict = check_cp(params)
    if not verdict.valid:
        raise ValidityError(
            f"channel {params} is not completely positive (min Pauli weight {verdict.margin:.3e})"
        )


def pauli_weights(params: UnitalChannelParams) -> PauliWeights:
    _require_cp(params)
    return PauliWeights(*(float(p) for p in _weights(params)))


def validate_qubit_state(rho, tol=1e-12):
    """Return ``rho`` as a 2x2 complex array or raise :class:`StateError`."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise StateError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
        raise StateError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise StateError(f"trace {np.trace(rho).real} differs from 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise StateError("state has a negative eigenvalue")
    return rho


def apply_single(params: UnitalChannelParams, state) -> np.ndarray:
    """Apply the unital map to a single-qubit density matrix."""
    _require_cp(params)
    rho = validate_qubit_state(state)
    l1, l2, l3 = params.lambda1, params.lambda2, params.lambda3
    r11 = ((1 + l3) * rho[0, 0] + (1 - l3) * rho[1, 1]) / 2
    r10 = ((l1 + l2) * rho[0, 1] + (l1 - l2) * rho[1, 0]) / 2
    out = np.empty((2, 2), dtype=complex)
    out[0, 0] = r11.real
    out[1, 1] = 1 - r11.real
    out[0, 1] = r10
    out[1, 0] = np.conj(r10)
    return out


def apply_pauli_sum(params: UnitalChannelParams, state) -> np.ndarray:
    """Apply the same map through its weighted-Pauli operator-sum form."""
    w = pauli_weights(params).as_array()
    rho = np.asarray(state, dtype=complex)
    return sum(p * s @ rho @ s for p, s in zip(w, PAULIS))
