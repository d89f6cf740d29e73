"""Extended Werner-like states and their evolution under local unital channels.

Matrices are written in the basis ``|11>, |10>, |01>, |00>`` (qubit A first),
i.e. the Kronecker order of single-qubit matrices in the ``|1>, |0>`` basis.
Indices below are 0-based, so ``rho[1, 2]`` is the ``|10><01|`` coherence.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import PAULIS, UnitalChannelParams, _require_cp, pauli_weights
from .errors import ParameterError, StateError

X_MASK = np.eye(4, dtype=bool) | np.eye(4, dtype=bool)[::-1]
# |11>,|10>,|01>,|00>  ->  |10>,|11>,|00>,|01>  (a sigma_x flip on qubit B)
FAMILY_SWAP = np.array([1, 0, 3, 2])


class Family(str, enum.Enum):
    PHI = "phi"  # alpha|01> + beta e^{i delta}|10>
    PSI = "psi"  # alpha|00> + beta e^{i delta}|11>


@dataclass(frozen=True)
class EWLParams:
    r: float
    alpha: float
    delta: float = 0.0
    family: Family = Family.PHI

    def __post_init__(self):
        if not 0 <= self.r <= 1:
            raise ParameterError(f"purity weight r must lie in [0, 1], got {self.r}")
        if not 0 <= self.alpha <= 1:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")
        object.__setattr__(self, "family", Family(self.family))

    @property
    def beta(self):
        return float(np.sqrt(max(0.0, 1 - self.alpha**2)))

    def is_bell_diagonal(self, tol=1e-12):
        """True for ``alpha = beta`` and ``delta`` in ``{0, pi}`` (mod 2 pi)."""
        s = np.sin(self.delta)
        return abs(self.alpha - self.beta) < tol and abs(s) < tol


def validate_two_qubit_state(rho, tol=1e-12, eig_tol=1e-10):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise StateError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0):
        raise StateError("state is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise StateError(f"trace {np.trace(rho).real} differs from 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise StateError("state has a negative eigenvalue")
    return rho


def is_x_state(rho, tol=1e-10):
    return bool(np.all(np.abs(np.asarray(rho)[~X_MASK]) <= tol))


def ewl_state(params: EWLParams) -> np.ndarray:
    """``r |chi><chi| + (1 - r) I/4`` with ``chi`` the selected Bell-like state."""
    psi = np.zeros(4, dtype=complex)
    phase = params.beta * np.exp(1j * params.delta)
    if params.family is Family.PHI:
        psi[2], psi[1] = params.alpha, phase
    else:
        psi[3], psi[0] = params.alpha, phase
    return params.r * np.outer(psi, psi.conj()) + (1 - params.r) / 4 * np.eye(4)


def evolve_elements(params: EWLParams, lam_a: UnitalChannelParams, lam_b: UnitalChannelParams) -> np.ndarray:
    """Closed-form X-state elements of an EWL state after local unital maps."""
    _require_cp(lam_a)
    _require_cp(lam_b)
    r, a, b, delta = params.r, params.alpha, params.beta, params.delta
    a1, a2, a3 = lam_a.lambda1, lam_a.lambda2, lam_a.lambda3
    b1, b2, b3 = lam_b.lambda1, lam_b.lambda2, lam_b.lambda3
    skew = 1 - 2 * a * a
    z_prod = a3 * b3

    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = (1 - r * (z_prod - skew * (a3 - b3))) / 4
    rho[3, 3] = (1 - r * (z_prod + skew * (a3 - b3))) / 4
    rho[1, 1] = (1 + r * (z_prod + skew * (a3 + b3))) / 4
    rho[2, 2] = (1 + r * (z_prod - skew * (a3 + b3))) / 4

    f = a1 * b1 + a2 * b2
    g = a1 * b2 + a2 * b1
    # the |11><00| coherence is fed only through the x/y anisotropy of each map
    f_aniso = a1 * b1 - a2 * b2
    g_aniso = a2 * b1 - a1 * b2
    c, s = np.cos(delta), np.sin(delta)
    rho[1, 2] = a * b * r / 2 * (f * c + 1j * g * s)
    rho[0, 3] = a * b * r / 2 * (f_aniso * c + 1j * g_aniso * s)
    rho[2, 1] = np.conj(rho[1, 2])
    rho[3, 0] = np.conj(rho[0, 3])

    if params.family is Family.PSI:
        rho = rho[np.ix_(FAMILY_SWAP, FAMILY_SWAP)]
    return rho


def evolve_general(state, lam_a: UnitalChannelParams, lam_b: UnitalChannelParams) -> np.ndarray:
    """Product channel applied through the two-qubit Pauli operator sum."""
    rho = validate_two_qubit_state(state)
    wa = pauli_weights(lam_a).as_array()
    wb = pauli_weights(lam_b).as_array()
    out = np.zeros((4, 4), dtype=complex)
    for pa, sa in zip(wa, PAULIS):
        if pa == 0:
            continue
        for pb, sb in zip(wb, PAULIS):
            if pb == 0:
                continue
            k = np.kron(sa, sb)
            out += pa * pb * (k @ rho @ k)
    return out


def partial_trace(rho, keep):
    """Reduced state of qubit ``"A"`` or ``"B"``."""
    t = np.asarray(rho).reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("jijk->ik", t)
    raise ParameterError(f"keep must be 'A' or 'B', got {keep!r}")


def random_cp_params(rng) -> UnitalChannelParams:
    """Uniformly distributed Pauli weights turned into channel coefficients."""
    p0, p1, p2, p3 = rng.dirichlet(np.ones(4))
    return UnitalChannelParams(p0 + p1 - p2 - p3, p0 - p1 + p2 - p3, p0 - p1 - p2 + p3)


def random_ewl_params(rng) -> EWLParams:
    return EWLParams(
        r=float(rng.uniform()),
        alpha=float(rng.uniform()),
        delta=float(rng.uniform(0, 2 * np.pi)),
        family=Family.PHI if rng.uniform() < 0.5 else Family.PSI,
    )
