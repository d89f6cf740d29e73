"""Correlation quantifiers for two-qubit states.

All logarithms are base 2, so a Bell state carries two bits of total
correlation and the maximally mixed state has entropy 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channel import PAULIS, UnitalChannelParams
from .errors import ClassError, ParameterError, ShapeError
from .two_qubit import EWLParams, Family, is_x_state, partial_trace

EIG_FLOOR = 1e-15
EIG_TOL = 1e-12


@dataclass(frozen=True)
class BellDiagonalCoeffs:
    c1: float
    c2: float
    c3: float

    def eigenvalues(self):
        """``(l1+, l1-, l2+, l2-)`` of the Bell-diagonal state."""
        c1, c2, c3 = self.c1, self.c2, self.c3
        return np.array(
            [
                (1 + c1 + c2 - c3) / 4,
                (1 - c1 - c2 - c3) / 4,
                (1 + c1 - c2 + c3) / 4,
                (1 - c1 + c2 + c3) / 4,
            ]
        )


@dataclass(frozen=True)
class CorrelationRecord:
    t: float
    concurrence: float
    entropy: float
    total: float
    classical: float
    discord: float

    @property
    def entanglement_zero(self):
        return self.concurrence <= 0.0

    @property
    def discord_positive(self):
        return self.discord > 1e-3


def _xlog2x(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > EIG_FLOOR
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def entropy_of_eigenvalues(evals):
    return float(-_xlog2x(np.clip(evals, 0.0, None)).sum())


def von_neumann_entropy(state) -> float:
    return entropy_of_eigenvalues(np.linalg.eigvalsh(np.asarray(state, dtype=complex)))


def concurrence_x(state, tol=1e-10) -> float:
    """Concurrence ``2 max(0, K1, K2)`` of an X state."""
    rho = np.asarray(state, dtype=complex)
    if not is_x_state(rho, tol):
        raise ShapeError("concurrence_x requires an X-shaped state")
    diag = np.clip(np.diag(rho).real, 0.0, None)
    k1 = abs(rho[1, 2]) - np.sqrt(diag[0] * diag[3])
    k2 = abs(rho[0, 3]) - np.sqrt(diag[1] * diag[2])
    return float(2 * max(0.0, k1, k2))


def initial_concurrence(r, alpha) -> float:
    """Concurrence of an extended Werner-like state before any evolution."""
    beta = np.sqrt(max(0.0, 1 - alpha * alpha))
    return float(2 * max(0.0, (alpha * beta + 0.25) * r - 0.25))


def r_star(alpha) -> float:
    """Purity threshold above which the initial state is entangled."""
    beta = np.sqrt(max(0.0, 1 - alpha * alpha))
    return float(1 / (1 + 4 * alpha * beta))


def identical_environment_concurrence(r, alpha, gamma_cap_1, gamma_cap_2):
    """``max(0, (4 r alpha beta G2^2 + r G1^2 - 1)/2)`` for equal local maps."""
    beta = np.sqrt(max(0.0, 1 - alpha * alpha))
    g1 = np.asarray(gamma_cap_1, dtype=float)
    g2 = np.asarray(gamma_cap_2, dtype=float)
    return np.maximum(0.0, (4 * r * alpha * beta * g2**2 + r * g1**2 - 1) / 2)


def bell_diagonal_coeffs(params: EWLParams, lam_a: UnitalChannelParams, lam_b: UnitalChannelParams) -> BellDiagonalCoeffs:
    if not params.is_bell_diagonal():
        raise ClassError("correlation coefficients need alpha = 1/sqrt2 and delta in {0, pi}")
    xx = lam_a.lambda1 * lam_b.lambda1
    yy = lam_a.lambda2 * lam_b.lambda2
    r = params.r
    c1, c2, c3 = r * max(xx, yy), r * min(xx, yy), -r * lam_a.lambda3 * lam_b.lambda3
    if params.family is Family.PSI:
        c2, c3 = -c2, -c3
    return BellDiagonalCoeffs(c1, c2, c3)


def correlations_bell_diagonal(c: BellDiagonalCoeffs):
    """Total, classical and quantum correlations ``(T, J, D)`` in bits."""
    evals = c.eigenvalues()
    if evals.min() < -EIG_TOL:
        raise ParameterError(f"coefficients {c} give a negative eigenvalue {evals.min():.3e}")
    total = 2 + float(_xlog2x(np.clip(evals, 0.0, None)).sum())
    cmax = max(abs(c.c1), abs(c.c2), abs(c.c3))
    classical = float(_xlog2x(np.array([1 - cmax, 1 + cmax])).sum() / 2)
    return total, classical, total - classical


def _qubit_entropy(bloch_norm):
    r = np.clip(bloch_norm, 0.0, 1.0)
    return -(_xlog2x((1 + r) / 2) + _xlog2x((1 - r) / 2))


def _pauli_moments(rho):
    a = np.array([np.trace(np.kron(s, PAULIS[0]) @ rho).real for s in PAULIS[1:]])
    b = np.array([np.trace(np.kron(PAULIS[0], s) @ rho).real for s in PAULIS[1:]])
    t = np.array([[np.trace(np.kron(si, sj) @ rho).real for sj in PAULIS[1:]] for si in PAULIS[1:]])
    return a, b, t


def _conditional_entropy(a, b, t, theta, phi):
    """Average entropy of A after a projective measurement of B along ``(theta, phi)``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    nb = n @ b
    tn = n @ t.T
    total = np.zeros(theta.shape)
    for sign in (1.0, -1.0):
        p = (1 + sign * nb) / 2
        vec = a + sign * tn
        safe = np.where(p > EIG_FLOOR, p, 1.0)
        norm = np.linalg.norm(vec, axis=-1) / (2 * safe)
        total += np.where(p > EIG_FLOOR, p * _qubit_entropy(norm), 0.0)
    return total


def correlations_numerical(state, n_phi=64, n_theta=32, tol=1e-6):
    """``(total, classical, discord)`` with projective measurements on qubit B.

    The conditional entropy is minimized over the Bloch sphere on a coarse
    ``n_phi x n_theta`` grid and then refined locally from the best grid points.
    """
    rho = np.asarray(state, dtype=complex)
    s_a = von_neumann_entropy(partial_trace(rho, "A"))
    s_b = von_neumann_entropy(partial_trace(rho, "B"))
    s_ab = von_neumann_entropy(rho)
    a, b, t = _pauli_moments(rho)

    theta = np.linspace(0, np.pi, n_theta)
    phi = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    tg, pg = np.meshgrid(theta, phi, indexing="ij")
    grid = _conditional_entropy(a, b, t, tg, pg)
    best = float(grid.min())
    for idx in np.argsort(grid, axis=None)[:3]:
        i, j = np.unravel_index(idx, grid.shape)
        res = minimize(
            lambda x: float(_conditional_entropy(a, b, t, x[0], x[1])),
            x0=[tg[i, j], pg[i, j]],
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": tol * 1e-2},
        )
        best = min(best, float(res.fun))
    mutual = s_a + s_b - s_ab
    classical = s_a - best
    return mutual, classical, mutual - classical


def discord_numerical(state, n_phi=64, n_theta=32, tol=1e-6) -> float:
    """Quantum discord of an arbitrary two-qubit state, measuring qubit B."""
    return correlations_numerical(state, n_phi, n_theta, tol)[2]
