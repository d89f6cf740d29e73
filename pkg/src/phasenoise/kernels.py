"""Decoherence functions of a qubit driven by a phase-diffusing laser.

The drive ``H = lam (s- e^{i phi} + s+ e^{-i phi})`` with a Wiener phase of
diffusion rate ``d`` produces a unital single-qubit map with coefficients
``(G2, G2, G1)``.  ``G1`` has a closed form.  ``G2`` is obtained here from the
linear hierarchy of phase-dressed moments

    A_n = <e^{i n phi} s_z>,  B_n = <e^{i n phi} u>,  C_n = <e^{i n phi} conj(u)>,

with ``u = s_x + i s_y`` the complex transverse Bloch component.  Averaging the
Wiener phase damps level ``n`` at rate ``n**2 d`` and the drive couples level
``n`` to ``n +/- 1``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ConvergenceError, ParameterError

RTOL = 1e-10
ATOL = 1e-12
CONVERGENCE_TOL = 1e-8
SINGULAR_TOL = 1e-9
BRANCH_TOL = 1e-8

GAMMA2_THRESHOLD = 2.606
GAMMA1_THRESHOLD = 4.0


class Regime(str, enum.Enum):
    BOTH_OSCILLATORY = "both_oscillatory"
    GAMMA1_ONLY = "gamma1_only"
    MONOTONE = "monotone"


@dataclass(frozen=True)
class MemoryKernels:
    """``G1``, ``G2`` sampled on ``t_grid`` together with their time derivatives.

    ``coherence_mixing`` is the coefficient of ``rho01(0)`` in ``rho10(t)`` when
    the laser phase starts at exactly zero; it vanishes once the initial phase
    is averaged uniformly, which is the case the unital map ``(G2, G2, G1)``
    describes.
    """

    t_grid: np.ndarray
    gamma_cap_1: np.ndarray
    gamma_cap_2: np.ndarray
    lam: float
    d: float
    dgamma_cap_1: np.ndarray
    dgamma_cap_2: np.ndarray
    coherence_mixing: np.ndarray
    truncation: int

    def channel_coefficients(self):
        """Array of shape ``(len(t_grid), 3)`` holding ``(G2, G2, G1)``."""
        return np.column_stack([self.gamma_cap_2, self.gamma_cap_2, self.gamma_cap_1])


@dataclass(frozen=True)
class Rates:
    t_grid: np.ndarray
    gamma12: np.ndarray
    gamma3: np.ndarray
    singular_flags: np.ndarray


def _check_lam_d(lam, d):
    if not lam > 0:
        raise ParameterError(f"coupling must be positive, got {lam}")
    if not d >= 0:
        raise ParameterError(f"diffusion rate must be non-negative, got {d}")


def gamma1_closed_form(lam, d, t):
    """Population decoherence function ``G1(t)``.

    ``exp(-d t/2) [cosh(k t/2) + d sinh(k t/2) / k]`` with ``k = sqrt(d^2 - 16 lam^2)``,
    evaluated with real arithmetic on both sides of ``d = 4 lam``.
    """
    _check_lam_d(lam, d)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("times must be non-negative")
    disc = d * d - 16 * lam * lam
    envelope = np.exp(-d * t / 2)
    if abs(disc) < BRANCH_TOL * lam * lam:
        # series in y = (k t / 2)^2, valid for either sign of disc
        y = disc * t * t / 4
        cosh_term = 1 + y / 2 + y * y / 24
        sinhc_term = 1 + y / 6 + y * y / 120
        out = envelope * (cosh_term + d * t / 2 * sinhc_term)
    elif disc > 0:
        k = np.sqrt(disc)
        out = envelope * (np.cosh(k * t / 2) + d * np.sinh(k * t / 2) / k)
    else:
        w = np.sqrt(-disc) / 2
        out = envelope * (np.cos(w * t) + d * np.sin(w * t) / (2 * w))
    return out if out.ndim else float(out)


class _Hierarchy:
    """Truncated moment hierarchy on levels ``-N..N``.

    State layout per probe: ``[A_{-N..N}, B_{-N..N}, C_{-N..N}]``.
    """

    def __init__(self, lam, d, truncation):
        self.lam = lam
        self.d = d
        self.N = truncation
        self.levels = np.arange(-truncation, truncation + 1)
        self.size = 2 * truncation + 1
        self.damping = -(self.levels.astype(float) ** 2) * d

    def rhs(self, y):
        """Time derivative for ``y`` of shape ``(3 * size, n_probes)``."""
        m = self.size
        A, B, C = y[:m], y[m : 2 * m], y[2 * m :]
        lam = self.lam
        zero = np.zeros_like(A[:1])
        A_up = np.concatenate([A[1:], zero])  # A_{n+1}
        A_dn = np.concatenate([zero, A[:-1]])  # A_{n-1}
        B_dn = np.concatenate([zero, B[:-1]])  # B_{n-1}
        C_up = np.concatenate([C[1:], zero])  # C_{n+1}
        damp = self.damping[:, None]
        dA = damp * A - 1j * lam * (B_dn - C_up)
        dB = damp * B - 2j * lam * A_up
        dC = damp * C + 2j * lam * A_dn
        return np.concatenate([dA, dB, dC])

    def initial(self, bloch, initial_phase):
        """Initial moments for Bloch vectors ``bloch`` of shape ``(n_probes, 3)``.

        ``initial_phase`` is a float for a deterministic start or ``"uniform"``.
        """
        bloch = np.atleast_2d(np.asarray(bloch, dtype=float))
        sz = bloch[:, 2]
        u = bloch[:, 0] + 1j * bloch[:, 1]
        if initial_phase == "uniform":
            factor = (self.levels == 0).astype(complex)
        else:
            factor = np.exp(1j * self.levels * float(initial_phase))
        A = factor[:, None] * sz[None, :]
        B = factor[:, None] * u[None, :]
        C = factor[:, None] * np.conj(u)[None, :]
        return np.concatenate([A, B, C])

    def solve(self, bloch, initial_phase, t_grid):
        y0 = self.initial(bloch, initial_phase)
        shape = y0.shape

        def f(_t, yflat):
            return self.rhs(yflat.reshape(shape)).ravel()

        sol = solve_ivp(
            f,
            (t_grid[0], t_grid[-1]),
            y0.ravel(),
            method="DOP853",
            t_eval=t_grid,
            rtol=RTOL,
            atol=ATOL,
        )
        if not sol.success:
            raise ConvergenceError(f"moment hierarchy integration failed: {sol.message}")
        ys = sol.y.T.reshape((len(t_grid),) + shape)
        dys = np.stack([self.rhs(y) for y in ys])
        return ys, dys

    def index(self, block, level):
        return block * self.size + level + self.N


# Probe Bloch vectors: |1><1|, (|0>+|1>)/sqrt2, (|0>+i|1>)/sqrt2 in the {|1>,|0>} basis.
_PROBE_EXCITED = (0.0, 0.0, 1.0)
_PROBE_PLUS = (1.0, 0.0, 0.0)
_PROBE_PLUS_I = (0.0, -1.0, 0.0)


def _kernels_at(lam, d, t_grid, truncation):
    h = _Hierarchy(lam, d, truncation)
    a0 = h.index(0, 0)
    c0 = h.index(2, 0)

    ys, dys = h.solve([_PROBE_EXCITED, _PROBE_PLUS], "uniform", t_grid)
    g1 = ys[:, a0, 0].real
    dg1 = dys[:, a0, 0].real
    g2 = ys[:, c0, 1].real
    dg2 = dys[:, c0, 1].real

    # Deterministic zero phase: rho10(t) = (L1 rho10 + ...) splits into G2 +/- mixing.
    ys_fixed, _ = h.solve([_PROBE_PLUS, _PROBE_PLUS_I], 0.0, t_grid)
    lam1 = ys_fixed[:, c0, 0].real
    lam2 = ys_fixed[:, c0, 1].imag
    mixing = (lam1 - lam2) / 2
    return g1, g2, dg1, dg2, mixing


def solve_kernels(lam, d, t_grid, truncation=2, max_truncation=40, step=4) -> MemoryKernels:
    """Integrate the moment hierarchy and extract ``G1`` and ``G2``.

    The truncation level is raised by ``step`` until two successive levels agree
    to ``1e-8`` in sup-norm.

    Raises
    ------
    ParameterError
        If ``truncation < 2`` or ``t_grid`` is not ascending from 0.
    ConvergenceError
        If no agreement is reached by ``max_truncation``.
    """
    _check_lam_d(lam, d)
    if truncation < 2:
        raise ParameterError("truncation must be at least 2")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1 or t_grid[0] != 0 or np.any(np.diff(t_grid) <= 0):
        raise ParameterError("t_grid must be strictly ascending and start at 0")
    if len(t_grid) == 1:
        one = np.ones(1)
        return MemoryKernels(t_grid, one, one.copy(), lam, d, np.zeros(1), np.zeros(1), np.zeros(1), truncation)

    n = truncation
    current = _kernels_at(lam, d, t_grid, n)
    while True:
        if n + step > max_truncation:
            raise ConvergenceError(
                f"moment hierarchy not converged at truncation {n}",
                previous=np.vstack(current[:2]),
                last=None,
            )
        nxt = _kernels_at(lam, d, t_grid, n + step)
        diff = max(np.abs(nxt[0] - current[0]).max(), np.abs(nxt[1] - current[1]).max())
        if diff < CONVERGENCE_TOL:
            break
        n += step
        current = nxt
    g1, g2, dg1, dg2, mixing = current
    return MemoryKernels(t_grid, g1, g2, float(lam), float(d), dg1, dg2, mixing, n)


def _zero_flags(values):
    flags = np.abs(values) < SINGULAR_TOL
    crossing = np.nonzero(np.signbit(values[1:]) != np.signbit(values[:-1]))[0]
    nearer_right = np.abs(values[crossing + 1]) < np.abs(values[crossing])
    flags[crossing + nearer_right.astype(int)] = True
    return flags


def rates(kernels: MemoryKernels) -> Rates:
    """Time-dependent master-equation rates.

    ``gamma1 = gamma2 = -G1'/(4 G1)`` and ``gamma3 = -(G2'/G2 - G1'/(2 G1))/2``.
    Points where ``|G1|`` or ``|G2|`` is below ``1e-9``, and the grid point
    nearest each sign change of either, are flagged and set to NaN.
    """
    g1, g2 = kernels.gamma_cap_1, kernels.gamma_cap_2
    singular = _zero_flags(g1) | _zero_flags(g2)
    safe1 = np.where(singular, 1.0, g1)
    safe2 = np.where(singular, 1.0, g2)
    r1 = kernels.dgamma_cap_1 / safe1
    r2 = kernels.dgamma_cap_2 / safe2
    gamma12 = np.where(singular, np.nan, -r1 / 4)
    gamma3 = np.where(singular, np.nan, -(r2 - r1 / 2) / 2)
    return Rates(kernels.t_grid, gamma12, gamma3, singular)


def classify_regime(lam, d) -> Regime:
    """Regime label from the ratio ``d / lam``."""
    if not lam > 0:
        raise ParameterError(f"coupling must be positive, got {lam}")
    ratio = d / lam
    if ratio < GAMMA2_THRESHOLD:
        return Regime.BOTH_OSCILLATORY
    if ratio < GAMMA1_THRESHOLD:
        return Regime.GAMMA1_ONLY
    return Regime.MONOTONE


def sign_changes(values, floor=1e-10):
    """Count sign changes among samples whose magnitude exceeds ``floor``."""
    v = np.asarray(values, dtype=float)
    v = v[np.abs(v) > floor]
    if v.size < 2:
        return 0
    return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))


def coherence_generator(lam, d):
    """Real generator of the closed ``G2`` block ``(C_0, -i A_-1, B_-2)``."""
    return np.array([[0.0, -2 * lam, 0.0], [lam, -d, -lam], [0.0, 2 * lam, -4 * d]])


def gamma2_oscillation_threshold(lam=1.0):
    """Ratio ``d/lam`` at which the ``G2`` generator loses its complex eigenvalue pair."""

    def discriminant(ratio):
        a, b, c, e = np.poly(coherence_generator(1.0, ratio))
        return 18 * a * b * c * e - 4 * b**3 * e + b * b * c * c - 4 * a * c**3 - 27 * a * a * e * e

    return brentq(discriminant, 1.0, 3.5, xtol=1e-12)
