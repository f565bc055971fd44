"""Exact Gaussian dynamics of quadratic Hamiltonians.

Every Hamiltonian in the toolkit is a quadratic form ``H = z^T M(t) z / 2`` in
the canonical coordinates ``z = (x_1..x_N, p_1..p_N)``. Heisenberg operators
(and classical phase-space points) then evolve linearly, ``z(t) = S(t) z(0)``
with ``dS/dt = J M(t) S`` and ``J = [[0, I], [-I, 0]]``. Cross terms such as
``x_k p_j`` enter ``M`` symmetrized, half on each off-diagonal slot, which is
the Weyl ordering ``(x p + p x) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import _rk4
from .analytic import log_time_f
from .core import CasimirError, Trajectory, Uniform, coupling_matrix, trajectory_q, trajectory_q_dot


class IntegrationError(CasimirError):
    """The propagated flow stopped being symplectic within tolerance."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class DynamicalInstability(CasimirError):
    """A quadratic form has complex normal-mode frequencies."""


def J(n_modes: int) -> np.ndarray:
    eye, zero = np.eye(n_modes), np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_defect(S: np.ndarray) -> float:
    """``max |S^T J S - J|``."""
    n = S.shape[-1] // 2
    Jn = J(n)
    return float(np.max(np.abs(S.T @ Jn @ S - Jn)))


# --- quadratic forms -------------------------------------------------------

class QuadraticForm:
    """Time-dependent coefficient matrix of ``H = z^T M(t) z / 2``."""

    n_modes: int

    def matrix(self, t: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        return 2 * self.n_modes


class FactorizedForm(QuadraticForm):
    """``M(t) = scale(t) M0`` with a constant generator ``M0``.

    Such forms commute with themselves at different times, so the flow is
    ``expm(J M0 clock(t))`` with ``clock(t) = int_0^t scale``.
    """

    @property
    def generator(self) -> np.ndarray:
        raise NotImplementedError

    def scale(self, t):
        return 1.0

    def clock(self, t):
        return t

    def matrix(self, t):
        return float(self.scale(t)) * self.generator


@dataclass(frozen=True, eq=False)
class ConstantForm(FactorizedForm):
    M0: np.ndarray

    @property
    def n_modes(self):
        return self.M0.shape[0] // 2

    @property
    def generator(self):
        return np.asarray(self.M0, dtype=float)


@dataclass(frozen=True)
class Oscillator(QuadraticForm):
    """Single oscillator ``(p^2 + omega2(t) x^2) / 2``; ``omega2`` may go negative."""

    omega2: Callable[[float], float]
    n_modes: int = field(default=1, init=False)

    def matrix(self, t):
        return np.diag([float(self.omega2(t)), 1.0])


def _uniform_generator(beta: float, n_modes: int, coupling: np.ndarray) -> np.ndarray:
    N = n_modes
    M = np.zeros((2 * N, 2 * N))
    k = np.arange(1, N + 1)
    M[:N, :N] = np.diag((k * np.pi) ** 2)
    M[N:, N:] = np.eye(N)
    # -(beta / 4)(x_k p_k + p_k x_k)
    M[k - 1, N + k - 1] = M[N + k - 1, k - 1] = -beta / 2
    M[N:, :N] += beta * coupling
    M[:N, N:] += beta * coupling.T
    return M


@dataclass(frozen=True)
class LawOriginal(QuadraticForm):
    """Multimode effective Hamiltonian of the cavity, truncated to ``n_modes``.

    ``sum_k (p_k^2 + omega_k(t)^2 x_k^2) / 2 + (q'/q) sum_{k != j} G_kj p_k x_j``.
    """

    trajectory: Trajectory
    n_modes: int = 1

    def matrix(self, t):
        N = self.n_modes
        q = trajectory_q(self.trajectory, t)
        rate = trajectory_q_dot(self.trajectory, t) / q
        M = np.zeros((2 * N, 2 * N))
        k = np.arange(1, N + 1)
        M[:N, :N] = np.diag((k * np.pi / q) ** 2)
        M[N:, N:] = np.eye(N)
        if N > 1:
            C = rate * coupling_matrix(N)
            M[N:, :N] += C
            M[:N, N:] += C.T
        return M

    @property
    def truncated(self) -> bool:
        return True  # infinitely many modes in principle


@dataclass(frozen=True)
class FactorizedUniform(FactorizedForm):
    """Uniform-motion Hamiltonian after the mode-wise squeeze: ``M0 / q(t)``."""

    beta: float
    n_modes: int = 1

    @cached_property
    def generator(self):
        return _uniform_generator(self.beta, self.n_modes, coupling_matrix(self.n_modes))

    def scale(self, t):
        return 1.0 / trajectory_q(Uniform(self.beta), t)

    def clock(self, t):
        return log_time_f(t, self.beta)


@dataclass(frozen=True)
class SingleModeUniform(FactorizedUniform):
    """Principal mode only: ``[p^2 + pi^2 x^2 - (beta/2)(xp + px)] / (2 q(t))``."""

    n_modes: int = field(default=1, init=False)


@dataclass(frozen=True)
class TwoMode(FactorizedUniform):
    """Two lowest modes with the coupling written as ``+(4 beta / 3)(x2 p1 - x1 p2)``.

    This is the mirror image (``x2, p2 -> -x2, -p2``) of ``FactorizedUniform(beta, 2)``;
    spectra and photon numbers of the two agree.
    """

    n_modes: int = field(default=2, init=False)

    @cached_property
    def generator(self):
        # p1 x2 : +4/3, p2 x1 : -4/3 (times beta inside the generator)
        coupling = np.array([[0.0, 4.0 / 3.0], [-4.0 / 3.0, 0.0]])
        return _uniform_generator(self.beta, 2, coupling)


@dataclass(frozen=True)
class LawSingleModeLadder(QuadraticForm):
    """``omega(t)(a^+ a + 1/2) + i (omega'/4 omega)(a^+2 - a^2)`` with ``a`` fixed at ``omega = pi``.

    In phase-space form ``x p + p x = i (a^+2 - a^2)``, so the squeeze term is a
    symmetrized ``x p`` coefficient ``omega' / (2 omega) = -q' / (2 q)``.
    """

    trajectory: Trajectory
    n_modes: int = field(default=1, init=False)

    def matrix(self, t):
        q = trajectory_q(self.trajectory, t)
        rate = trajectory_q_dot(self.trajectory, t) / q
        w = np.pi / q
        return np.array([[w * np.pi, -rate / 2], [-rate / 2, w / np.pi]])


def hamiltonian_matrix(form: QuadraticForm, t: float) -> np.ndarray:
    M = np.asarray(form.matrix(t), dtype=float)
    if M.shape != (form.dim, form.dim):
        raise ValueError(f"coefficient matrix has shape {M.shape}, expected {(form.dim, form.dim)}")
    return M


# --- propagation ------------------------------------------------------------

@dataclass
class SymplecticPropagation:
    t: np.ndarray
    S: np.ndarray  # (samples, 2N, 2N)
    defect: np.ndarray
    method: str
    form: QuadraticForm | None = None

    @property
    def n_modes(self) -> int:
        return self.S.shape[-1] // 2

    def covariance(self, cov0: np.ndarray) -> np.ndarray:
        """Symmetrized second moments ``S cov0 S^T`` at every sample."""
        return np.einsum("tij,jk,tlk->til", self.S, cov0, self.S)

    def means(self, mean0: np.ndarray) -> np.ndarray:
        return self.S @ np.asarray(mean0, dtype=float)


def max_frequency(form: QuadraticForm, grid, probes: int = 64) -> float:
    """Largest ``|eig(J M(t))|`` over a subsample of the grid."""
    grid = np.asarray(grid, dtype=float)
    Jn = J(form.n_modes)
    idx = np.unique(np.linspace(0, grid.size - 1, min(probes, grid.size)).astype(int))
    return max(float(np.max(np.abs(np.linalg.eigvals(Jn @ hamiltonian_matrix(form, grid[i]))))) for i in idx)


def propagate(form: QuadraticForm, grid, method: str = "auto", max_step: float | None = None,
              defect_tol: float = 1e-10) -> SymplecticPropagation:
    """Flow ``S(t)`` of ``dS/dt = J M(t) S`` with ``S(grid[0]) = I``.

    ``method="exact"`` (factorized forms only) exponentiates the constant
    generator in the logarithmic clock; ``"ode"`` runs fixed-step RK4 with at
    most ``max_step`` per step (default: the smaller of 1e-3 and 0.01 over the
    fastest normal-mode frequency).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a strictly increasing 1-d array")
    Jn = J(form.n_modes)
    if method == "auto":
        method = "exact" if isinstance(form, FactorizedForm) else "ode"

    if method == "exact":
        if not isinstance(form, FactorizedForm):
            raise ValueError("exact propagation needs a factorized form")
        A = Jn @ form.generator
        tau = np.asarray(form.clock(grid), dtype=float) - float(form.clock(grid[0]))
        S = np.stack([expm(A * s) for s in np.atleast_1d(tau)])
    elif method == "ode":
        if max_step is None:
            max_step = min(1e-3, 0.01 / max(max_frequency(form, grid), 1e-12))

        def rhs(t, S):
            return Jn @ (hamiltonian_matrix(form, t) @ S)

        S = _rk4.integrate(rhs, np.eye(form.dim), grid, max_step)
    else:
        raise ValueError(f"unknown method {method!r}")

    defect = np.array([symplectic_defect(s) for s in S])
    bad = np.flatnonzero(defect >= defect_tol)
    if bad.size:
        i = bad[0]
        raise IntegrationError(f"symplectic defect {defect[i]:.3e} exceeds {defect_tol:g} at t={grid[i]:.6g}",
                               time=grid[i])
    return SymplecticPropagation(grid, S, defect, method, form)


# --- observables ------------------------------------------------------------

def vacuum_covariance(omega_ref) -> np.ndarray:
    """Ground-state second moments: ``<x_k^2> = 1/(2 w_k)``, ``<p_k^2> = w_k / 2``."""
    w = np.atleast_1d(np.asarray(omega_ref, dtype=float))
    if np.any(w <= 0):
        raise ValueError("reference frequencies must be positive")
    return np.diag(np.concatenate([1.0 / (2.0 * w), w / 2.0]))


def static_frequencies(n_modes: int) -> np.ndarray:
    return np.pi * np.arange(1, n_modes + 1)


def photon_numbers(prop: SymplecticPropagation, omega_ref=None) -> np.ndarray:
    """Per-mode vacuum photon numbers, shape ``(samples, N)``.

    The vacuum of the reference oscillators (default ``k pi``) is evolved and
    each mode counted against its own reference:
    ``n_k = (w_k <x_k^2> + <p_k^2> / w_k) / 2 - 1/2``.
    """
    N = prop.n_modes
    w = static_frequencies(N) if omega_ref is None else np.atleast_1d(np.asarray(omega_ref, dtype=float))
    if w.shape != (N,):
        raise ValueError(f"need {N} reference frequencies")
    cov = prop.covariance(vacuum_covariance(w))
    diag = np.diagonal(cov, axis1=1, axis2=2)
    return 0.5 * (w * diag[:, :N] + diag[:, N:] / w) - 0.5


def energy(M: np.ndarray, cov: np.ndarray, mean=None) -> float:
    """``<z^T M z / 2>`` for a Gaussian state with symmetrized moments ``cov`` and ``mean``."""
    value = 0.5 * np.trace(M @ cov)
    if mean is not None:
        mean = np.asarray(mean, dtype=float)
        value += 0.5 * mean @ M @ mean
    return float(value)


def frame_map(prop: SymplecticPropagation, trajectory: Uniform) -> SymplecticPropagation:
    """Carry a flow computed in the squeezed frame back to the original frame.

    The mode-wise squeeze with ``sigma = sqrt(q(t))`` acts as
    ``x -> sigma x``, ``p -> p / sigma``.
    """
    if not isinstance(trajectory, Uniform):
        raise ValueError("the frame map is defined for uniform motion")
    N = prop.n_modes
    sigma = np.sqrt(trajectory_q(trajectory, prop.t))
    scale = np.concatenate([np.repeat(sigma[:, None], N, 1), np.repeat(1.0 / sigma[:, None], N, 1)], axis=1)
    S = scale[:, :, None] * prop.S / scale[0][None, None, :]
    defect = np.array([symplectic_defect(s) for s in S])
    return SymplecticPropagation(prop.t, S, defect, prop.method + "+frame", None)


def frame_change(M: np.ndarray, T: np.ndarray, T_dot: np.ndarray) -> np.ndarray:
    """Coefficient matrix after the time-dependent canonical change ``z = T(t) z'``.

    ``M' = T^T M T + J T^{-1} dT/dt``.
    """
    n = M.shape[0] // 2
    out = T.T @ M @ T + J(n) @ np.linalg.solve(T, T_dot)
    return 0.5 * (out + out.T)


def normal_frequencies(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Positive normal-mode frequencies of ``z^T M z / 2``, ascending.

    Raises :class:`DynamicalInstability` when ``J M`` has eigenvalues with a
    real part (complex frequencies).
    """
    n = M.shape[0] // 2
    ev = np.linalg.eigvals(J(n) @ M)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.any(np.abs(ev.real) > tol * scale):
        raise DynamicalInstability(f"unstable quadratic form, eigenvalues {np.sort_complex(ev)}")
    return np.sort(ev.imag[ev.imag > 0])


# --- linear invariants -----------------------------------------------------

@dataclass
class LinearInvariant:
    """Coefficients ``f(t)`` of ``A(t) = f(t) . z`` with ``dA/dt = 0``."""

    t: np.ndarray
    f: np.ndarray
    residual: float


def linear_invariant(form: QuadraticForm, f0, grid, max_step: float | None = None) -> LinearInvariant:
    """Integrate ``df/dt = M J f`` so that ``f(t) . z(t)`` stays constant.

    The residual is the finite-difference mismatch of that equation on the grid.
    """
    grid = np.asarray(grid, dtype=float)
    f0 = np.asarray(f0, dtype=float)
    if f0.shape != (form.dim,):
        raise ValueError(f"f0 must have length {form.dim}")
    Jn = J(form.n_modes)
    if max_step is None:
        max_step = min(1e-3, 0.01 / max(max_frequency(form, grid), 1e-12))
    f = _rk4.integrate(lambda t, y: hamiltonian_matrix(form, t) @ (Jn @ y), f0, grid, max_step)
    if grid.size >= 3:
        fd = np.gradient(f, grid, axis=0, edge_order=2)
        rhs = np.stack([hamiltonian_matrix(form, t) @ (Jn @ y) for t, y in zip(grid, f)])
        residual = float(np.max(np.abs(fd - rhs)))
    else:
        residual = 0.0
    return LinearInvariant(grid, f, residual)


def linear_invariant_check(form: QuadraticForm, f0, grid, n_states: int = 8, seed: int = 0,
                           max_step: float | None = None) -> float:
    """Max drift of ``<A(t)>`` over a family of displaced Gaussian states.

    ``f(t)`` and the first moments are integrated independently; the drift is
    ``max |f(t) . <z(t)> - f(0) . <z(0)>|``.
    """
    grid = np.asarray(grid, dtype=float)
    inv = linear_invariant(form, f0, grid, max_step)
    rng = np.random.default_rng(seed)
    means0 = rng.normal(size=(n_states, form.dim))
    means0[0] = 0.0
    Jn = J(form.n_modes)
    if max_step is None:
        max_step = min(1e-3, 0.01 / max(max_frequency(form, grid), 1e-12))
    means = _rk4.integrate(lambda t, y: (Jn @ hamiltonian_matrix(form, t) @ y.T).T, means0, grid, max_step)
    values = np.einsum("ti,tsi->ts", inv.f, means)
    return float(np.max(np.abs(values - values[0])))
