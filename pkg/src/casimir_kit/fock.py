"""Brute-force Schrödinger evolution in a truncated number basis.

This is the independent oracle for the Gaussian propagator: the same
quadratic coefficient matrices are turned into ``D x D`` (or ``D^2 x D^2``)
operators and the state vector is integrated directly. Photon numbers are
always counted against the static mode frequencies ``k pi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import _rk4
from .core import CasimirError, trajectory_q, trajectory_q_dot
from .symplectic import FactorizedForm, LawSingleModeLadder, QuadraticForm, hamiltonian_matrix


class FockError(CasimirError):
    """Construction or integration failure in the truncated basis."""


class NormDriftError(FockError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True, eq=False)
class LadderSet:
    """Truncated ladder operators of one oscillator with reference frequency ``omega_ref``."""

    cutoff: int
    omega_ref: float
    a: np.ndarray
    ad: np.ndarray
    x: np.ndarray
    p: np.ndarray
    n: np.ndarray

    def commutator_defect(self) -> float:
        """``||[a, a^+] - I||`` on the first ``D - 1`` levels (the top level is cut)."""
        c = self.a @ self.ad - self.ad @ self.a - np.eye(self.cutoff)
        return float(np.max(np.abs(c[:-1, :-1])))


def build_ladder(cutoff: int, omega_ref: float = np.pi) -> LadderSet:
    if cutoff < 4:
        raise ValueError("cutoff must be >= 4")
    if omega_ref <= 0:
        raise ValueError("omega_ref must be positive")
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)
    ad = a.conj().T
    x = (a + ad) / np.sqrt(2.0 * omega_ref)
    p = 1j * np.sqrt(omega_ref / 2.0) * (ad - a)
    n = np.diag(np.arange(cutoff, dtype=float)).astype(complex)
    return LadderSet(cutoff, float(omega_ref), a, ad, x, p, n)


def mode_ladders(n_modes: int, cutoff: int) -> list[LadderSet]:
    """One ladder set per mode, each at its static frequency ``k pi``."""
    return [build_ladder(cutoff, k * np.pi) for k in range(1, n_modes + 1)]


def embed(op: np.ndarray, k: int, ladders) -> np.ndarray:
    """Lift a single-mode operator acting on mode ``k`` (0-based) into the product space."""
    parts = [op if i == k else np.eye(l.cutoff) for i, l in enumerate(ladders)]
    return reduce(np.kron, parts)


def _as_list(ladders):
    return [ladders] if isinstance(ladders, LadderSet) else list(ladders)


def _canonical_ops(ladders):
    ladders = _as_list(ladders)
    xs = [embed(l.x, k, ladders) for k, l in enumerate(ladders)]
    ps = [embed(l.p, k, ladders) for k, l in enumerate(ladders)]
    return xs + ps


def _check_hermitian(H, tol=1e-12):
    dev = float(np.max(np.abs(H - H.conj().T)))
    if dev > tol * max(1.0, float(np.max(np.abs(H)))):
        raise FockError(f"hamiltonian is not hermitian (deviation {dev:.3e})")
    return H


def quadratic_operator(M: np.ndarray, ladders) -> np.ndarray:
    """``sum_ij M_ij Z_i Z_j / 2`` with ``Z = (x_1..x_N, p_1..p_N)``; symmetric ``M`` gives Weyl ordering."""
    Z = _canonical_ops(ladders)
    if M.shape != (len(Z), len(Z)):
        raise ValueError(f"coefficient matrix {M.shape} does not match {len(Z) // 2} modes")
    H = 0.5 * sum(M[i, j] * (Z[i] @ Z[j]) for i in range(len(Z)) for j in range(len(Z)) if M[i, j] != 0)
    if np.isscalar(H):
        H = np.zeros_like(Z[0])
    return H


class HamiltonianBuilder:
    """``H(t)`` for a form, with the time-independent pieces assembled once."""

    def __init__(self, form: QuadraticForm, ladders):
        self.form = form
        self.ladders = _as_list(ladders)
        if len(self.ladders) != form.n_modes:
            raise ValueError(f"form has {form.n_modes} modes but {len(self.ladders)} ladder sets were given")
        self.dim = int(np.prod([l.cutoff for l in self.ladders]))
        if isinstance(form, LawSingleModeLadder):
            l = self.ladders[0]
            eye = np.eye(l.cutoff)
            self._number = l.n + 0.5 * eye
            self._squeeze = _check_hermitian(1j * (l.ad @ l.ad - l.a @ l.a))
            self.kind = "ladder"
        elif isinstance(form, FactorizedForm):
            self._H0 = _check_hermitian(quadratic_operator(form.generator, self.ladders))
            self.kind = "factorized"
        else:
            Z = _canonical_ops(self.ladders)
            m = len(Z)
            self._products = {(i, j): 0.5 * (Z[i] @ Z[j]) for i in range(m) for j in range(m)}
            self.kind = "general"

    def _ladder_weights(self, t):
        traj = self.form.trajectory
        q = trajectory_q(traj, t)
        w = np.pi / q
        w_dot = -np.pi * trajectory_q_dot(traj, t) / q ** 2
        return w, w_dot / (4.0 * w)

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == "ladder":
            w, c = self._ladder_weights(t)
            return w * self._number + c * self._squeeze
        if self.kind == "factorized":
            return float(self.form.scale(t)) * self._H0
        M = hamiltonian_matrix(self.form, t)
        H = sum(M[i, j] * B for (i, j), B in self._products.items() if M[i, j] != 0)
        if np.isscalar(H):
            H = np.zeros((self.dim, self.dim), dtype=complex)
        # the fixed pieces above are hermitian by construction; only the generic sum needs a check
        return _check_hermitian(H)

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        """``H(t) @ psi`` without forming ``H(t)`` when the time dependence is a few scalars."""
        if self.kind == "ladder":
            w, c = self._ladder_weights(t)
            return w * (self._number @ psi) + c * (self._squeeze @ psi)
        if self.kind == "factorized":
            return float(self.form.scale(t)) * (self._H0 @ psi)
        return self(t) @ psi

    def max_energy(self, grid, probes: int = 16) -> float:
        grid = np.asarray(grid, dtype=float)
        idx = np.unique(np.linspace(0, grid.size - 1, min(probes, grid.size)).astype(int))
        return max(float(np.max(np.abs(np.linalg.eigvalsh(self(grid[i]))))) for i in idx)


def build_hamiltonian(form: QuadraticForm, t: float, ladders) -> np.ndarray:
    """Hermitian matrix of ``form`` at time ``t`` in the truncated basis."""
    return _check_hermitian(HamiltonianBuilder(form, ladders)(t))


@dataclass
class FockTrajectory:
    t: np.ndarray
    psi: np.ndarray  # (samples, dim)
    norm_drift: np.ndarray  # largest single-step drift inside each interval
    cutoff: int
    leakage: np.ndarray  # population in the top 10% of any mode's levels
    leak_tol: float
    method: str
    ladders: list = field(repr=False, default_factory=list)

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(self.norm_drift))

    @property
    def max_leakage(self) -> float:
        return float(np.max(self.leakage))

    @property
    def converged(self) -> bool:
        return self.max_leakage < self.leak_tol


def vacuum(ladders) -> np.ndarray:
    ladders = _as_list(ladders)
    psi = np.zeros(int(np.prod([l.cutoff for l in ladders])), dtype=complex)
    psi[0] = 1.0
    return psi


def _top_mask(ladders):
    ladders = _as_list(ladders)
    masks = []
    for k, l in enumerate(ladders):
        top = max(2, int(np.ceil(0.1 * l.cutoff)))  # two levels at least, so both parities are watched
        levels = np.zeros(l.cutoff)
        levels[-top:] = 1.0
        masks.append(embed(np.diag(levels), k, ladders).diagonal().real)
    return np.clip(sum(masks), 0.0, 1.0) > 0


def evolve(psi0, form: QuadraticForm, grid, ladders, max_step: float | None = None,
           norm_tol: float = 1e-8, leak_tol: float = 1e-2, steps_per_period: int = 50) -> FockTrajectory:
    """Integrate ``i psi' = H(t) psi`` with RK4.

    The step resolves the largest eigenvalue of the truncated ``H`` with
    ``steps_per_period`` steps. After every step the norm drift is checked:
    below ``norm_tol`` the state is renormalized, above it the run stops with
    :class:`NormDriftError`. Leakage into the top levels is recorded and
    flags the run unconverged, it does not raise.
    """
    grid = np.asarray(grid, dtype=float)
    ladders = _as_list(ladders)
    builder = HamiltonianBuilder(form, ladders)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (builder.dim,):
        raise ValueError(f"state has shape {psi0.shape}, expected ({builder.dim},)")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    if max_step is None:
        max_step = 2.0 * np.pi / (steps_per_period * max(builder.max_energy(grid), 1e-12))

    drift = np.zeros(grid.size)
    worst = [0.0]

    def rhs(t, psi):
        return -1j * builder.apply(t, psi)

    def renormalize(t, psi):
        norm = np.linalg.norm(psi)
        d = abs(norm - 1.0)
        if d >= norm_tol:
            raise NormDriftError(f"norm drift {d:.3e} in one step at t={t:.6g}", time=t)
        worst[0] = max(worst[0], d)
        return psi / norm

    def record(i, t, psi):
        drift[i] = worst[0]
        worst[0] = 0.0
        return psi

    psi = _rk4.integrate(rhs, psi0, grid, max_step, after_step=renormalize, after_sample=record)
    mask = _top_mask(ladders)
    leakage = np.sum(np.abs(psi[:, mask]) ** 2, axis=1)
    return FockTrajectory(grid, psi, drift, ladders[0].cutoff, leakage, leak_tol, "rk4", ladders)


def evolve_exact(psi0, form: FactorizedForm, grid, ladders, leak_tol: float = 1e-2) -> FockTrajectory:
    """``psi(t) = exp(-i H0 tau(t)) psi0`` for ``H(t) = s(t) H0``, with ``tau`` the form's clock."""
    if not isinstance(form, FactorizedForm):
        raise ValueError("exact evolution needs a factorized form")
    grid = np.asarray(grid, dtype=float)
    ladders = _as_list(ladders)
    H0 = _check_hermitian(quadratic_operator(form.generator, ladders))
    E, V = np.linalg.eigh(H0)
    psi0 = np.asarray(psi0, dtype=complex)
    c0 = V.conj().T @ psi0
    tau = np.atleast_1d(np.asarray(form.clock(grid), dtype=float)) - float(form.clock(grid[0]))
    psi = (np.exp(-1j * np.outer(tau, E)) * c0) @ V.T
    drift = np.abs(np.linalg.norm(psi, axis=1) - 1.0)
    leakage = np.sum(np.abs(psi[:, _top_mask(ladders)]) ** 2, axis=1)
    return FockTrajectory(grid, psi, drift, ladders[0].cutoff, leakage, leak_tol, "exact", ladders)


def expectation(traj: FockTrajectory, observable, hermitian: bool | None = None, tol: float = 1e-10):
    """``<psi(t)|O|psi(t)>`` per sample; ``observable`` may be a matrix or a callable ``t -> matrix``."""
    dim = traj.psi.shape[1]
    ops = [observable(t) for t in traj.t] if callable(observable) else None
    first = ops[0] if ops is not None else np.asarray(observable)
    if first.shape != (dim, dim):
        raise ValueError(f"observable has shape {first.shape}, state dimension is {dim}")
    if hermitian is None:
        hermitian = bool(np.allclose(first, first.conj().T, atol=1e-12))
    if ops is None:
        vals = np.einsum("ti,ij,tj->t", traj.psi.conj(), first, traj.psi)
    else:
        vals = np.array([psi.conj() @ O @ psi for psi, O in zip(traj.psi, ops)])
    if not hermitian:
        return vals
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals.imag)) > tol * scale:
        raise FockError(f"hermitian observable has imaginary expectation {np.max(np.abs(vals.imag)):.3e}")
    return vals.real


def photon_numbers(traj: FockTrajectory) -> np.ndarray:
    """Per-mode ``<a_k^+ a_k>``, shape ``(samples, N)``."""
    ladders = traj.ladders
    return np.stack([expectation(traj, embed(l.n, k, ladders)) for k, l in enumerate(ladders)], axis=1)


@dataclass
class ConvergenceReport:
    cutoffs: list
    curves: list
    deviations: list  # max |<n>| difference between consecutive cutoffs
    tol: float

    @property
    def max_deviation(self) -> float:
        return float(max(self.deviations))

    @property
    def converged(self) -> bool:
        return self.deviations[-1] < self.tol

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.deviations, self.deviations[1:]))


def convergence_scan(form: QuadraticForm, grid, cutoffs, tol: float = 1e-5, **evolve_kw) -> ConvergenceReport:
    """Run :func:`evolve` from vacuum at each cutoff and compare the photon curves."""
    cutoffs = list(cutoffs)
    if len(cutoffs) < 2 or any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("need at least two increasing cutoffs")
    curves = []
    for D in cutoffs:
        ladders = mode_ladders(form.n_modes, D)
        curves.append(photon_numbers(evolve(vacuum(ladders), form, grid, ladders, **evolve_kw)))
    deviations = [float(np.max(np.abs(a - b))) for a, b in zip(curves, curves[1:])]
    return ConvergenceReport(cutoffs, curves, deviations, tol)
