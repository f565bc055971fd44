"""Diagonalization of the two-mode cavity Hamiltonian.

The generator is brought to ``sum_j (mu_j p_j^2 + nu_j x_j^2)`` by the
substitutions

    p_j -> p_j + (beta/2) x_j,     p_1 -> p_1 - chi x_2,  p_2 -> p_2 - chi x_1,
    x_1 -> x_1 + xi p_2,           x_2 -> x_2 + xi p_1,

applied in that order. The residual cross couplings ``eta_12`` (on
``x_1 p_2``) and ``eta_21`` (on ``x_2 p_1``) vanish for the two choices of
``(chi, xi)`` labelled ``plus`` and ``minus``. All closed forms are evaluated
with mpmath at :data:`DPS` digits and returned as floats, because the
``1/beta^2`` terms cancel catastrophically in double precision at small
velocity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import mpmath
import numpy as np

from . import analytic
from .core import CasimirError
from .symplectic import DynamicalInstability, TwoMode, normal_frequencies

DPS = 50
BRANCHES = ("plus", "minus")


class VelocityBoundError(CasimirError, ValueError):
    """``Gamma(beta) <= 0``: the diagonalizing transformations stop being unitary."""


class BranchDivergence(CasimirError, ValueError):
    """The plus branch has ``chi ~ 1/beta`` and is undefined at ``beta = 0``."""


def _sign(branch: str) -> int:
    if branch not in BRANCHES:
        raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")
    return 1 if branch == "plus" else -1


def _gamma_mp(beta):
    v2 = mpmath.mpf(beta) ** 2
    pi2 = mpmath.pi ** 2
    return (8 * v2 + pi2) * (81 * pi2 - 8 * v2)


def gamma(beta: float) -> float:
    """``(8 beta^2 + pi^2)(81 pi^2 - 8 beta^2)``; negative outside the velocity bound."""
    with mpmath.workdps(DPS):
        return float(_gamma_mp(beta))


def velocity_bound() -> float:
    """``9 pi / (2 sqrt 2)``, where ``gamma`` vanishes. Far above any physical ``|beta| < 1``."""
    return 9.0 * np.pi / (2.0 * np.sqrt(2.0))


def _root_gamma(beta):
    g = _gamma_mp(beta)
    if g <= 0:
        raise VelocityBoundError(f"|beta| = {abs(beta)} violates the velocity bound {velocity_bound():.6f}")
    return mpmath.sqrt(g)


def _chi_xi_mp(beta, branch):
    s = _sign(branch)
    root = _root_gamma(beta)
    v = mpmath.mpf(beta)
    if v == 0:
        if s > 0:
            raise BranchDivergence("chi_plus diverges as beta -> 0")
        return mpmath.mpf(0), mpmath.mpf(0)
    chi = (9 * mpmath.pi ** 2 + s * root) / (16 * v)
    xi = s * 8 * v / root
    return chi, xi


def chi_xi(beta: float, branch: str = "plus") -> tuple[float, float]:
    """Parameters of the two quadratic shears that cancel the cross couplings."""
    with mpmath.workdps(DPS):
        chi, xi = _chi_xi_mp(beta, branch)
        return float(chi), float(xi)


def _coefficients_mp(chi, xi, beta):
    c, x, v = mpmath.mpf(chi), mpmath.mpf(xi), mpmath.mpf(beta)
    pi2 = mpmath.pi ** 2
    mu1 = c**2 * x**2 / 2 - 4 * c * v * x**2 / 3 - c * x - v**2 * x**2 / 8 + 4 * v * x / 3 + 2 * pi2 * x**2 + mpmath.mpf(1) / 2
    mu2 = c**2 * x**2 / 2 + 4 * c * v * x**2 / 3 - c * x - v**2 * x**2 / 8 - 4 * v * x / 3 + pi2 * x**2 / 2 + mpmath.mpf(1) / 2
    nu1 = c**2 / 2 + 4 * c * v / 3 - v**2 / 8 + pi2 / 2
    nu2 = c**2 / 2 - 4 * c * v / 3 - v**2 / 8 + 2 * pi2
    eta12 = c**2 * x + 8 * c * v * x / 3 - c - v**2 * x / 4 - 4 * v / 3 + pi2 * x
    eta21 = c**2 * x - 8 * c * v * x / 3 - c - v**2 * x / 4 + 4 * v / 3 + 4 * pi2 * x
    return mu1, mu2, nu1, nu2, eta12, eta21


def coefficients(chi: float, xi: float, beta: float) -> tuple[float, ...]:
    """``(mu1, mu2, nu1, nu2, eta12, eta21)`` of the transformed Hamiltonian for any ``chi, xi``."""
    with mpmath.workdps(DPS):
        return tuple(float(a) for a in _coefficients_mp(chi, xi, beta))


def _diagonal_mp(beta, branch):
    s = _sign(branch)
    v = mpmath.mpf(beta)
    pi2 = mpmath.pi ** 2
    if v == 0:
        if s > 0:
            raise BranchDivergence("plus-branch closed forms are singular at beta = 0")
        half = mpmath.mpf(1) / 2
        return half, half, pi2 / 2, 2 * pi2
    g = _gamma_mp(beta)
    # the minus branch carries +sqrt(Gamma); the plus branch is the same expression with -sqrt(Gamma)
    r = -s * _root_gamma(beta)
    quarter = mpmath.mpf(1) / 4
    mu1 = 9 * pi2 / (4 * r) - 16 * v**2 / (3 * r) + quarter
    mu2 = 9 * pi2 / (4 * r) + 16 * v**2 / (3 * r) + quarter
    nu1 = -r / 12 + g / (256 * v**2) - 9 * pi2 * r / (256 * v**2)
    nu2 = r / 12 + g / (256 * v**2) - 9 * pi2 * r / (256 * v**2)
    return mu1, mu2, nu1, nu2


def diagonal_coefficients(beta: float, branch: str = "plus") -> tuple[float, float, float, float]:
    """Closed-form ``(mu1, mu2, nu1, nu2)`` once ``eta_12 = eta_21 = 0``."""
    with mpmath.workdps(DPS):
        return tuple(float(a) for a in _diagonal_mp(beta, branch))


@dataclass(frozen=True)
class TwoModeDiagonalization:
    beta: float
    branch: str
    gamma: float
    chi: float
    xi: float
    mu1: float
    mu2: float
    nu1: float
    nu2: float
    eta12: float
    eta21: float

    @property
    def frequencies(self) -> tuple[float, float]:
        """``(2 sqrt(mu1 nu1), 2 sqrt(mu2 nu2))`` in diagonal-basis order (not sorted)."""
        return (2.0 * np.sqrt(self.mu1 * self.nu1), 2.0 * np.sqrt(self.mu2 * self.nu2))


def diagonalize(beta: float, branch: str = "plus") -> TwoModeDiagonalization:
    """Full record: ``chi, xi`` from the cancellation condition, substituted coefficients."""
    with mpmath.workdps(DPS):
        chi, xi = _chi_xi_mp(beta, branch)
        mu1, mu2, nu1, nu2, e12, e21 = _coefficients_mp(chi, xi, beta)
        return TwoModeDiagonalization(
            float(beta), branch, float(_gamma_mp(beta)), float(chi), float(xi),
            float(mu1), float(mu2), float(nu1), float(nu2), float(e12), float(e21),
        )


def normal_frequencies_closed(beta: float, branch: str = "plus") -> tuple[float, float]:
    """Coupled normal-mode frequencies, ascending (the lower one continues ``pi``)."""
    if beta == 0:
        return (np.pi, 2.0 * np.pi)
    with mpmath.workdps(DPS):
        mu1, mu2, nu1, nu2 = _diagonal_mp(beta, branch)
        if mu1 * nu1 < 0 or mu2 * nu2 < 0:
            raise DynamicalInstability(f"negative mu*nu at beta={beta}: complex frequency")
        w = sorted((2 * mpmath.sqrt(mu1 * nu1), 2 * mpmath.sqrt(mu2 * nu2)))
        return float(w[0]), float(w[1])


def normal_modes_numeric(beta: float) -> tuple[float, float]:
    """Independent oracle: positive imaginary parts of ``eig(J M)`` for the two-mode generator."""
    w = normal_frequencies(TwoMode(beta).generator)
    return float(w[0]), float(w[1])


def _frequencies(beta, model, branch):
    if model == "coupled":
        return normal_frequencies_closed(beta, branch)
    if model == "uncoupled":
        if abs(beta) >= velocity_bound():
            raise VelocityBoundError(f"|beta| = {abs(beta)} violates the velocity bound")
        return analytic.eigenfrequency(1, beta), analytic.eigenfrequency(2, beta)
    raise ValueError(f"model must be 'coupled' or 'uncoupled', got {model!r}")


def eigenvalue(m: int, n: int, beta: float, model: str = "coupled", branch: str = "plus") -> float:
    """``E_mn = w_a (m + 1/2) + w_b (n + 1/2)`` with ``w_a < w_b``."""
    if m < 0 or n < 0 or int(m) != m or int(n) != n:
        raise ValueError("quantum numbers must be non-negative integers")
    wa, wb = _frequencies(beta, model, branch)
    return wa * (m + 0.5) + wb * (n + 0.5)


def spectrum(beta: float, levels: int = 10, model: str = "coupled", branch: str = "plus"):
    """The ``levels`` lowest ``(E, (m, n))`` pairs, ties broken by ``(m, n)``."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    wa, wb = _frequencies(beta, model, branch)
    box = levels + 5  # E grows in both indices, so the box always contains the lowest levels
    states = [(wa * (m + 0.5) + wb * (n + 0.5), (m, n)) for m, n in itertools.product(range(box + 1), repeat=2)]
    states.sort(key=lambda s: (s[0], s[1]))
    return states[:levels]


def distinct_values(energies, tol: float = 1e-6) -> list[float]:
    """Cluster sorted energies whose neighbours differ by at most ``tol``."""
    energies = sorted(energies)
    groups = [[energies[0]]] if energies else []
    for e in energies[1:]:
        if e - groups[-1][-1] <= tol:
            groups[-1].append(e)
        else:
            groups.append([e])
    return [float(np.mean(g)) for g in groups]


def degenerate_count(beta: float, levels: int = 10, model: str = "coupled", branch: str = "plus",
                     tol: float = 1e-6) -> int:
    """How many of the lowest ``levels`` states share their energy (within ``tol``) with another state."""
    low = spectrum(beta, levels, model, branch)
    wider = [e for e, _ in spectrum(beta, 4 * levels + 10, model, branch)]
    return sum(1 for e, _ in low if sum(abs(e - w) <= tol for w in wider) > 1)
