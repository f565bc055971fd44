"""Fixed-step classical Runge-Kutta shared by the propagators."""

from __future__ import annotations

import numpy as np


def substeps(grid, max_step: float) -> np.ndarray:
    """Number of equal RK4 steps used inside each grid interval."""
    widths = np.diff(np.asarray(grid, dtype=float))
    if np.any(widths <= 0):
        raise ValueError("time grid must be strictly increasing")
    return np.maximum(1, np.ceil(widths / max_step - 1e-12)).astype(int)


def integrate(rhs, y0, grid, max_step: float, after_step=None, after_sample=None):
    """Integrate ``y' = rhs(t, y)`` and return ``y`` at every grid point.

    ``after_step(t, y)`` may return a corrected state after every step and
    ``after_sample(i, t, y)`` after every recorded sample.
    """
    grid = np.asarray(grid, dtype=float)
    y = np.array(y0, copy=True)
    out = np.empty((grid.size,) + y.shape, dtype=y.dtype)
    out[0] = y
    for i, n in enumerate(substeps(grid, max_step), start=1):
        t = grid[i - 1]
        h = (grid[i] - t) / n
        for m in range(n):
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + (h / 2) * k1)
            k3 = rhs(t + h / 2, y + (h / 2) * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t = grid[i - 1] + (m + 1) * h
            if after_step is not None:
                y = after_step(t, y)
        if after_sample is not None:
            y = after_sample(i, grid[i], y)
        out[i] = y
    return out

