"""Central finite-difference helpers shared by the field and connection types."""

import numpy as np


def state_step(x):
    """Per-component step ``max(1e-6, 1e-6*|x|)``."""
    return np.maximum(1e-6, 1e-6 * np.abs(np.asarray(x, dtype=float)))


def fd_gradient(f, t, x):
    """Gradient of a scalar map ``f(t, x)`` with respect to ``x``."""
    x = np.asarray(x, dtype=float)
    h = state_step(x)
    grad = np.empty(x.size)
    for k in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h[k]
        xm[k] -= h[k]
        grad[k] = (f(t, xp) - f(t, xm)) / (xp[k] - xm[k])
    return grad


def fd_jacobian(f, t, x):
    """Jacobian ``df_a/dx_b`` of a vector map ``f(t, x)``."""
    x = np.asarray(x, dtype=float)
    h = state_step(x)
    cols = []
    for k in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h[k]
        xm[k] -= h[k]
        fp = np.atleast_1d(np.asarray(f(t, xp), dtype=float))
        fm = np.atleast_1d(np.asarray(f(t, xm), dtype=float))
        cols.append((fp - fm) / (xp[k] - xm[k]))
    if not cols:
        return np.zeros((np.atleast_1d(f(t, x)).size, 0))
    return np.column_stack(cols)


def fd_time_partial(f, t, x):
    """Partial derivative of ``f(t, x)`` with respect to ``t``."""
    h = max(1e-6, 1e-6 * abs(t))
    fp = np.asarray(f(t + h, x), dtype=float)
    fm = np.asarray(f(t - h, x), dtype=float)
    return (fp - fm) / ((t + h) - (t - h))


def curve_derivative(s, t, time_scale=1.0):
    """Fourth-order central difference of a curve ``s(t)``."""
    h = 1e-4 * time_scale
    return (
        -np.asarray(s(t + 2 * h), dtype=float)
        + 8 * np.asarray(s(t + h), dtype=float)
        - 8 * np.asarray(s(t - h), dtype=float)
        + np.asarray(s(t - 2 * h), dtype=float)
    ) / (12 * h)


def relative_error(analytic, approx, floor=1.0):
    """Max of ``|a - b| / max(|b|, floor)`` over components."""
    a = np.atleast_1d(np.asarray(analytic, dtype=float))
    b = np.atleast_1d(np.asarray(approx, dtype=float))
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))
