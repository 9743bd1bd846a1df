"""Charts, connections and the connection-induced splittings on the state bundle.

The extended state space carries coordinates ``(t, x)``.  A connection is
given by its coefficients ``Gamma(t, x)``; it fixes the horizontal direction
``w_H = d/dt + Gamma . d/dx`` and the vertical covector basis
``omega_V = dx - Gamma dt``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import numdiff


class DimensionError(ValueError):
    """Raised when an object does not match the dimension of its chart."""


@dataclass(frozen=True)
class BundleChart:
    state_dim: int
    state_labels: Optional[Sequence[str]] = None
    time_label: str = "t0"

    def __post_init__(self):
        if int(self.state_dim) < 1:
            raise ValueError("state_dim must be >= 1")
        labels = self.state_labels
        if labels is None:
            labels = tuple(f"x{k + 1}" for k in range(self.state_dim))
        labels = tuple(labels)
        if len(labels) != self.state_dim:
            raise DimensionError(
                f"{len(labels)} labels given for state_dim={self.state_dim}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"state labels are not distinct: {labels}")
        object.__setattr__(self, "state_labels", labels)

    def barred(self):
        """Chart with the same dimension and ``_bar`` suffixed labels."""
        return BundleChart(self.state_dim,
                           [f"{s}_bar" for s in self.state_labels],
                           self.time_label)


def _as_state(x, n):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != n:
        raise DimensionError(f"expected a state of length {n}, got {x.size}")
    return x


@dataclass(frozen=True)
class Connection:
    """Connection coefficients ``Gamma(t, x)`` on a chart.

    ``coeff_jacobian`` is optional; without it the state Jacobian is taken
    by central differences and :attr:`jacobian_mode` reports
    ``"finite-difference"``.
    """

    chart: BundleChart
    coeffs: Callable
    coeff_jacobian: Optional[Callable] = None

    @property
    def n(self):
        return self.chart.state_dim

    @property
    def jacobian_mode(self):
        return "analytic" if self.coeff_jacobian is not None else "finite-difference"

    def __call__(self, t, x):
        x = _as_state(x, self.n)
        g = np.asarray(self.coeffs(t, x), dtype=float).reshape(-1)
        if g.size != self.n:
            raise DimensionError(
                f"connection returned {g.size} coefficients, chart has {self.n}")
        return g

    def jacobian(self, t, x):
        x = _as_state(x, self.n)
        if self.coeff_jacobian is not None:
            jac = np.asarray(self.coeff_jacobian(t, x), dtype=float)
        else:
            jac = numdiff.fd_jacobian(self.coeffs, t, x)
        return jac.reshape(self.n, self.n)

    def is_trivial_at(self, t, x):
        return not np.any(self(t, x))

    @classmethod
    def trivial(cls, chart):
        n = chart.state_dim
        return cls(chart, lambda t, x: np.zeros(n), lambda t, x: np.zeros((n, n)))

    @classmethod
    def constant(cls, chart, value):
        value = _as_state(value, chart.state_dim)
        n = chart.state_dim
        return cls(chart, lambda t, x: value.copy(), lambda t, x: np.zeros((n, n)))

    @classmethod
    def linear(cls, chart, matrix, offset=None):
        """``Gamma(t, x) = A(t) x + c(t)``; constants are accepted for ``A`` and ``c``."""
        n = chart.state_dim
        mat = matrix if callable(matrix) else (lambda t, _m=np.asarray(matrix, float): _m)
        if offset is None:
            off = lambda t: np.zeros(n)
        elif callable(offset):
            off = offset
        else:
            off = lambda t, _c=np.asarray(offset, float): _c
        return cls(chart,
                   lambda t, x: np.asarray(mat(t), float) @ x + np.asarray(off(t), float),
                   lambda t, x: np.asarray(mat(t), float))


@dataclass(frozen=True)
class TangentVector:
    base: tuple
    t_dot: float
    x_dot: np.ndarray

    def __post_init__(self):
        t, x = self.base
        object.__setattr__(self, "base", (float(t), np.asarray(x, dtype=float).reshape(-1)))
        object.__setattr__(self, "x_dot", np.asarray(self.x_dot, dtype=float).reshape(-1))
        if self.x_dot.size != self.base[1].size:
            raise DimensionError("x_dot and base state differ in length")


@dataclass(frozen=True)
class CotangentVector:
    base: tuple
    t_cov: float
    x_cov: np.ndarray

    def __post_init__(self):
        t, x = self.base
        object.__setattr__(self, "base", (float(t), np.asarray(x, dtype=float).reshape(-1)))
        object.__setattr__(self, "x_cov", np.asarray(self.x_cov, dtype=float).reshape(-1))
        if self.x_cov.size != self.base[1].size:
            raise DimensionError("x_cov and base state differ in length")


@dataclass(frozen=True)
class SplitTangent:
    """Coefficients of ``w_H`` (horizontal) and of ``d/dx`` (vertical)."""

    horizontal_coeff: float
    vertical: np.ndarray
    base: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class SplitCotangent:
    """Coefficients of ``dt`` (horizontal) and of ``omega_V`` (vertical)."""

    horizontal_coeff: float
    vertical: np.ndarray
    base: tuple = field(default=None, compare=False)


def _check_base(conn, base):
    t, x = base
    if x.size != conn.n:
        raise DimensionError(f"vector of dimension {x.size} on a chart of dimension {conn.n}")
    return conn(t, x)


def split_tangent(conn: Connection, v: TangentVector) -> SplitTangent:
    gamma = _check_base(conn, v.base)
    return SplitTangent(v.t_dot, v.x_dot - v.t_dot * gamma, v.base)


def split_cotangent(conn: Connection, w: CotangentVector) -> SplitCotangent:
    gamma = _check_base(conn, w.base)
    return SplitCotangent(w.t_cov + float(w.x_cov @ gamma), w.x_cov.copy(), w.base)


def merge_tangent(conn: Connection, s: SplitTangent) -> TangentVector:
    """Inverse of :func:`split_tangent`."""
    gamma = _check_base(conn, s.base)
    return TangentVector(s.base, s.horizontal_coeff, s.horizontal_coeff * gamma + s.vertical)


def merge_cotangent(conn: Connection, s: SplitCotangent) -> CotangentVector:
    """Inverse of :func:`split_cotangent`.

    ``h dt + v_a omega_V^a = (h - v . Gamma) dt + v_a dx^a``.
    """
    gamma = _check_base(conn, s.base)
    return CotangentVector(s.base, s.horizontal_coeff - float(s.vertical @ gamma), s.vertical.copy())


def pairing(w: CotangentVector, v: TangentVector) -> float:
    return w.t_cov * v.t_dot + float(w.x_cov @ v.x_dot)


def split_pairing(w: SplitCotangent, v: SplitTangent) -> float:
    # dt(w_H) = 1, dt(d/dx) = 0, omega_V(w_H) = 0, omega_V^a(d/dx^b) = delta
    return w.horizontal_coeff * v.horizontal_coeff + float(w.vertical @ v.vertical)


def transform_connection(conn: Connection, phi) -> Connection:
    """Connection coefficients in the chart ``x_bar = phi(t, x)``.

    ``Gamma_bar(t, x_bar) = d_t phi + (d_x phi) Gamma``, evaluated at
    ``x = phi.inverse(t, x_bar)``.  ``phi`` must provide ``inverse``,
    ``jacobian`` and ``time_partial``; the result differentiates its
    coefficients numerically.
    """
    for attr in ("inverse", "jacobian", "time_partial"):
        if getattr(phi, attr, None) is None:
            raise ValueError(f"state transformation lacks {attr!r}")

    def coeffs(t, xb):
        x = phi.inverse(t, xb)
        return phi.time_partial(t, x) + phi.jacobian(t, x) @ conn(t, x)

    chart = getattr(phi, "target_chart", None) or conn.chart.barred()
    return Connection(chart, coeffs)


@dataclass(frozen=True)
class Curve:
    """A section ``t -> s(t)`` with an optional analytic time derivative."""

    value: Callable
    derivative: Optional[Callable] = None
    time_scale: float = 1.0

    def __call__(self, t):
        return np.asarray(self.value(t), dtype=float).reshape(-1)

    def velocity(self, t):
        if self.derivative is not None:
            return np.asarray(self.derivative(t), dtype=float).reshape(-1)
        return numdiff.curve_derivative(self, t, self.time_scale).reshape(-1)


def covariant_derivative(conn: Connection, s, t) -> np.ndarray:
    """``d/dt s(t) - Gamma(t, s(t))``.

    ``s`` is a :class:`Curve` or a plain callable (differentiated
    numerically).
    """
    if not isinstance(s, Curve):
        s = Curve(s)
    ds = s.velocity(t)
    if not np.all(np.isfinite(ds)):
        raise ValueError(f"curve derivative unavailable at t={t}")
    return ds - conn(t, s(t))


def jacobian_check(fn, jac, points, tol=1e-5):
    """Compare an analytic Jacobian ``jac(t, x)`` with central differences of ``fn``.

    Returns ``(passed, max_relative_error)``.
    """
    worst = 0.0
    for t, x in points:
        x = np.asarray(x, dtype=float)
        approx = numdiff.fd_jacobian(fn, t, x)
        worst = max(worst, numdiff.relative_error(np.asarray(jac(t, x), float), approx))
    return worst <= tol, worst
