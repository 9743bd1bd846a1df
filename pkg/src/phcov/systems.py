"""Port-Hamiltonian systems with a connection.

In coordinates the dynamics read

    x0 - Gamma(t, x) = (J - R) dH/dx + G u,    y = G^T dH/dx,

and ``Gamma = 0`` gives back the time-invariant system.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fields import (DissipationField, InputField, ScalarField, StructureField,
                     check_structure)
from .geometry import BundleChart, Connection, DimensionError


@dataclass(frozen=True)
class InputSignal:
    """Time-dependent input ``u(t)`` of length ``input_dim``."""

    u: Callable
    input_dim: int

    def __call__(self, t):
        val = np.asarray(self.u(t), dtype=float).reshape(-1)
        if val.size != self.input_dim:
            raise DimensionError(f"input of length {val.size}, expected {self.input_dim}")
        return val

    @classmethod
    def zero(cls, m):
        return cls(lambda t: np.zeros(m), m)

    @classmethod
    def constant(cls, value):
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(lambda t: value.copy(), value.size)

    @classmethod
    def sinusoid(cls, amplitude, frequency, phase=0.0, offset=0.0):
        """``offset + amplitude * sin(frequency * t + phase)``, component-wise."""
        amp, freq, ph, off = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(v, dtype=float)) for v in (amplitude, frequency, phase, offset)))
        return cls(lambda t: off + amp * np.sin(freq * t + ph), amp.size)


@dataclass(frozen=True)
class PowerTerms:
    horizontal: float
    dissipation: float
    supplied: float
    total: float


@dataclass(frozen=True)
class PortHamiltonianSystem:
    """Covariant port-Hamiltonian system.

    If ``sample_points`` is given, ``J`` and ``R`` are checked there at
    construction and a ``ValueError`` is raised on violation.
    """

    chart: BundleChart
    J: StructureField
    R: DissipationField
    G: InputField
    H: ScalarField
    conn: Optional[Connection] = None
    sample_points: Optional[tuple] = None

    def __post_init__(self):
        if self.conn is None:
            object.__setattr__(self, "conn", Connection.trivial(self.chart))
        if self.conn.n != self.chart.state_dim:
            raise DimensionError("connection and chart dimensions differ")
        if self.sample_points:
            report = check_structure(self.J, self.R, self.sample_points, tol=1e-10)
            if not report.passed:
                raise ValueError(
                    f"structure violated: |J+J^T|={report.skew_residual:.3e}, "
                    f"|R-R^T|={report.symmetry_residual:.3e}, "
                    f"min eig R={report.min_eigenvalue:.3e}")

    @property
    def state_dim(self):
        return self.chart.state_dim

    @property
    def input_dim(self):
        return self.G.input_dim

    def energy(self, t, x):
        return self.H(t, x)

    def _state(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.state_dim:
            raise DimensionError(f"state of length {x.size}, system has n={self.state_dim}")
        return x

    def _input(self, u):
        if u is None:
            u = np.zeros(self.input_dim)
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.size != self.input_dim:
            raise DimensionError(f"input of length {u.size}, system has m={self.input_dim}")
        return u

    def vertical_field(self, t, x, u=None):
        x = self._state(x)
        u = self._input(u)
        dH = self.H.grad(t, x)
        return (self.J(t, x) - self.R(t, x)) @ dH + self.G(t, x) @ u

    def eval_dynamics(self, t, x, u=None):
        return self.conn(t, x) + self.vertical_field(t, x, u)

    def collocated_output(self, t, x, u=None):
        # u is accepted for interface parity with MechanicalSystem; unused
        x = self._state(x)
        return self.G(t, x).T @ self.H.grad(t, x)

    def power_decomposition(self, t, x, u=None) -> PowerTerms:
        x = self._state(x)
        u = self._input(u)
        dH = self.H.grad(t, x)
        horizontal = self.H.dt(t, x) + float(self.conn(t, x) @ dH)
        dissipation = -float(dH @ self.R(t, x) @ dH)
        supplied = float(dH @ self.G(t, x) @ u)
        return PowerTerms(horizontal, dissipation, supplied, horizontal + dissipation + supplied)

    def with_connection(self, conn):
        return PortHamiltonianSystem(self.chart, self.J, self.R, self.G, self.H, conn)

    def with_hamiltonian(self, H):
        return PortHamiltonianSystem(self.chart, self.J, self.R, self.G, H, self.conn)


def vertical_field(sys: PortHamiltonianSystem, t, x, u=None):
    return sys.vertical_field(t, x, u)


def eval_dynamics(sys: PortHamiltonianSystem, t, x, u=None):
    return sys.eval_dynamics(t, x, u)


def collocated_output(sys: PortHamiltonianSystem, t, x):
    return sys.collocated_output(t, x)


def power_decomposition(sys: PortHamiltonianSystem, t, x, u=None) -> PowerTerms:
    return sys.power_decomposition(t, x, u)


def linear_system(J, R, G, Q, b=None, conn=None, labels=None):
    """Constant ``J, R, G`` with quadratic ``H = x.Q.x/2 + b.x``."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    n = J.shape[0]
    chart = BundleChart(n, labels)
    G = np.asarray(G, dtype=float).reshape(n, -1) if np.size(G) else np.zeros((n, 0))
    return PortHamiltonianSystem(
        chart,
        StructureField.constant(J),
        DissipationField.constant(R),
        InputField.constant(G),
        ScalarField.quadratic(Q, b),
        conn if conn is not None else Connection.trivial(chart),
    )
