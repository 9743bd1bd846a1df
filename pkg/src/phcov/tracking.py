"""Error systems for trajectory tracking.

Given a reference ``c_d(t)`` with feed-forward ``eta_d(t)`` for a system
with trivial connection, the error coordinates ``x_bar = x - c_d(t)`` and
inputs ``u_bar = M (u - eta_d)`` give a time-variant system whose
connection is ``-dc_d/dt``.  It is port-Hamiltonian with the modified
Hamiltonian ``H_bar + H_breve`` iff

    (J_bar - R_bar) dH_breve = Gamma_bar + G eta_d.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import numdiff
from .fields import ScalarField
from .geometry import Connection
from .systems import PortHamiltonianSystem, PowerTerms
from .transform import (InputTransformation, MatchingCandidate, StateTransformation,
                        default_grid, push_system, solve_gradient_equation)


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Desired state ``c_d(t)``, its velocity and the feed-forward ``eta_d(t)``."""

    c_d: Callable
    eta_d: Callable
    c_d_dot: Optional[Callable] = None

    def state(self, t):
        return np.asarray(self.c_d(t), dtype=float).reshape(-1)

    def velocity(self, t):
        if self.c_d_dot is not None:
            return np.asarray(self.c_d_dot(t), dtype=float).reshape(-1)
        return numdiff.curve_derivative(self.state, t)

    def feedforward(self, t):
        return np.atleast_1d(np.asarray(self.eta_d(t), dtype=float)).reshape(-1)

    @classmethod
    def from_samples(cls, times, states, eta):
        """Natural cubic splines through sampled states and inputs."""
        spline = CubicSpline(times, np.asarray(states, dtype=float), axis=0, bc_type="natural")
        eta_spline = CubicSpline(times, np.asarray(eta, dtype=float), axis=0, bc_type="natural")
        velocity = spline.derivative()
        return cls(spline, eta_spline, velocity)


@dataclass
class ReferenceReport:
    times: np.ndarray
    residuals: np.ndarray
    tol: float

    @property
    def max_residual(self):
        return float(np.max(self.residuals, initial=0.0))

    @property
    def passed(self):
        return self.max_residual <= self.tol


def verify_reference(sys: PortHamiltonianSystem, ref: ReferenceTrajectory, times, tol=1e-8) -> ReferenceReport:
    """Residual ``|dc_d/dt - f(c_d, eta_d)|`` of the reference at each time."""
    times = np.asarray(times, dtype=float)
    res = []
    for t in times:
        c = ref.state(t)
        if not sys.conn.is_trivial_at(t, c):
            raise ValueError("reference verification needs a system with trivial connection")
        res.append(float(np.linalg.norm(ref.velocity(t) - sys.eval_dynamics(t, c, ref.feedforward(t)))))
    return ReferenceReport(times, np.array(res), tol)


@dataclass(frozen=True)
class ErrorSystem:
    """Tracking-error system.

    ``base`` is the pushed system in ``x_bar``; ``input_map`` is
    ``u_bar = M (u - eta_d)`` expressed on the ``x_bar`` chart.  The error
    dynamics feed ``base`` with ``M u = u_bar + M eta_d``.
    """

    base: PortHamiltonianSystem
    reference: ReferenceTrajectory
    input_map: InputTransformation
    original: PortHamiltonianSystem
    phi: StateTransformation

    @property
    def state_dim(self):
        return self.base.state_dim

    @property
    def input_dim(self):
        return self.base.input_dim

    def energy(self, t, xb):
        return self.base.H(t, xb)

    def effective_input(self, t, xb, u_bar=None):
        u_bar = np.zeros(self.input_dim) if u_bar is None else u_bar
        return self.input_map.linear_input(t, xb, u_bar)

    def eval_dynamics(self, t, xb, u_bar=None):
        return self.base.eval_dynamics(t, xb, self.effective_input(t, xb, u_bar))

    def collocated_output(self, t, xb, u=None):
        return self.base.collocated_output(t, xb)

    def power_decomposition(self, t, xb, u_bar=None) -> PowerTerms:
        return self.base.power_decomposition(t, xb, self.effective_input(t, xb, u_bar))

    def to_error(self, t, x):
        return self.phi(t, x)

    def from_error(self, t, xb):
        return self.phi.inv(t, xb)


def _input_matrix(M, m):
    """``(M, M_inverse)`` callables; the inverse is precomputed for constant ``M``."""
    if callable(M):
        return M, None
    const = np.eye(m) if M is None else np.atleast_2d(np.asarray(M, dtype=float))
    if const.shape != (m, m):
        raise ValueError(f"input matrix of shape {const.shape}, expected {(m, m)}")
    inv = np.linalg.inv(const) if m else const
    return (lambda t, x: const), (lambda t, x: inv)


def build_error_system(sys: PortHamiltonianSystem, ref: ReferenceTrajectory, M=None,
                       check_times=None, tol=1e-8) -> ErrorSystem:
    """Error system for ``x_bar = x - c_d(t)``, ``u_bar = M (u - eta_d)``.

    ``M`` is a constant matrix, a callable ``M(t, x)`` or ``None``
    (identity).  With ``check_times`` the reference is verified first.
    """
    if check_times is not None:
        report = verify_reference(sys, ref, check_times, tol)
        if not report.passed:
            raise ValueError(f"reference is not a trajectory: residual {report.max_residual:.3e}")
    m = sys.input_dim
    Mfun, Minv = _input_matrix(M, m)
    phi = StateTransformation.shift(ref.state, ref.velocity, sys.chart.barred())
    inp = InputTransformation(Mfun, lambda t, x: -Mfun(t, x) @ ref.feedforward(t), Minv)
    base = push_system(sys, phi, inp)
    return ErrorSystem(base, ref, inp.in_chart(phi), sys, phi)


def error_matching_rhs(es: ErrorSystem, t, xb):
    """``Gamma_bar + G eta_d`` (connection term plus feed-forward term)."""
    xb = np.asarray(xb, dtype=float)
    x = es.from_error(t, xb)
    rhs = es.base.conn(t, xb)
    if es.input_dim:
        rhs = rhs + es.original.G(t, x) @ es.reference.feedforward(t)
    return rhs


def error_matching_residual(es: ErrorSystem, cand: MatchingCandidate, t, xb):
    """``(J_bar - R_bar) dH_breve - (Gamma_bar + G eta_d)``; the candidate enters as ``H_bar + H_breve``."""
    xb = np.asarray(xb, dtype=float)
    JR = es.base.J(t, xb) - es.base.R(t, xb)
    return JR @ cand.H_breve.grad(t, xb) - error_matching_rhs(es, t, xb)


def solve_error_matching(es: ErrorSystem, grid=None, tol=1e-8) -> MatchingCandidate:
    """Closed-form ``H_breve`` for linear-quadratic error systems."""
    n = es.state_dim
    if grid is None:
        grid = default_grid(n, (0.0, 2 * np.pi))
    return solve_gradient_equation(
        lambda t, xb: es.base.J(t, xb) - es.base.R(t, xb),
        lambda t, xb: error_matching_rhs(es, t, xb),
        n, grid, tol, convention="H_bar + H_breve")


def absorbed_system(es: ErrorSystem, cand: MatchingCandidate) -> PortHamiltonianSystem:
    """Error system with connection and feed-forward absorbed into ``H_bar + H_breve``.

    The result has a trivial connection and takes ``u_bar`` directly.
    """
    base = es.base
    H, Hb = base.H, cand.H_breve
    H_mod = ScalarField(lambda t, x: H(t, x) + Hb(t, x),
                        lambda t, x: H.dt(t, x) + Hb.dt(t, x),
                        lambda t, x: H.grad(t, x) + Hb.grad(t, x))
    return PortHamiltonianSystem(base.chart, base.J, base.R, base.G, H_mod,
                                 Connection.trivial(base.chart))
