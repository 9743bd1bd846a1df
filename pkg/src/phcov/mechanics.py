"""Hamiltonian mechanics on ``(q, p)`` with a space connection ``gamma(t, q)``.

The space connection induces the covertical connection on phase space,

    Gamma_H = (gamma, -(d gamma / dq)^T p),

and the Hamiltonian vector field is generated by ``H_gamma = H + p.gamma``.
Inputs enter through a controlled Hamiltonian ``H = H0 - Hc_r u^r``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import numdiff
from .fields import DissipationField, InputField, ScalarField, StructureField
from .geometry import BundleChart, Connection, DimensionError
from .systems import InputSignal, PortHamiltonianSystem


@dataclass(frozen=True)
class MechChart:
    q_dim: int

    def __post_init__(self):
        if int(self.q_dim) < 1:
            raise ValueError("q_dim must be >= 1")

    @property
    def state_dim(self):
        return 2 * self.q_dim

    def bundle_chart(self):
        labels = [f"q{k + 1}" for k in range(self.q_dim)] + [f"p{k + 1}" for k in range(self.q_dim)]
        return BundleChart(self.state_dim, labels)

    def split(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.state_dim:
            raise DimensionError(f"phase-space state of length {x.size}, expected {self.state_dim}")
        return x[:self.q_dim], x[self.q_dim:]


@dataclass(frozen=True)
class SpaceConnection:
    """``gamma(t, q)``; ``gamma_jacobian[b, r] = d gamma^b / d q^r``."""

    gamma: Callable
    gamma_jacobian: Optional[Callable] = None

    def __call__(self, t, q):
        return np.asarray(self.gamma(t, np.asarray(q, dtype=float)), dtype=float).reshape(-1)

    def jacobian(self, t, q):
        q = np.asarray(q, dtype=float)
        if self.gamma_jacobian is not None:
            return np.atleast_2d(np.asarray(self.gamma_jacobian(t, q), dtype=float))
        return numdiff.fd_jacobian(self.gamma, t, q)

    @classmethod
    def trivial(cls, nq):
        return cls(lambda t, q: np.zeros(nq), lambda t, q: np.zeros((nq, nq)))

    @classmethod
    def linear(cls, omega):
        """``gamma = Omega(t) q``; ``omega`` may be a constant matrix."""
        if not callable(omega):
            const = np.asarray(omega, dtype=float)
            omega = lambda t: const
        return cls(lambda t, q: omega(t) @ q, lambda t, q: np.asarray(omega(t), dtype=float))


@dataclass(frozen=True)
class ControlledHamiltonian:
    """``H = H0 - sum_r Hc[r] u^r(t)``, all fields on ``(t, q, p)``."""

    H0: ScalarField
    Hc: Sequence[ScalarField] = ()
    u: Optional[InputSignal] = None

    def input_at(self, t):
        if self.u is None:
            return np.zeros(len(self.Hc))
        return self.u(t)

    def gradient(self, t, x, u=None):
        """State gradient of the full controlled Hamiltonian."""
        u = self.input_at(t) if u is None else np.asarray(u, dtype=float)
        g = self.H0.grad(t, x)
        for hc, ur in zip(self.Hc, u):
            g = g - ur * hc.grad(t, x)
        return g

    def assembled(self):
        """The controlled Hamiltonian as a single :class:`ScalarField`."""
        if self.u is None and self.Hc:
            raise ValueError("assembling requires an input signal")

        def value(t, x):
            return self.H0(t, x) - sum(hc(t, x) * ur for hc, ur in zip(self.Hc, self.input_at(t)))

        def dt(t, x):
            u = self.input_at(t)
            u_dot = numdiff.curve_derivative(self.input_at, t) if self.Hc else u
            out = self.H0.dt(t, x)
            for hc, ur, ur_dot in zip(self.Hc, u, u_dot):
                out -= hc.dt(t, x) * ur + hc(t, x) * ur_dot
            return out

        return ScalarField(value, dt, lambda t, x: self.gradient(t, x))


@dataclass(frozen=True)
class MechPowerTerms:
    horizontal: float
    supplied: float
    outputs: np.ndarray
    total: float
    # outputs from the vertical field of H0 alone; same pairing with u,
    # different components when control Hamiltonians couple
    outputs_free: np.ndarray = field(default=None, compare=False)

    @property
    def dissipation(self):
        return 0.0


def _symplectic_gradient(grad_q, grad_p):
    # vertical Hamiltonian field (dH/dp, -dH/dq)
    return np.concatenate([grad_p, -grad_q])


def covertical_connection(sc: SpaceConnection, t, q, p):
    """``(gamma, -(d gamma/dq)^T p)`` on phase space."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    gamma = sc(t, q)
    if gamma.size != q.size or p.size != q.size:
        raise DimensionError("q, p and gamma must share their length")
    return np.concatenate([gamma, -sc.jacobian(t, q).T @ p])


def _grad_qp(H, t, q, p):
    nq = np.size(q)
    g = H.grad(t, np.concatenate([q, p]))
    return g[:nq], g[nq:]


def mech_vector_field(sc: SpaceConnection, H: ScalarField, t, q, p):
    """State part of the Hamiltonian vector field of ``H_gamma = H + p.gamma``."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    gq, gp = _grad_qp(H, t, q, p)
    gamma = sc(t, q)
    dgamma = sc.jacobian(t, q)
    # d(p.gamma)/dq = dgamma^T p, d(p.gamma)/dp = gamma
    return np.concatenate([gp + gamma, -(gq + dgamma.T @ p)])


def split_mech_field(sc: SpaceConnection, H: ScalarField, t, q, p):
    """``(vertical, horizontal)`` parts of the Hamiltonian vector field."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    gq, gp = _grad_qp(H, t, q, p)
    return _symplectic_gradient(gq, gp), covertical_connection(sc, t, q, p)


def mech_power_balance(sc: SpaceConnection, ch: ControlledHamiltonian, t, q, p, u=None) -> MechPowerTerms:
    """Power balance of the free Hamiltonian ``H0``.

    ``total = v_H(H0)``, ``horizontal = v_HH(H0)`` and the outputs are
    ``y_r = v_HV(Hc_r)`` with ``v_HV`` the vertical field of the full
    controlled Hamiltonian.  Without ``u`` the input signal of ``ch`` is
    sampled at ``t``.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    x = np.concatenate([q, p])
    u = ch.input_at(t) if u is None else np.asarray(u, dtype=float).reshape(-1)
    if u.size != len(ch.Hc):
        raise DimensionError(f"{u.size} inputs for {len(ch.Hc)} control Hamiltonians")
    nq = q.size

    grad_H = ch.gradient(t, x, u)
    v_vert = _symplectic_gradient(grad_H[:nq], grad_H[nq:])
    v_hor = covertical_connection(sc, t, q, p)
    grad0 = ch.H0.grad(t, x)
    dt0 = ch.H0.dt(t, x)

    horizontal = dt0 + float(grad0 @ v_hor)
    free_vert = _symplectic_gradient(grad0[:nq], grad0[nq:])
    outputs = np.array([float(hc.grad(t, x) @ v_vert) for hc in ch.Hc])
    outputs_free = np.array([float(hc.grad(t, x) @ free_vert) for hc in ch.Hc])
    supplied = float(outputs @ u)
    total = dt0 + float(grad0 @ (v_hor + v_vert))
    return MechPowerTerms(horizontal, supplied, outputs, total, outputs_free)


@dataclass(frozen=True)
class MechanicalSystem:
    """Controlled mechanical system with a space connection.

    Offers the same evaluation surface as
    :class:`~phcov.systems.PortHamiltonianSystem` (``eval_dynamics``,
    ``collocated_output``, ``power_decomposition``, ``energy``) so both
    can be integrated by the runner.
    """

    chart: MechChart
    space_connection: SpaceConnection
    H0: ScalarField
    Hc: Sequence[ScalarField] = ()

    @property
    def state_dim(self):
        return self.chart.state_dim

    @property
    def input_dim(self):
        return len(self.Hc)

    def controlled(self, u=None):
        return ControlledHamiltonian(self.H0, tuple(self.Hc), u)

    def energy(self, t, x):
        return self.H0(t, x)

    def _u(self, u):
        return np.zeros(self.input_dim) if u is None else np.asarray(u, dtype=float).reshape(-1)

    def eval_dynamics(self, t, x, u=None):
        q, p = self.chart.split(x)
        u = self._u(u)
        g = self.controlled().gradient(t, np.asarray(x, float), u)
        nq = self.chart.q_dim
        return covertical_connection(self.space_connection, t, q, p) + _symplectic_gradient(g[:nq], g[nq:])

    def power_decomposition(self, t, x, u=None) -> MechPowerTerms:
        q, p = self.chart.split(x)
        return mech_power_balance(self.space_connection, self.controlled(), t, q, p, self._u(u))

    def collocated_output(self, t, x, u=None):
        return self.power_decomposition(t, x, u).outputs

    def embed(self) -> PortHamiltonianSystem:
        """Port-Hamiltonian form on ``x = (q, p)``.

        ``J`` is canonical, ``R = 0``, the columns of ``G`` are ``-J dHc_r``
        and the connection is the covertical one.
        """
        nq = self.chart.q_dim
        n = 2 * nq
        J = StructureField.canonical(nq)
        Jmat = J(0.0, np.zeros(n))
        Hc = tuple(self.Hc)

        def G(t, x):
            if not Hc:
                return np.zeros((n, 0))
            return np.column_stack([-Jmat @ hc.grad(t, x) for hc in Hc])

        sc = self.space_connection
        conn = Connection(self.chart.bundle_chart(),
                          lambda t, x: covertical_connection(sc, t, x[:nq], x[nq:]))
        return PortHamiltonianSystem(self.chart.bundle_chart(), J, DissipationField.zero(n),
                                     InputField(G, len(Hc)), self.H0, conn)


def rotation(omega):
    """Planar rotation ``R(t)`` by angle ``omega t`` and its derivative."""
    def R(t):
        c, s = np.cos(omega * t), np.sin(omega * t)
        return np.array([[c, -s], [s, c]])

    def R_dot(t):
        c, s = np.cos(omega * t), np.sin(omega * t)
        return omega * np.array([[-s, -c], [c, -s]])

    return R, R_dot


def angular_velocity(omega):
    """``Omega = R_dot R^T = [[0, -omega], [omega, 0]]``."""
    return np.array([[0.0, -omega], [omega, 0.0]])


def free_particle_hamiltonian(nq, mass):
    """``|p|^2 / (2 mass)`` on ``(q, p)``."""
    return ScalarField(lambda t, x: 0.5 * x[nq:] @ x[nq:] / mass,
                       lambda t, x: 0.0,
                       lambda t, x: np.concatenate([np.zeros(nq), x[nq:] / mass]))
