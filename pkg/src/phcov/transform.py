"""Time-variant state transformations, affine input maps and the matching equation.

A state transformation ``x_bar = phi(t, x)`` keeps time fixed.  Pushing a
system forward transforms ``J``, ``R`` as contravariant 2-tensors, ``G``
through the Jacobian and the inverse input map, ``H`` by composition with
the inverse, and the connection by its transition law.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .fields import (DissipationField, InputField, ScalarField, StructureField,
                     check_structure)
from .geometry import BundleChart, DimensionError, transform_connection
from .systems import PortHamiltonianSystem

COND_LIMIT = 1e12
PINV_RCOND = 1e-12


class SingularTransformationError(ValueError):
    """A Jacobian or input map is not invertible where it was needed."""


class MatchingFailure(ArithmeticError):
    """The matching equation has no solution of the requested form.

    ``residual`` holds the max residual of the least-squares candidate.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class StateTransformation:
    """``x_bar = forward(t, x)`` with ``x = inverse(t, x_bar)``.

    ``jacobian`` and ``time_partial`` default to central differences of
    ``forward``.
    """

    forward: Callable
    inverse: Callable
    jacobian: Optional[Callable] = None
    time_partial: Optional[Callable] = None
    target_chart: Optional[BundleChart] = None

    def __post_init__(self):
        if self.jacobian is None:
            object.__setattr__(self, "jacobian",
                               lambda t, x: numdiff.fd_jacobian(self.forward, t, x))
        if self.time_partial is None:
            object.__setattr__(self, "time_partial",
                               lambda t, x: numdiff.fd_time_partial(self.forward, t, x))

    def __call__(self, t, x):
        return np.asarray(self.forward(t, np.asarray(x, dtype=float)), dtype=float)

    def inv(self, t, xb):
        return np.asarray(self.inverse(t, np.asarray(xb, dtype=float)), dtype=float)

    def inverted(self):
        """The transformation ``x = phi^-1(t, x_bar)``."""
        def jac(t, xb):
            return np.linalg.inv(self.jacobian(t, self.inv(t, xb)))

        def dt(t, xb):
            x = self.inv(t, xb)
            return -np.linalg.solve(self.jacobian(t, x), self.time_partial(t, x))

        return StateTransformation(self.inv, self.__call__, jac, dt)

    def then(self, outer):
        """Composition ``outer(t, self(t, x))``."""
        def fwd(t, x):
            return outer(t, self(t, x))

        def inv(t, xb):
            return self.inv(t, outer.inv(t, xb))

        def jac(t, x):
            return outer.jacobian(t, self(t, x)) @ self.jacobian(t, x)

        def dt(t, x):
            xm = self(t, x)
            return outer.time_partial(t, xm) + outer.jacobian(t, xm) @ self.time_partial(t, x)

        return StateTransformation(fwd, inv, jac, dt, outer.target_chart)

    @classmethod
    def identity(cls, n):
        return cls(lambda t, x: np.array(x, dtype=float), lambda t, xb: np.array(xb, dtype=float),
                   lambda t, x: np.eye(n), lambda t, x: np.zeros(n))

    @classmethod
    def linear(cls, Q, Q_dot=None):
        """``x_bar = Q(t) x``; ``Q`` may be a constant matrix."""
        if not callable(Q):
            const = np.asarray(Q, dtype=float)
            Q = lambda t: const
            Q_dot = lambda t: np.zeros_like(const)
        elif Q_dot is None:
            Q_dot = lambda t: numdiff.curve_derivative(lambda s: np.asarray(Q(s), float), t)
        return cls(lambda t, x: Q(t) @ x,
                   lambda t, xb: np.linalg.solve(Q(t), xb),
                   lambda t, x: np.asarray(Q(t), dtype=float),
                   lambda t, x: Q_dot(t) @ x)

    @classmethod
    def shift(cls, c, c_dot=None, target_chart=None):
        """``x_bar = x - c(t)``."""
        if c_dot is None:
            c_dot = lambda t: numdiff.curve_derivative(lambda s: np.asarray(c(s), float), t)
        return cls(lambda t, x: x - c(t),
                   lambda t, xb: xb + c(t),
                   lambda t, x: np.eye(np.size(x)),
                   lambda t, x: -np.asarray(c_dot(t), dtype=float),
                   target_chart)


@dataclass
class TransformationReport:
    round_trip: float
    jacobian_error: float
    time_partial_error: float
    max_condition: float

    def passed(self, tol_round_trip=1e-10, tol_derivative=1e-5):
        return (self.round_trip <= tol_round_trip and self.jacobian_error <= tol_derivative
                and self.time_partial_error <= tol_derivative and self.max_condition < COND_LIMIT)


def check_transformation(phi: StateTransformation, points) -> TransformationReport:
    rt = jac_err = dt_err = cond = 0.0
    for t, x in points:
        x = np.asarray(x, dtype=float)
        xb = phi(t, x)
        rt = max(rt, float(np.max(np.abs(phi(t, phi.inv(t, xb)) - xb))))
        A = phi.jacobian(t, x)
        jac_err = max(jac_err, numdiff.relative_error(A, numdiff.fd_jacobian(phi.forward, t, x)))
        dt_err = max(dt_err, numdiff.relative_error(
            phi.time_partial(t, x), numdiff.fd_time_partial(phi.forward, t, x)))
        cond = max(cond, float(np.linalg.cond(A)))
    return TransformationReport(rt, jac_err, dt_err, cond)


@dataclass(frozen=True)
class InputTransformation:
    """Affine input map ``u_bar = M(t, x) u + g(t, x)``."""

    M: Callable
    g: Optional[Callable] = None
    M_inverse: Optional[Callable] = None

    def matrix(self, t, x):
        return np.atleast_2d(np.asarray(self.M(t, x), dtype=float))

    def offset(self, t, x):
        if self.g is None:
            return np.zeros(self.matrix(t, x).shape[0])
        return np.asarray(self.g(t, x), dtype=float).reshape(-1)

    def inverse_matrix(self, t, x):
        if self.M_inverse is not None:
            return np.atleast_2d(np.asarray(self.M_inverse(t, x), dtype=float))
        M = self.matrix(t, x)
        if M.size and np.linalg.cond(M) >= COND_LIMIT:
            raise SingularTransformationError(f"input map M is singular at t={t}")
        return np.linalg.inv(M) if M.size else M

    def apply(self, t, x, u):
        return self.matrix(t, x) @ np.asarray(u, dtype=float) + self.offset(t, x)

    def recover(self, t, x, u_bar):
        return self.inverse_matrix(t, x) @ (np.asarray(u_bar, dtype=float) - self.offset(t, x))

    def linear_input(self, t, x, u_bar):
        """``M u = u_bar - g``: the input seen by the pushed system."""
        return np.asarray(u_bar, dtype=float) - self.offset(t, x)

    def in_chart(self, phi: StateTransformation):
        """The same map with ``M``, ``g`` evaluated through ``x = phi^-1(t, x_bar)``."""
        g = None if self.g is None else (lambda t, xb: self.g(t, phi.inv(t, xb)))
        Minv = None if self.M_inverse is None else (lambda t, xb: self.M_inverse(t, phi.inv(t, xb)))
        return InputTransformation(lambda t, xb: self.M(t, phi.inv(t, xb)), g, Minv)

    @classmethod
    def identity(cls, m):
        return cls(lambda t, x: np.eye(m))

    @classmethod
    def constant(cls, M, g=None):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        Minv = np.linalg.inv(M)
        gfun = None if g is None else (lambda t, x, _g=np.asarray(g, float): _g)
        return cls(lambda t, x: M, gfun, lambda t, x: Minv)


def _checked_jacobian(phi, t, x):
    A = phi.jacobian(t, x)
    if np.linalg.cond(A) >= COND_LIMIT:
        raise SingularTransformationError(f"singular state Jacobian at t={t}, x={x}")
    return A


def push_system(sys: PortHamiltonianSystem, phi: StateTransformation,
                inp: Optional[InputTransformation] = None, samples=None) -> PortHamiltonianSystem:
    """Express ``sys`` in the chart ``x_bar = phi(t, x)``.

    Only the linear part ``M`` of ``inp`` enters ``G_bar``; an affine
    offset ``g`` is left to the matching equation.  When ``samples`` (pairs
    ``(t, x_bar)``) are given, Jacobian regularity and the structure of the
    pushed ``J``, ``R`` are checked there.
    """
    n = sys.state_dim
    m = sys.input_dim

    def Minv(t, x):
        return np.eye(m) if inp is None else inp.inverse_matrix(t, x)

    def J_bar(t, xb):
        x = phi.inv(t, xb)
        A = phi.jacobian(t, x)
        return A @ sys.J(t, x) @ A.T

    def R_bar(t, xb):
        x = phi.inv(t, xb)
        A = phi.jacobian(t, x)
        return A @ sys.R(t, x) @ A.T

    def G_bar(t, xb):
        x = phi.inv(t, xb)
        if m == 0:
            return np.zeros((n, 0))
        return phi.jacobian(t, x) @ sys.G(t, x) @ Minv(t, x)

    def H_val(t, xb):
        return sys.H(t, phi.inv(t, xb))

    def H_grad(t, xb):
        x = phi.inv(t, xb)
        return np.linalg.solve(phi.jacobian(t, x).T, sys.H.grad(t, x))

    def H_dt(t, xb):
        x = phi.inv(t, xb)
        x_dot = -np.linalg.solve(phi.jacobian(t, x), phi.time_partial(t, x))
        return sys.H.dt(t, x) + float(sys.H.grad(t, x) @ x_dot)

    conn_bar = transform_connection(sys.conn, phi)
    pushed = PortHamiltonianSystem(
        conn_bar.chart,
        StructureField(J_bar),
        DissipationField(R_bar),
        InputField(G_bar, m),
        ScalarField(H_val, H_dt, H_grad),
        conn_bar,
    )
    if samples is not None:
        for t, xb in samples:
            try:
                x = phi.inv(t, xb)
            except np.linalg.LinAlgError:
                raise SingularTransformationError(f"state transformation not invertible at t={t}") from None
            _checked_jacobian(phi, t, x)
            if inp is not None and m:
                inp.inverse_matrix(t, x)
        report = check_structure(pushed.J, pushed.R, samples, tol=1e-10)
        if not report.passed:
            raise ValueError(f"pushed structure violated: {report}")
    return pushed


@dataclass(frozen=True)
class MatchingCandidate:
    """A correction Hamiltonian on the transformed chart.

    ``convention`` records how it enters: ``"H_bar - H_breve"`` for the
    affine-input matching equation, ``"H_bar + H_breve"`` for the tracking
    error system.
    """

    H_breve: ScalarField
    convention: str = "H_bar - H_breve"
    residual: float = float("nan")


def matching_rhs(sys_bar: PortHamiltonianSystem, inp_bar: InputTransformation, t, xb):
    """``G_bar g`` (``inp_bar`` expressed on the transformed chart)."""
    if sys_bar.input_dim == 0:
        return np.zeros(sys_bar.state_dim)
    return sys_bar.G(t, xb) @ inp_bar.offset(t, xb)


def matching_residual(sys_bar: PortHamiltonianSystem, inp_bar: InputTransformation,
                      cand: MatchingCandidate, t, xb):
    """``(J_bar - R_bar) dH_breve - G_bar g`` at ``(t, x_bar)``; zero where the candidate solves it."""
    xb = np.asarray(xb, dtype=float)
    JR = sys_bar.J(t, xb) - sys_bar.R(t, xb)
    return JR @ cand.H_breve.grad(t, xb) - matching_rhs(sys_bar, inp_bar, t, xb)


def default_grid(n, t_span=(0.0, 1.0), size=20, radius=1.0, seed=0):
    """``size`` times by ``size`` states, deterministic."""
    times = np.linspace(t_span[0], t_span[1], size)
    points = np.random.default_rng(seed).uniform(-radius, radius, size=(size, n))
    return [(float(t), x) for t in times for x in points]


def solve_gradient_equation(JR, rhs, n, grid, tol=1e-8, convention="H_bar - H_breve"):
    """Solve ``JR(t) dH = rhs(t, x)`` for an affine gradient ``dH = S(t) x + c(t)``.

    ``JR`` and the coefficients of ``rhs`` may depend on time arbitrarily;
    they must be constant resp. affine in the state.  The minimum-norm
    least-squares solution is used; singular values below
    ``1e-12 * largest`` count as zero.  The candidate is verified on
    ``grid`` and :class:`MatchingFailure` is raised when the residual there
    exceeds ``tol`` or when ``S`` is not symmetric (no potential exists).
    """
    origin = np.zeros(n)
    basis = np.eye(n)

    def coefficients(t):
        A = np.atleast_2d(JR(t, origin))
        P = np.linalg.pinv(A, rcond=PINV_RCOND)
        b0 = np.asarray(rhs(t, origin), dtype=float)
        B1 = np.column_stack([np.asarray(rhs(t, e), dtype=float) - b0 for e in basis])
        S = P @ B1
        return 0.5 * (S + S.T), P @ b0, S

    def value(t, x):
        S, c, _ = coefficients(t)
        return 0.5 * x @ S @ x + c @ x

    def grad(t, x):
        S, c, _ = coefficients(t)
        return S @ x + c

    asym = 0.0
    for t in sorted({t for t, _ in grid}):
        _, _, S = coefficients(t)
        scale = max(1.0, float(np.max(np.abs(S), initial=0.0)))
        asym = max(asym, float(np.max(np.abs(S - S.T), initial=0.0)) / scale)
    H_breve = ScalarField(value, None, grad)

    worst = 0.0
    for t, x in grid:
        x = np.asarray(x, dtype=float)
        r = np.atleast_2d(JR(t, x)) @ grad(t, x) - np.asarray(rhs(t, x), dtype=float)
        worst = max(worst, float(np.max(np.abs(r), initial=0.0)))
    if asym > tol:
        raise MatchingFailure(f"least-squares gradient is not symmetric (asymmetry {asym:.3e})", worst)
    if worst > tol:
        raise MatchingFailure(f"right-hand side outside the range of J-R: residual {worst:.3e}", worst)
    return MatchingCandidate(H_breve, convention, worst)


def solve_matching_lq(sys_bar: PortHamiltonianSystem, inp_bar: InputTransformation,
                      grid=None, tol=1e-8) -> MatchingCandidate:
    """Closed-form solution of the affine-input matching equation.

    Linear-quadratic setting: ``J_bar``, ``R_bar``, ``G_bar`` constant in
    the state and the offset ``g`` affine in it.  ``grid`` is a list of
    ``(t, x_bar)`` verification points (default: 20 x 20 on ``t in [0, 1]``).
    """
    n = sys_bar.state_dim
    if grid is None:
        grid = default_grid(n)
    return solve_gradient_equation(
        lambda t, xb: sys_bar.J(t, xb) - sys_bar.R(t, xb),
        lambda t, xb: matching_rhs(sys_bar, inp_bar, t, xb),
        n, grid, tol)


@dataclass
class OutputReport:
    y_bar: np.ndarray
    y: np.ndarray
    supplied: Optional[float] = None
    supplied_bar: Optional[float] = None

    @property
    def power_mismatch(self):
        if self.supplied is None:
            return None
        return self.supplied_bar - self.supplied


def transformed_output(sys: PortHamiltonianSystem, phi: StateTransformation,
                       inp: InputTransformation, cand: Optional[MatchingCandidate], t, x,
                       u=None) -> OutputReport:
    """Output in the new input coordinates, ``M^-T (y - G^T (dphi)^T dH_breve)``.

    ``inp`` is expressed on the original chart.  With ``u`` given, the
    report also carries ``u.y`` and ``u_bar.y_bar``, which differ in
    general for affine input maps.
    """
    x = np.asarray(x, dtype=float)
    y = sys.collocated_output(t, x)
    correction = np.zeros_like(y)
    if cand is not None:
        A = phi.jacobian(t, x)
        correction = sys.G(t, x).T @ (A.T @ cand.H_breve.grad(t, phi(t, x)))
    y_bar = inp.inverse_matrix(t, x).T @ (y - correction)
    if u is None:
        return OutputReport(y_bar, y)
    u = np.asarray(u, dtype=float)
    u_bar = inp.apply(t, x, u)
    return OutputReport(y_bar, y, float(u @ y), float(u_bar @ y_bar))
