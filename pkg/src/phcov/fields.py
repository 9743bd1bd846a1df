"""Scalar and tensor fields on the extended state space ``(t, x)``."""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import numdiff
from .geometry import Connection, DimensionError

PSD_TOL = -1e-10


@dataclass(frozen=True)
class ScalarField:
    """A function ``H(t, x)`` with its time partial and state gradient.

    Derivatives left as ``None`` are computed by central differences; the
    :attr:`mode` property tells which derivatives are analytic.
    """

    value: Callable
    time_partial: Optional[Callable] = None
    state_gradient: Optional[Callable] = None

    @property
    def mode(self):
        if self.time_partial is not None and self.state_gradient is not None:
            return "analytic"
        if self.time_partial is None and self.state_gradient is None:
            return "finite-difference"
        return "mixed"

    def __call__(self, t, x):
        return float(self.value(t, np.asarray(x, dtype=float)))

    def dt(self, t, x):
        x = np.asarray(x, dtype=float)
        if self.time_partial is not None:
            return float(self.time_partial(t, x))
        return float(numdiff.fd_time_partial(self.value, t, x))

    def grad(self, t, x):
        x = np.asarray(x, dtype=float)
        if self.state_gradient is not None:
            return np.asarray(self.state_gradient(t, x), dtype=float).reshape(-1)
        return numdiff.fd_gradient(self.value, t, x)

    @classmethod
    def quadratic(cls, Q, b=None, c=0.0):
        """``H = x.Q.x/2 + b.x + c`` with symmetric ``Q``."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        b = np.zeros(Q.shape[0]) if b is None else np.asarray(b, dtype=float)
        return cls(lambda t, x: 0.5 * x @ Q @ x + b @ x + c,
                   lambda t, x: 0.0,
                   lambda t, x: Q @ x + b)

    @classmethod
    def zero(cls):
        return cls(lambda t, x: 0.0, lambda t, x: 0.0, lambda t, x: np.zeros(np.size(x)))


def _constant(mat):
    mat = np.array(mat, dtype=float)
    return lambda t, x: mat


@dataclass(frozen=True)
class StructureField:
    """Skew-symmetric interconnection ``J(t, x)``."""

    J: Callable

    def __call__(self, t, x):
        return np.atleast_2d(np.asarray(self.J(t, x), dtype=float))

    @classmethod
    def constant(cls, mat):
        return cls(_constant(mat))

    @classmethod
    def zero(cls, n):
        return cls(_constant(np.zeros((n, n))))

    @classmethod
    def canonical(cls, nq):
        """``[[0, I], [-I, 0]]`` on ``(q, p)``."""
        eye = np.eye(nq)
        zero = np.zeros((nq, nq))
        return cls.constant(np.block([[zero, eye], [-eye, zero]]))


@dataclass(frozen=True)
class DissipationField:
    """Symmetric positive semidefinite ``R(t, x)``."""

    R: Callable

    def __call__(self, t, x):
        return np.atleast_2d(np.asarray(self.R(t, x), dtype=float))

    @classmethod
    def constant(cls, mat):
        return cls(_constant(mat))

    @classmethod
    def zero(cls, n):
        return cls(_constant(np.zeros((n, n))))


@dataclass(frozen=True)
class InputField:
    """Input map ``G(t, x)`` with ``input_dim`` columns (``0`` is allowed)."""

    G: Callable
    input_dim: int

    def __call__(self, t, x):
        g = np.asarray(self.G(t, x), dtype=float)
        n = np.size(x)
        if g.size == 0:
            return np.zeros((n, self.input_dim))
        g = g.reshape(n, -1)
        if g.shape[1] != self.input_dim:
            raise DimensionError(
                f"input map has {g.shape[1]} columns, expected {self.input_dim}")
        return g

    @classmethod
    def constant(cls, mat):
        mat = np.asarray(mat, dtype=float)
        if mat.ndim == 1:
            mat = mat.reshape(-1, 1)
        return cls(_constant(mat), mat.shape[1])

    @classmethod
    def none(cls, n):
        return cls(_constant(np.zeros((n, 0))), 0)


def decompose_dH(conn: Connection, H: ScalarField, t, x):
    """Split ``dH`` into ``(vertical, horizontal)``.

    ``dH = vertical . omega_V + horizontal dt`` with ``vertical = dH/dx``
    and ``horizontal = w_H(H) = dH/dt + Gamma . dH/dx``.
    """
    vertical = H.grad(t, x)
    horizontal = H.dt(t, x) + float(conn(t, x) @ vertical)
    return vertical, horizontal


@dataclass
class PointCheck:
    point: tuple
    error: float = float("nan")
    failure: Optional[str] = None


@dataclass
class GradCheckReport:
    passed: bool
    max_error: float
    tol: float
    mode: str
    points: List[PointCheck] = field(default_factory=list)

    def __str__(self):
        state = "pass" if self.passed else "FAIL"
        return f"grad_check [{self.mode}] {state}: max rel err {self.max_error:.3e} (tol {self.tol:g})"


def grad_check(H: ScalarField, points, h=None, tol=1e-6) -> GradCheckReport:
    """Compare the analytic ``(dH/dt, dH/dx)`` with central differences.

    The error at a point is ``max |a - fd| / max(|fd|, 1)`` over all
    partials.  A point that fails to evaluate is recorded and fails the
    check without aborting the sweep.
    """
    results = []
    for t, x in points:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        rec = PointCheck((t, x))
        try:
            analytic = np.concatenate([[H.dt(t, x)], H.grad(t, x)])
            if h is None:
                fd_t = numdiff.fd_time_partial(H.value, t, x)
                fd_x = numdiff.fd_gradient(H.value, t, x)
            else:
                fd_t = (H(t + h, x) - H(t - h, x)) / (2 * h)
                fd_x = np.array([
                    (H(t, x + h * e) - H(t, x - h * e)) / (2 * h) for e in np.eye(x.size)
                ])
            rec.error = numdiff.relative_error(analytic, np.concatenate([[fd_t], fd_x]))
            if not np.isfinite(rec.error):
                rec.failure = "non-finite derivative"
        except (ArithmeticError, ValueError) as exc:
            rec.failure = f"{type(exc).__name__}: {exc}"
        results.append(rec)
    errors = [r.error for r in results if r.failure is None]
    worst = max(errors, default=0.0)
    passed = all(r.failure is None for r in results) and worst <= tol
    return GradCheckReport(passed, worst, tol, H.mode, results)


@dataclass
class StructureReport:
    skew_residual: float
    symmetry_residual: float
    min_eigenvalue: float
    tol: float

    @property
    def skew_ok(self):
        return self.skew_residual <= self.tol

    @property
    def symmetric_ok(self):
        return self.symmetry_residual <= self.tol

    @property
    def psd_ok(self):
        return self.min_eigenvalue >= PSD_TOL

    @property
    def passed(self):
        return self.skew_ok and self.symmetric_ok and self.psd_ok


def _square(mat, name):
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"{name} is not square: shape {mat.shape}")
    return mat


def check_structure(J: StructureField, R: DissipationField, samples, tol=1e-12) -> StructureReport:
    """Skew-symmetry of ``J`` and symmetry/semidefiniteness of ``R`` over samples."""
    skew = 0.0
    sym = 0.0
    min_eig = np.inf
    for t, x in samples:
        j = _square(J(t, x), "J")
        r = _square(R(t, x), "R")
        skew = max(skew, float(np.max(np.abs(j + j.T), initial=0.0)))
        sym = max(sym, float(np.max(np.abs(r - r.T), initial=0.0)))
        if r.size:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (r + r.T))[0]))
    return StructureReport(skew, sym, min_eig if np.isfinite(min_eig) else 0.0, tol)
