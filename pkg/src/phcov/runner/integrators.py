"""Fixed-step integration of covariant dynamics with power-ledger recording."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .. import numdiff

METHODS = ("explicit-rk4", "implicit-midpoint")
_ALIASES = {"rk4": "explicit-rk4", "midpoint": "implicit-midpoint"}


class IntegrationError(RuntimeError):
    """Integration aborted; ``step`` is the index of the failing step."""

    def __init__(self, message, step):
        super().__init__(f"step {step}: {message}")
        self.step = step


class NewtonDivergence(IntegrationError):
    pass


def canonical_method(name):
    name = _ALIASES.get(name, name)
    if name not in METHODS:
        raise ValueError(f"unknown integration method {name!r}; use one of rk4, midpoint")
    return name


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "explicit-rk4"
    dt: float = 1e-3
    t_span: tuple = (0.0, 1.0)
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        t0, t1 = (float(v) for v in self.t_span)
        object.__setattr__(self, "t_span", (t0, t1))
        if not t1 > t0:
            raise ValueError(f"t_span must satisfy t1 > t0, got {self.t_span}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.dt > t1 - t0:
            raise ValueError(f"dt={self.dt} exceeds the time span {t1 - t0}")
        if not (self.newton_tol > 0 and self.newton_max_iter > 0):
            raise ValueError("Newton tolerance and iteration limit must be positive")

    def grid(self):
        """Uniform grid ``t0 + k dt``; a shorter last step lands on ``t1``."""
        t0, t1 = self.t_span
        n = int(np.floor((t1 - t0) / self.dt + 1e-9))
        times = t0 + self.dt * np.arange(n + 1)
        if t1 - times[-1] > 1e-9 * max(1.0, abs(t1)):
            times = np.append(times, t1)
        else:
            times[-1] = t1
        return times


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray = None
    outputs: np.ndarray = None
    ledger: List = field(default_factory=list)
    energies: Optional[np.ndarray] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        k = self.times.size
        if self.inputs is None:
            self.inputs = np.zeros((k, 0))
        if self.outputs is None:
            self.outputs = np.zeros((k, 0))
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        for name in ("states", "inputs", "outputs"):
            if len(getattr(self, name)) != k:
                raise ValueError(f"{name} has {len(getattr(self, name))} rows for {k} times")
        if self.ledger and len(self.ledger) != k:
            raise ValueError("ledger length differs from the number of samples")

    def __len__(self):
        return self.times.size

    def fd_energy_rate(self):
        """Second-order differences of the recorded energies."""
        if self.energies is None or self.times.size < 3:
            raise ValueError("need recorded energies on at least 3 samples")
        return np.gradient(self.energies, self.times, edge_order=2)

    def ledger_table(self):
        """Rows ``(t, horizontal, dissipation, supplied, total, fd_total, residual)``."""
        fd = self.fd_energy_rate()
        rows = []
        for t, terms, d in zip(self.times, self.ledger, fd):
            rows.append((t, terms.horizontal, terms.dissipation, terms.supplied,
                         terms.total, d, d - terms.total))
        return np.array(rows, dtype=float).reshape(-1, 7)


def _input_fn(u, m):
    if u is None:
        return lambda t: np.zeros(m)
    if callable(u):
        return lambda t: np.atleast_1d(np.asarray(u(t), dtype=float)).reshape(-1)
    const = np.atleast_1d(np.asarray(u, dtype=float))
    return lambda t: const


def rk4_step(f, t, x, h):
    k1 = f(t, x)
    k2 = f(t + h / 2, x + h / 2 * k1)
    k3 = f(t + h / 2, x + h / 2 * k2)
    k4 = f(t + h, x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def midpoint_step(f, t, x, h, tol=1e-12, max_iter=50, step=0, cache=None):
    """Implicit midpoint ``z = x + h f(t + h/2, (x + z)/2)`` by damped Newton.

    ``cache`` (a dict) carries the iteration matrix across steps; it is
    rebuilt whenever the residual stops contracting or ``h`` changes, so
    only the cost changes, not the converged solution.
    """
    tm = t + h / 2
    n = x.size
    cache = {} if cache is None else cache

    def residual(z):
        return z - x - h * f(tm, 0.5 * (x + z))

    z = x + h * f(t, x)
    r = residual(z)
    # grid steps differ in the last bits; the matrix only steers the iteration
    jac = cache.get("jac") if abs(cache.get("h", np.inf) - h) <= 1e-9 * h else None
    fresh = False
    for _ in range(max_iter):
        r_norm = np.linalg.norm(r)
        if jac is None:
            jac = np.eye(n) - 0.5 * h * numdiff.fd_jacobian(f, tm, 0.5 * (x + z))
            cache["jac"], cache["h"] = jac, h
            fresh = True
        delta = np.linalg.solve(jac, -r)
        lam = 1.0
        while True:
            z_new = z + lam * delta
            r_new = residual(z_new)
            if np.linalg.norm(r_new) <= r_norm or lam < 1e-4:
                break
            lam *= 0.5
        # chord iteration: keep the matrix while the residual contracts well
        if np.linalg.norm(r_new) > 0.25 * r_norm and not fresh:
            jac = None
        fresh = False
        z, r = z_new, r_new
        if np.linalg.norm(lam * delta) <= tol * max(1.0, np.linalg.norm(z)):
            return z
    cache.clear()
    raise NewtonDivergence(
        f"Newton did not converge in {max_iter} iterations (|F|={np.linalg.norm(r):.3e})", step)


def integrate(sys, u, cfg: IntegratorConfig, x0, record=True) -> Trajectory:
    """Integrate ``x0 = sys.eval_dynamics(t, x, u(t))`` on the grid of ``cfg``.

    ``sys`` is anything exposing ``eval_dynamics``, ``collocated_output``,
    ``power_decomposition``, ``energy``, ``state_dim`` and ``input_dim``.
    ``u`` is a callable of time, a constant vector or ``None`` (zero).
    """
    m = sys.input_dim
    ufn = _input_fn(u, m)
    times = cfg.grid()
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    if x.size != sys.state_dim:
        raise ValueError(f"initial state of length {x.size}, system has n={sys.state_dim}")

    def f(t, z):
        return np.asarray(sys.eval_dynamics(t, z, ufn(t)), dtype=float)

    states = np.empty((times.size, x.size))
    states[0] = x
    cache = {}
    for k in range(times.size - 1):
        t, h = times[k], times[k + 1] - times[k]
        if cfg.method == "explicit-rk4":
            x = rk4_step(f, t, x, h)
        else:
            x = midpoint_step(f, t, x, h, cfg.newton_tol, cfg.newton_max_iter, k, cache)
        if not np.all(np.isfinite(x)):
            raise IntegrationError("non-finite state", k)
        states[k + 1] = x

    traj = Trajectory(times, states)
    if record:
        inputs = np.array([ufn(t) for t in times]).reshape(times.size, m)
        traj.inputs = inputs
        traj.outputs = np.array([np.asarray(sys.collocated_output(t, s, w), float)
                                 for t, s, w in zip(times, states, inputs)]).reshape(times.size, m)
        traj.ledger = [sys.power_decomposition(t, s, w) for t, s, w in zip(times, states, inputs)]
        traj.energies = np.array([sys.energy(t, s) for t, s in zip(times, states)])
    return traj
