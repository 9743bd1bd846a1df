"""Builtin scenarios and the checks reported for them.

Every scenario returns a :class:`ScenarioResult`: the integrated
trajectory, the system it came from and a list of named checks.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from ..fields import (DissipationField, InputField, ScalarField, StructureField,
                      check_structure, grad_check)
from ..geometry import BundleChart, Connection, jacobian_check
from ..mechanics import (MechChart, MechanicalSystem, SpaceConnection, angular_velocity,
                         free_particle_hamiltonian, rotation)
from ..systems import InputSignal, PortHamiltonianSystem, linear_system
from ..tracking import (ReferenceTrajectory, absorbed_system, build_error_system,
                        error_matching_residual, solve_error_matching, verify_reference)
from ..transform import default_grid
from .integrators import IntegratorConfig, Trajectory, integrate


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool = None
    note: str = ""

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(np.isfinite(self.value) and self.value <= self.threshold)

    def __str__(self):
        state = "PASS" if self.passed else "FAIL"
        note = f"  ({self.note})" if self.note else ""
        return f"[{state}] {self.name}: {self.value:.3e} <= {self.threshold:.1e}{note}"


@dataclass
class ScenarioResult:
    name: str
    system: object
    trajectory: Trajectory
    config: IntegratorConfig
    checks: List[Check] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


# -- shared checks -----------------------------------------------------------

def ledger_check(traj: Trajectory, dt, factor=10.0):
    """``|fd d/dt H - ledger total| <= factor dt^2 max(1, max|H|)`` per sample."""
    scale = max(1.0, float(np.max(np.abs(traj.energies))))
    table = traj.ledger_table()
    worst = float(np.max(np.abs(table[:, 6])))
    return Check("power ledger residual", worst, factor * dt ** 2 * scale,
                 note="finite-differenced dH/dt vs ledger total")


def _sample_points(traj: Trajectory, count=10):
    idx = np.linspace(0, len(traj) - 1, min(count, len(traj))).astype(int)
    return [(float(traj.times[k]), traj.states[k]) for k in idx]


def derivative_checks(fields: Dict[str, ScalarField], jacobians: Dict[str, tuple], points, tol=1e-5):
    """grad_check for scalar fields and Jacobian checks for connection-like maps.

    ``jacobians`` maps a name to ``(fn, jac, points)``; only analytic
    derivatives are checked.
    """
    checks = []
    for name, H in fields.items():
        if H.mode == "finite-difference":
            continue
        rep = grad_check(H, points, tol=tol)
        checks.append(Check(f"grad_check {name}", rep.max_error, tol, rep.passed))
    for name, (fn, jac, pts) in jacobians.items():
        ok, err = jacobian_check(fn, jac, pts, tol)
        checks.append(Check(f"jacobian_check {name}", err, tol, ok))
    return checks


# -- rotating frame ------------------------------------------------------------

@dataclass(frozen=True)
class RotatingFrameSpec:
    omega: float = 0.5
    mass: float = 1.0
    q0: tuple = (0.0, 0.0)
    p0: tuple = (1.0, 0.0)

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        for name in ("q0", "p0"):
            val = tuple(float(v) for v in getattr(self, name))
            if len(val) != 2:
                raise ValueError(f"{name} must have two components")
            object.__setattr__(self, name, val)


@dataclass(frozen=True)
class RotatingFrameScenario:
    """Free particle seen from an inertial and from a rotating chart.

    ``q_bar = R(t) q`` with ``R`` a rotation by ``omega t``; momenta map
    with the inverse transpose, ``p_bar = R^-T p``.
    """

    spec: RotatingFrameSpec
    inertial: MechanicalSystem
    rotating: MechanicalSystem
    R: Callable
    R_dot: Callable

    @property
    def inertial_system(self) -> PortHamiltonianSystem:
        return self.inertial.embed()

    @property
    def rotating_system(self) -> PortHamiltonianSystem:
        return self.rotating.embed()

    @property
    def Omega(self):
        return angular_velocity(self.spec.omega)

    def to_rotating(self, t, x):
        R = self.R(t)
        return np.concatenate([R @ x[:2], np.linalg.solve(R.T, x[2:])])

    def initial_state(self, t0=0.0):
        x0 = np.array(self.spec.q0 + self.spec.p0)
        return x0, self.to_rotating(t0, x0)

    def closed_form(self, times, t0=0.0):
        """Exact rotating-frame states for the straight inertial motion."""
        q0 = np.array(self.spec.q0)
        p0 = np.array(self.spec.p0)
        return np.array([self.to_rotating(t, np.concatenate([q0 + p0 * (t - t0) / self.spec.mass, p0]))
                         for t in times])


def rotating_frame_scenario(spec: RotatingFrameSpec = RotatingFrameSpec()) -> RotatingFrameScenario:
    chart = MechChart(2)
    H = free_particle_hamiltonian(2, spec.mass)
    inertial = MechanicalSystem(chart, SpaceConnection.trivial(2), H)
    rotating = MechanicalSystem(chart, SpaceConnection.linear(angular_velocity(spec.omega)), H)
    R, R_dot = rotation(spec.omega)
    return RotatingFrameScenario(spec, inertial, rotating, R, R_dot)


def coriolis_residual(traj: Trajectory, omega):
    """``|s'' - 2 Omega s' + Omega^2 s|`` at interior samples (constant ``Omega``).

    Velocities and accelerations are central differences on the
    (uniform) trajectory grid; positions are the first two state
    components.
    """
    if len(traj) < 3:
        raise ValueError("trajectory too short for second differences")
    h = np.diff(traj.times)
    if np.ptp(h) > 1e-9 * h[0]:
        raise ValueError("coriolis residual needs a uniform time grid")
    h = h[0]
    s = traj.states[:, :2]
    Om = angular_velocity(omega)
    vel = (s[2:] - s[:-2]) / (2 * h)
    acc = (s[2:] - 2 * s[1:-1] + s[:-2]) / h ** 2
    mid = s[1:-1]
    res = acc - 2 * vel @ Om.T + mid @ (Om @ Om).T
    return np.linalg.norm(res, axis=1)


@dataclass
class FrameEquivalenceReport:
    max_discrepancy: float
    inertial: Trajectory
    rotating: Trajectory
    method: str


def frame_equivalence_check(spec: RotatingFrameSpec, cfg: IntegratorConfig,
                            rotating: Trajectory = None) -> FrameEquivalenceReport:
    """Simulate both charts independently and compare after mapping.

    ``rotating`` may pass an already integrated rotating-chart trajectory
    started from the mapped initial state on the same grid.
    """
    scn = rotating_frame_scenario(spec)
    t0 = cfg.t_span[0]
    x0, x0_bar = scn.initial_state(t0)
    inertial = integrate(scn.inertial, None, cfg, x0, record=False)
    if rotating is None:
        rotating = integrate(scn.rotating, None, cfg, x0_bar, record=False)
    mapped = np.array([scn.to_rotating(t, x) for t, x in zip(inertial.times, inertial.states)])
    return FrameEquivalenceReport(float(np.max(np.abs(mapped - rotating.states))),
                                  inertial, rotating, cfg.method)


def run_rotating_frame(params, cfg: IntegratorConfig, x0=None, u=None) -> ScenarioResult:
    spec = RotatingFrameSpec(**params)
    scn = rotating_frame_scenario(spec)
    t0 = cfg.t_span[0]
    if x0 is None:
        x0 = scn.initial_state(t0)[1]
    traj = integrate(scn.rotating, None, cfg, x0)
    res = ScenarioResult("rotating-frame", scn.rotating, traj, cfg)
    res.notes.append(f"integrator: {cfg.method}, dt={cfg.dt:g} (artifact choice)")

    drift = float(np.max(np.abs(traj.energies - traj.energies[0])))
    res.checks.append(Check("conservation drift |H(t)-H(0)|", drift, 1e-8))
    horizontal = max(abs(p.horizontal) for p in traj.ledger)
    res.checks.append(Check("horizontal power v_HH(H)", horizontal, 1e-12))
    res.checks.append(ledger_check(traj, cfg.dt))
    res.checks.append(Check("coriolis residual (integrated)",
                            float(np.max(coriolis_residual(traj, spec.omega))), 1e-4))
    on_default = np.array_equal(x0, scn.initial_state(t0)[1])
    eq = frame_equivalence_check(spec, cfg, traj if on_default else None)
    res.checks.append(Check("frame equivalence discrepancy", eq.max_discrepancy,
                            1e-6 if cfg.method == "explicit-rk4" else 1e-5, note=cfg.method))
    pts = _sample_points(traj)
    sc = scn.rotating.space_connection
    res.checks += derivative_checks(
        {"H": scn.rotating.H0},
        {"space connection": (sc.gamma, sc.gamma_jacobian, [(t, x[:2]) for t, x in pts])},
        pts)
    return res


# -- tracking ---------------------------------------------------------------

def tracking_oscillator(damping=0.5, amplitude=1.0):
    """Damped oscillator with the reference ``a (sin t, cos t)``.

    The feed-forward making the reference exact is ``a r cos t``.
    """
    R = np.diag([0.0, damping])
    sys = linear_system([[0, 1], [-1, 0]], R, [[0.0], [1.0]], np.eye(2))
    ref = ReferenceTrajectory(
        lambda t: amplitude * np.array([np.sin(t), np.cos(t)]),
        lambda t: np.array([amplitude * damping * np.cos(t)]),
        lambda t: amplitude * np.array([np.cos(t), -np.sin(t)]),
    )
    return sys, ref


def run_tracking_demo(params, cfg: IntegratorConfig, x0=None, u=None) -> ScenarioResult:
    damping = float(params.get("damping", 0.5))
    amplitude = float(params.get("amplitude", 1.0))
    sys, ref = tracking_oscillator(damping, amplitude)
    t0, t1 = cfg.t_span
    es = build_error_system(sys, ref, check_times=np.linspace(t0, t1, 50))
    xb0 = np.zeros(2) if x0 is None else np.asarray(x0, dtype=float)
    traj = integrate(es, u, cfg, xb0)
    res = ScenarioResult("tracking-demo", es, traj, cfg)

    ref_report = verify_reference(sys, ref, np.linspace(t0, t1, 50))
    res.checks.append(Check("reference residual", ref_report.max_residual, 1e-10))
    on_reference = not np.any(xb0) and u is None
    if on_reference:
        res.checks.append(Check("max |x_bar| from x_bar(0)=0, u_bar=0",
                                float(np.max(np.linalg.norm(traj.states, axis=1))), 1e-6))
    ufn = (lambda t: np.zeros(1)) if u is None else u
    original = integrate(sys, lambda t: ufn(t) + ref.feedforward(t), cfg,
                         es.from_error(t0, xb0), record=False)
    mapped = np.array([es.to_error(t, x) for t, x in zip(original.times, original.states)])
    res.checks.append(Check("original-then-transform vs error trajectory",
                            float(np.max(np.abs(mapped - traj.states))), 1e-6))

    grid = default_grid(2, (t0, t1))
    cand = solve_error_matching(es, grid)
    worst = max(float(np.max(np.abs(error_matching_residual(es, cand, t, x)))) for t, x in grid)
    res.checks.append(Check("matching residual (H_bar + H_breve)", worst, 1e-8))
    absorbed = absorbed_system(es, cand)
    gap = max(float(np.max(np.abs(absorbed.eval_dynamics(t, x, np.zeros(1)) - es.eval_dynamics(t, x))))
              for t, x in grid[::7])
    res.checks.append(Check("absorbed form vs error dynamics", gap, 1e-10))
    res.checks.append(ledger_check(traj, cfg.dt))
    res.checks += derivative_checks({"H": sys.H}, {}, _sample_points(original))
    return res


# -- damped oscillator -------------------------------------------------------

def damped_oscillator(damping=0.5):
    return linear_system([[0, 1], [-1, 0]], np.diag([0.0, damping]), [[0.0], [1.0]], np.eye(2))


def run_damped_oscillator(params, cfg: IntegratorConfig, x0=None, u=None) -> ScenarioResult:
    sys = damped_oscillator(float(params.get("damping", 0.5)))
    if x0 is None:
        x0 = np.array([1.0, 0.0])
    if u is None:
        u = InputSignal.sinusoid(1.0, 1.0)
    traj = integrate(sys, u, cfg, x0)
    res = ScenarioResult("damped-oscillator", sys, traj, cfg)
    res.checks.append(ledger_check(traj, cfg.dt))
    excess = max(p.total - p.supplied for p in traj.ledger)
    res.checks.append(Check("passivity: total - supplied", excess, 1e-10))
    res.checks += _structure_checks(sys, _sample_points(traj))
    res.checks += derivative_checks({"H": sys.H}, {}, _sample_points(traj))
    return res


def _structure_checks(sys, points):
    rep = check_structure(sys.J, sys.R, points, tol=1e-12)
    return [Check("J skew-symmetric", rep.skew_residual, 1e-12),
            Check("R symmetric", rep.symmetry_residual, 1e-12),
            Check("R positive semidefinite", -rep.min_eigenvalue, 1e-10, rep.psd_ok)]


# -- controlled mechanics ----------------------------------------------------------

def controlled_rotating_system(omega=0.5, mass=1.0, k1=1.0, k2=2.0):
    """Anisotropic spring particle in a rotating chart, forced along ``q1``.

    ``H0 = |p|^2/(2m) + (k1 q1^2 + k2 q2^2)/2`` and ``Hc = q1``.
    """
    K = np.diag([k1, k2])
    H0 = ScalarField(lambda t, x: 0.5 * x[2:] @ x[2:] / mass + 0.5 * x[:2] @ K @ x[:2],
                     lambda t, x: 0.0,
                     lambda t, x: np.concatenate([K @ x[:2], x[2:] / mass]))
    Hc = ScalarField(lambda t, x: x[0], lambda t, x: 0.0,
                     lambda t, x: np.array([1.0, 0.0, 0.0, 0.0]))
    return MechanicalSystem(MechChart(2), SpaceConnection.linear(angular_velocity(omega)), H0, (Hc,))


def run_controlled_rotating(params, cfg: IntegratorConfig, x0=None, u=None) -> ScenarioResult:
    sys = controlled_rotating_system(**{k: float(v) for k, v in params.items()})
    if x0 is None:
        x0 = np.array([0.5, 0.0, 0.0, 0.2])
    if u is None:
        u = InputSignal.sinusoid(0.5, 1.3)
    traj = integrate(sys, u, cfg, x0)
    res = ScenarioResult("controlled-rotating", sys, traj, cfg)
    res.checks.append(ledger_check(traj, cfg.dt))
    identity = max(abs(p.total - p.horizontal - p.supplied) for p in traj.ledger)
    res.checks.append(Check("power balance identity |total - horizontal - supplied|", identity, 1e-12))
    pts = _sample_points(traj)
    sc = sys.space_connection
    res.checks += derivative_checks(
        {"H0": sys.H0, "Hc": sys.Hc[0]},
        {"space connection": (sc.gamma, sc.gamma_jacobian, [(t, x[:2]) for t, x in pts])},
        pts)
    return res


# -- user-defined linear-quadratic systems ------------------------------------------------

def custom_system(block, conn_block):
    n = block["n"]
    m = block["m"]
    chart = BundleChart(n)
    c0 = np.asarray(conn_block.get("c0", np.zeros(n)), dtype=float)
    c1 = np.asarray(conn_block.get("c1", np.zeros(n)), dtype=float)
    conn = Connection(chart, lambda t, x: c0 + c1 * t, lambda t, x: np.zeros((n, n)))
    G = np.asarray(block["G"], dtype=float).reshape(n, m)
    return PortHamiltonianSystem(
        chart,
        StructureField.constant(np.reshape(block["J"], (n, n))),
        DissipationField.constant(np.reshape(block["R"], (n, n))),
        InputField.constant(G) if m else InputField.none(n),
        ScalarField.quadratic(np.reshape(block["Q"], (n, n)), block.get("b")),
        conn,
    )


def run_custom(sys: PortHamiltonianSystem, cfg: IntegratorConfig, x0, u) -> ScenarioResult:
    traj = integrate(sys, u, cfg, x0)
    res = ScenarioResult("custom", sys, traj, cfg)
    pts = _sample_points(traj)
    res.checks += _structure_checks(sys, pts)
    res.checks.append(ledger_check(traj, cfg.dt))
    if all(sys.conn.is_trivial_at(t, x) for t, x in pts):
        excess = max(p.total - p.supplied for p in traj.ledger)
        res.checks.append(Check("passivity: total - supplied", excess, 1e-10))
    res.checks += derivative_checks({"H": sys.H}, {}, pts)
    return res


@dataclass(frozen=True)
class Builtin:
    description: str
    runner: Callable
    defaults: dict
    method: str
    t_span: tuple


BUILTINS = {
    "rotating-frame": Builtin(
        "free particle in a rotating chart (covertical connection); conservation, "
        "Coriolis form and inertial-frame equivalence",
        run_rotating_frame, {"omega": 0.5, "mass": 1.0, "q0": (0.0, 0.0), "p0": (1.0, 0.0)},
        "implicit-midpoint", (0.0, 10.0)),
    "tracking-demo": Builtin(
        "error system of a damped oscillator along a circular reference; "
        "zero-error invariance and matching Hamiltonian",
        run_tracking_demo, {"damping": 0.5, "amplitude": 1.0}, "explicit-rk4", (0.0, 2 * np.pi)),
    "damped-oscillator": Builtin(
        "damped oscillator with sinusoidal input; power ledger and passivity",
        run_damped_oscillator, {"damping": 0.5}, "explicit-rk4", (0.0, 10.0)),
    "controlled-rotating": Builtin(
        "forced anisotropic oscillator in a rotating chart; power balance with collocated output",
        run_controlled_rotating, {"omega": 0.5, "mass": 1.0, "k1": 1.0, "k2": 2.0},
        "explicit-rk4", (0.0, 10.0)),
}
