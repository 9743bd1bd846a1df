import numpy as np
import pytest

from phcov.fields import ScalarField
from phcov.geometry import DimensionError
from phcov.mechanics import (ControlledHamiltonian, MechChart, MechanicalSystem, SpaceConnection,
                             angular_velocity, covertical_connection, free_particle_hamiltonian,
                             mech_power_balance, mech_vector_field, rotation, split_mech_field)
from phcov.runner.integrators import IntegratorConfig, integrate

from conftest import random_points

OM = np.array([[0.0, -1.0], [1.0, 0.0]])


def classical(H, t, q, p):
    # independent oracle: (dH/dp, -dH/dq) by central differences
    x = np.concatenate([q, p])
    h = 1e-6
    g = np.array([(H(t, x + h * e) - H(t, x - h * e)) / (2 * h) for e in np.eye(x.size)])
    nq = q.size
    return np.concatenate([g[nq:], -g[:nq]])


def pendulum_like():
    return ScalarField(lambda t, x: 0.5 * x[2:] @ x[2:] + np.cos(x[0]) * (1 + 0.1 * t) + x[1] ** 4 / 4,
                       lambda t, x: 0.1 * np.cos(x[0]),
                       lambda t, x: np.array([-np.sin(x[0]) * (1 + 0.1 * t), x[1] ** 3, x[2], x[3]]))


def test_covertical_examples():
    assert np.array_equal(covertical_connection(SpaceConnection.trivial(2), 0.0, [1.0, 2.0], [3.0, 4.0]),
                          np.zeros(4))
    v = covertical_connection(SpaceConnection.linear(OM), 0.0, [1.0, 0.0], [0.0, 1.0])
    assert np.allclose(v, [0.0, 1.0, -1.0, 0.0])


def test_covertical_dimension_check():
    with pytest.raises(DimensionError):
        covertical_connection(SpaceConnection.trivial(2), 0.0, [1.0, 2.0], [1.0])


def test_trivial_space_connection_gives_hamilton_equations(rng):
    H = pendulum_like()
    sc = SpaceConnection.trivial(2)
    for t, x in random_points(rng, 4, 50):
        assert np.max(np.abs(mech_vector_field(sc, H, t, x[:2], x[2:]) - classical(H, t, x[:2], x[2:]))) <= 1e-8
    # exact equality against the analytic gradient
    for t, x in random_points(rng, 4, 50):
        g = H.grad(t, x)
        expected = np.concatenate([g[2:], -g[:2]])
        assert np.max(np.abs(mech_vector_field(sc, H, t, x[:2], x[2:]) - expected)) <= 1e-14


def test_rotating_free_particle_field():
    H = free_particle_hamiltonian(2, 1.0)
    v = mech_vector_field(SpaceConnection.linear(OM), H, 0.0, np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    assert np.allclose(v[:2], [1.0, 1.0])
    # -d/dq (p . Omega q) = -Omega^T p = (0, 1) at p = (1, 0)
    assert np.allclose(v[2:], -OM.T @ [1.0, 0.0])
    assert np.allclose(v[2:], [0.0, 1.0])


def test_momentum_constant_without_potential(rng):
    H = free_particle_hamiltonian(3, 2.0)
    for t, x in random_points(rng, 6, 10):
        assert np.array_equal(mech_vector_field(SpaceConnection.trivial(3), H, t, x[:3], x[3:])[3:], np.zeros(3))


def test_split_examples_and_reassembly(rng):
    H = free_particle_hamiltonian(2, 1.0)
    sc = SpaceConnection.linear(OM)
    q, p = np.array([1.0, 0.0]), np.array([1.0, 0.0])
    vert, hor = split_mech_field(sc, H, 0.0, q, p)
    assert np.allclose(vert, np.concatenate([p, [0.0, 0.0]]))
    assert np.allclose(hor, np.concatenate([OM @ q, -OM.T @ p]))
    vert, hor = split_mech_field(SpaceConnection.trivial(2), pendulum_like(), 0.2, q, p)
    assert np.array_equal(hor, np.zeros(4))
    sc = SpaceConnection(lambda t, q: np.array([np.sin(t) * q[1], q[0] ** 2]),
                         lambda t, q: np.array([[0.0, np.sin(t)], [2 * q[0], 0.0]]))
    H = pendulum_like()
    for t, x in random_points(rng, 4, 100):
        vert, hor = split_mech_field(sc, H, t, x[:2], x[2:])
        assert np.max(np.abs(vert + hor - mech_vector_field(sc, H, t, x[:2], x[2:]))) <= 1e-12


def test_power_balance_conservative():
    ch = ControlledHamiltonian(pendulum_like().__class__.quadratic(np.eye(4)))
    pb = mech_power_balance(SpaceConnection.trivial(2), ch, 0.0, [1.0, 2.0], [0.5, -1.0])
    assert (pb.horizontal, pb.supplied, pb.total) == (0.0, 0.0, 0.0)
    assert pb.dissipation == 0.0


def test_rotating_free_particle_horizontal_power_vanishes(rng):
    ch = ControlledHamiltonian(free_particle_hamiltonian(2, 1.3))
    sc = SpaceConnection.linear(angular_velocity(0.5))
    for t, x in random_points(rng, 4, 50):
        pb = mech_power_balance(sc, ch, t, x[:2], x[2:])
        assert abs(pb.horizontal) <= 1e-14 and abs(pb.total) <= 1e-14


def _one_dof():
    H0 = ScalarField(lambda t, x: 0.5 * x[1] ** 2, lambda t, x: 0.0, lambda t, x: np.array([0.0, x[1]]))
    Hc = ScalarField(lambda t, x: x[0], lambda t, x: 0.0, lambda t, x: np.array([1.0, 0.0]))
    return MechanicalSystem(MechChart(1), SpaceConnection.trivial(1), H0, (Hc,))


def test_one_dof_output_and_supplied_power():
    sys = _one_dof()
    u = 0.8
    pb = sys.power_decomposition(0.0, np.array([0.3, 1.7]), [u])
    assert pb.outputs == pytest.approx([1.7])
    assert pb.supplied == pytest.approx(1.7 * u)
    # cross-check against finite-differenced H0 along a short trajectory
    cfg = IntegratorConfig("rk4", 1e-3, (0.0, 0.2))
    traj = integrate(sys, [u], cfg, np.array([0.3, 1.7]))
    fd = traj.fd_energy_rate()
    assert np.max(np.abs(fd - [p.total for p in traj.ledger])) <= 1e-6
    assert np.max(np.abs(fd - [p.supplied for p in traj.ledger])) <= 1e-6


def _rich_system():
    H0 = pendulum_like()
    Hc = (ScalarField(lambda t, x: x[0] * x[2], lambda t, x: 0.0,
                      lambda t, x: np.array([x[2], 0.0, x[0], 0.0])),
          ScalarField(lambda t, x: np.sin(t) * x[1], lambda t, x: np.cos(t) * x[1],
                      lambda t, x: np.array([0.0, np.sin(t), 0.0, 0.0])))
    sc = SpaceConnection(lambda t, q: np.array([np.cos(t) * q[1], -q[0] + t]),
                         lambda t, q: np.array([[0.0, np.cos(t)], [-1.0, 0.0]]))
    return MechanicalSystem(MechChart(2), sc, H0, Hc)


def test_power_balance_identity(rng):
    sys = _rich_system()
    for t, x in random_points(rng, 4, 100):
        u = rng.normal(size=2)
        pb = sys.power_decomposition(t, x, u)
        assert abs(pb.total - pb.horizontal - pb.outputs @ u) <= 1e-12
        # total is the derivative of H0 along the full field
        direct = sys.H0.dt(t, x) + sys.H0.grad(t, x) @ sys.eval_dynamics(t, x, u)
        assert pb.total == pytest.approx(direct, abs=1e-12)


def test_embedding_matches_native(rng):
    sys = _rich_system()
    emb = sys.embed()
    for t, x in random_points(rng, 4, 50):
        u = rng.normal(size=2)
        assert np.max(np.abs(emb.eval_dynamics(t, x, u) - sys.eval_dynamics(t, x, u))) <= 1e-12
        pe, pm = emb.power_decomposition(t, x, u), sys.power_decomposition(t, x, u)
        assert pe.horizontal == pytest.approx(pm.horizontal, abs=1e-12)
        assert pe.supplied == pytest.approx(pm.supplied, abs=1e-12)
        assert np.allclose(emb.collocated_output(t, x), pm.outputs_free, atol=1e-12)


def test_controlled_hamiltonian_assembled_grad_check(rng):
    from phcov.fields import grad_check
    from phcov.systems import InputSignal
    sys = _rich_system()
    H = sys.controlled(InputSignal.sinusoid([0.5, 1.0], [1.0, 2.0])).assembled()
    assert grad_check(H, random_points(rng, 4, 20), tol=1e-5).passed


def test_rotation_helpers():
    R, R_dot = rotation(0.5)
    for t in (0.0, 1.0, 4.0):
        assert np.allclose(R_dot(t) @ R(t).T, angular_velocity(0.5), atol=1e-15)
        assert np.allclose(R(t) @ R(t).T, np.eye(2), atol=1e-15)
