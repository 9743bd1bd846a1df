import numpy as np
import pytest

from phcov.fields import ScalarField
from phcov.geometry import BundleChart, Connection
from phcov.runner.integrators import IntegratorConfig, integrate
from phcov.systems import linear_system
from phcov.tracking import (ReferenceTrajectory, absorbed_system, build_error_system,
                            error_matching_residual, error_matching_rhs, solve_error_matching,
                            verify_reference)
from phcov.transform import MatchingCandidate, default_grid

J2 = [[0.0, 1.0], [-1.0, 0.0]]


def oscillator(r=0.0):
    return linear_system(J2, np.diag([0.0, r]), [[0.0], [1.0]], np.eye(2))


def circle(freq=1.0, r=0.0):
    return ReferenceTrajectory(lambda t: np.array([np.sin(freq * t), np.cos(freq * t)]),
                               lambda t: np.array([r * np.cos(t)]),
                               lambda t: freq * np.array([np.cos(freq * t), -np.sin(freq * t)]))


TIMES = np.linspace(0, 2 * np.pi, 40)


def test_verify_reference_examples():
    assert verify_reference(oscillator(), circle(), TIMES).max_residual <= 1e-15
    assert not verify_reference(oscillator(), circle(2.0), TIMES).passed
    assert verify_reference(oscillator(0.5), circle(r=0.5), TIMES).max_residual <= 1e-15
    xe = np.array([0.7, 0.0])
    eq = ReferenceTrajectory(lambda t: xe, lambda t: np.array([0.7]), lambda t: np.zeros(2))
    assert verify_reference(oscillator(0.5), eq, TIMES).max_residual <= 1e-15


def test_verify_reference_needs_trivial_connection():
    sys = oscillator().with_connection(Connection.constant(BundleChart(2), [1.0, 0.0]))
    with pytest.raises(ValueError):
        verify_reference(sys, circle(), TIMES)


def test_build_rejects_non_trajectory():
    with pytest.raises(ValueError):
        build_error_system(oscillator(), circle(2.0), check_times=TIMES)


def test_error_system_examples():
    es = build_error_system(oscillator(), circle(), check_times=TIMES)
    for t in TIMES:
        assert np.array_equal(es.to_error(t, circle().state(t)), [0.0, 0.0])
    assert np.allclose(es.base.conn(0.0, np.zeros(2)), [-1.0, 0.0])
    # u = eta_d maps to u_bar = 0
    for t in TIMES[:5]:
        assert es.input_map.apply(t, np.zeros(2), circle().feedforward(t)) == pytest.approx([0.0])


def test_error_matching_examples():
    sys = oscillator(0.5)
    xe = np.array([0.7, 0.0])
    eq = ReferenceTrajectory(lambda t: xe, lambda t: np.array([0.7]), lambda t: np.zeros(2))
    es = build_error_system(sys, eq)
    zero = MatchingCandidate(ScalarField.zero(), "H_bar + H_breve")
    # constant shift: connection zero, feed-forward absorbed by H_breve
    es0 = build_error_system(oscillator(0.5), ReferenceTrajectory(lambda t: np.zeros(2), lambda t: np.zeros(1),
                                                                   lambda t: np.zeros(2)))
    assert np.array_equal(error_matching_rhs(es0, 0.3, np.zeros(2)), [0.0, 0.0])
    assert np.array_equal(error_matching_residual(es0, zero, 0.3, np.ones(2)), [0.0, 0.0])
    cand = solve_error_matching(es)
    assert cand.residual <= 1e-10
    es = build_error_system(sys, circle(r=0.5))
    for t in (0.0, 1.0):
        r = error_matching_residual(es, zero, t, np.array([0.1, 0.2]))
        expected = -(es.base.conn(t, np.zeros(2)) + np.array([0.0, 1.0]) * 0.5 * np.cos(t))
        assert np.allclose(r, expected, atol=1e-15)
        assert np.linalg.norm(r) > 0.1


def test_constructed_oscillator_matching():
    es = build_error_system(oscillator(0.5), circle(r=0.5))
    grid = default_grid(2, (0.0, 2 * np.pi))
    cand = solve_error_matching(es, grid)
    assert cand.convention == "H_bar + H_breve"
    worst = max(np.max(np.abs(error_matching_residual(es, cand, t, x))) for t, x in grid)
    assert worst <= 1e-10
    # independent per-time 2x2 solve
    JR = np.array(J2) - np.diag([0.0, 0.5])
    for t, x in grid[::37]:
        rhs = np.array([-np.cos(t), np.sin(t)]) + np.array([0.0, 0.5 * np.cos(t)])
        assert np.allclose(cand.H_breve.grad(t, x), np.linalg.solve(JR, rhs), atol=1e-12)


def test_absorbed_form_matches_error_dynamics():
    es = build_error_system(oscillator(0.5), circle(r=0.5))
    cand = solve_error_matching(es)
    sys = absorbed_system(es, cand)
    assert sys.conn.is_trivial_at(0.0, np.zeros(2))
    for t, x in default_grid(2, (0.0, 6.0))[::13]:
        u = np.array([0.3])
        assert np.allclose(sys.eval_dynamics(t, x, u), es.eval_dynamics(t, x, u), atol=1e-12)


def test_error_trajectory_matches_original():
    sys = oscillator(0.5)
    ref = circle(r=0.5)
    es = build_error_system(sys, ref, M=[[2.0]])
    cfg = IntegratorConfig("rk4", 1e-2, (0.0, 2 * np.pi))
    ubar = lambda t: np.array([0.3 * np.sin(3 * t)])
    xb0 = np.array([0.2, -0.1])
    err = integrate(es, ubar, cfg, xb0, record=False)
    orig = integrate(sys, lambda t: ubar(t) / 2.0 + ref.feedforward(t), cfg, es.from_error(0.0, xb0),
                     record=False)
    mapped = np.array([es.to_error(t, x) for t, x in zip(orig.times, orig.states)])
    # the charts differ by a nonlinear function of t, so only truncation error remains
    assert np.max(np.abs(mapped - err.states)) <= 1e-8


def test_reference_from_samples():
    ts = np.linspace(0, 2 * np.pi, 400)
    ref = ReferenceTrajectory.from_samples(ts, np.column_stack([np.sin(ts), np.cos(ts)]), np.zeros((ts.size, 1)))
    rep = verify_reference(oscillator(), ref, np.linspace(0.5, 5.5, 20), tol=1e-4)
    assert rep.passed
