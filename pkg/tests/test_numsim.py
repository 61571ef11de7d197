"""Propagation engine tests: matrix exponential, linear stepping, RK4."""

import numpy as np
import pytest

from rdvsafe import (
    OrbitalParams,
    Trajectory,
    build_propagator,
    cwh_matrices,
    design_mode_gains,
    matrix_exp,
    nonlinear_field,
    simulate_linear,
    simulate_nonlinear,
)
from rdvsafe.numsim import MODE_PASSIVE, constant_mode_logic, rendezvous_mode_logic
from rdvsafe.hybrid import octagon_halfspaces

GEO = OrbitalParams()


def test_matrix_exp_zero_and_diagonal():
    assert np.allclose(matrix_exp(np.zeros((3, 3))), np.eye(3), atol=1e-16)
    out = matrix_exp(np.diag([1.0, -2.0]))
    assert np.allclose(out, np.diag([np.e, np.exp(-2.0)]), rtol=1e-14)


def test_matrix_exp_nilpotent_terminates_exactly():
    out = matrix_exp(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert np.allclose(out, [[1.0, 1.0], [0.0, 1.0]], rtol=0, atol=1e-15)


def test_propagator_identity_and_scalar_decay():
    assert np.allclose(build_propagator(np.zeros((2, 2)), 5.0).phi, np.eye(2), atol=1e-16)
    prop = build_propagator(np.diag([-1.0]), 1.0)
    assert prop.phi[0, 0] == pytest.approx(np.exp(-1.0), rel=1e-14)


def test_propagator_semigroup_property():
    A = cwh_matrices(GEO).A
    p1 = build_propagator(A, 30.0)
    p2 = build_propagator(A, 60.0)
    assert np.allclose(p2.phi, p1.phi @ p1.phi, rtol=1e-12, atol=1e-16)


def test_propagator_rejects_bad_step():
    with pytest.raises(ValueError):
        build_propagator(np.zeros((2, 2)), 0.0)


def test_simulate_linear_zero_state():
    prop = build_propagator(cwh_matrices(GEO).A, 1.0)
    traj = simulate_linear(prop, np.zeros(4), 50)
    assert np.all(traj.states == 0.0)
    assert traj.times[-1] == 50.0


def test_simulate_linear_superposition():
    rng = np.random.default_rng(11)
    prop = build_propagator(cwh_matrices(GEO).A, 10.0)
    for _ in range(20):
        x0 = rng.normal(scale=100.0, size=4)
        v = rng.normal(scale=10.0, size=4)
        a = simulate_linear(prop, x0 + v, 40).states
        b = simulate_linear(prop, x0, 40).states
        c = simulate_linear(prop, v, 40).states
        assert np.allclose(a - b, c, rtol=1e-9, atol=1e-9)


def _rk4_passive_reference(params, x0, h, steps):
    x = np.asarray(x0, dtype=float)
    f = np.zeros(2)
    for _ in range(steps):
        k1 = nonlinear_field(params, x, f)
        k2 = nonlinear_field(params, x + 0.5 * h * k1, f)
        k3 = nonlinear_field(params, x + 0.5 * h * k2, f)
        k4 = nonlinear_field(params, x + h * k3, f)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def test_simulate_linear_matches_fine_rk4_over_one_orbit():
    # The exponential stepping is exact at samples; a 100x finer RK4 on the
    # linear field serves as the independent oracle.
    h = 60.0
    period = 2 * np.pi / GEO.n
    steps = int(period / h)
    x0 = np.array([-100.0, 0.0, 0.0, 0.0])
    prop = build_propagator(cwh_matrices(GEO).A, h)
    end_exp = simulate_linear(prop, x0, steps).states[-1]

    A = cwh_matrices(GEO).A
    x = x0.copy()
    fine = h / 100.0
    for _ in range(steps * 100):
        k1 = A @ x
        k2 = A @ (x + 0.5 * fine * k1)
        k3 = A @ (x + 0.5 * fine * k2)
        k4 = A @ (x + fine * k3)
        x = x + (fine / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    assert np.linalg.norm(end_exp[:2] - x[:2]) <= 1e-6


def test_cwh_drift_equilibrium_line():
    # A purely along-track offset with zero velocity is an equilibrium of the
    # uncontrolled relative dynamics.
    prop = build_propagator(cwh_matrices(GEO).A, 60.0)
    traj = simulate_linear(prop, np.array([0.0, 750.0, 0.0, 0.0]), 200)
    assert np.allclose(traj.states, traj.states[0], rtol=0, atol=1e-9 * 750.0)


def test_rk4_fourth_order_convergence():
    params = GEO
    gains = design_mode_gains(params)
    logic = constant_mode_logic(MODE_PASSIVE)
    x0 = np.array([-50000.0, 80000.0, 0.0, 0.0])
    T = 8000.0

    def endpoint(h):
        return simulate_nonlinear(params, gains, logic, x0, h, T).states[-1]

    ref = endpoint(125.0)
    e1 = np.linalg.norm(endpoint(1000.0) - ref)
    e2 = np.linalg.norm(endpoint(500.0) - ref)
    assert e1 / e2 == pytest.approx(16.0, rel=0.3)


def test_simulate_nonlinear_origin_equilibrium():
    gains = design_mode_gains(GEO)
    traj = simulate_nonlinear(GEO, gains, constant_mode_logic(MODE_PASSIVE),
                              np.zeros(4), 1.0, 100.0)
    assert np.all(np.abs(traj.states) <= 1e-9)


def test_rendezvous_mode_logic_switches():
    normals, offsets = octagon_halfspaces(100.0)
    logic = rendezvous_mode_logic(normals, offsets, passive_step=50)
    far = np.array([-900.0, -400.0, 0.0, 0.0])
    near = np.array([-50.0, 10.0, 0.0, 0.0])
    assert logic(0, 0.0, far, "prox_a") == "prox_a"
    assert logic(1, 1.0, near, "prox_a") == "prox_b"
    assert logic(2, 2.0, far, "prox_b") == "prox_a"
    assert logic(50, 50.0, near, "prox_b") == "passive"
    assert logic(60, 60.0, far, "passive") == "passive"


def test_trajectory_validation_and_csv(tmp_path):
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 1.0]), states=np.zeros((3, 4)))
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 0.0]), states=np.zeros((2, 4)))
    traj = Trajectory(times=np.array([0.0, 1.0]), states=np.arange(8.0).reshape(2, 4),
                      modes=("prox_a", "prox_a"))
    out = tmp_path / "traj.csv"
    traj.to_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "time_s,x,y,vx,vy,mode"
    assert len(lines) == 3
    assert lines[1].endswith("prox_a")
