import math
from itertools import permutations

import numpy as np
import pytest
from numpy.testing import assert_allclose

import danteflow.flow as flow_mod
from danteflow.errors import (CollapseReachedError, DomainError,
                              IntegrationFailureError)
from danteflow.flow import (FlowParams, Termination, Trajectory, integrate,
                            isotropic_lambda, rhs, x_rate)
from danteflow.geometry import MetricCoeffs


def rhs_bracket(u, v, w, r_squared):
    # Independent oracle: the bracket form of the flow equations.
    k = -4.0 / r_squared
    return (k * (2.0 + (u * u - v * v - w * w) / (v * w)),
            k * (2.0 + (v * v - u * u - w * w) / (u * w)),
            k * (2.0 + (w * w - u * u - v * v) / (u * v)))


def test_rhs_examples():
    assert rhs(MetricCoeffs(1, 1, 1), 4.0) == (-1.0, -1.0, -1.0)
    du, dv, dw = rhs(MetricCoeffs(0.5, 0.5, 1.0), 4.0)
    assert dw == -4.0      # -w^2/v^2
    assert dv == 0.0       # w/v - 2
    assert du == 0.0
    du, dv, dw = rhs(MetricCoeffs(0.5, 1.0, 1.0), 4.0)
    assert du == -0.25     # -u^2/v^2
    assert dv == -1.5      # u/v - 2
    assert dw == -1.5


def test_rhs_dual_form_identity():
    rng = np.random.default_rng(23)
    for _ in range(10_000):
        u, v, w = rng.uniform(0.05, 5.0, size=3)
        r2 = float(rng.uniform(0.5, 8.0))
        got = rhs(MetricCoeffs(float(u), float(v), float(w)), r2)
        want = rhs_bracket(u, v, w, r2)
        # Individual components can cancel to zero; compare on the scale of
        # the derivative vector.
        scale = max(max(abs(g) for g in got), max(abs(e) for e in want))
        for g, e in zip(got, want):
            assert abs(g - e) <= 1e-12 * scale


def test_rhs_permutation_equivariance_exact():
    rng = np.random.default_rng(29)
    for _ in range(300):
        uvw = tuple(float(x) for x in rng.uniform(0.1, 4.0, size=3))
        base = rhs(MetricCoeffs(*uvw), 4.0)
        for perm in permutations(range(3)):
            permuted = rhs(MetricCoeffs(*(uvw[i] for i in perm)), 4.0)
            assert permuted == tuple(base[i] for i in perm)


def test_rhs_rejects_bad_r_squared():
    with pytest.raises(DomainError):
        rhs(MetricCoeffs(1, 1, 1), 0.0)


def test_integrate_isotropic():
    traj = integrate(MetricCoeffs(1, 1, 1))
    assert traj.terminated is Termination.COLLAPSED
    assert traj.collapse_time == pytest.approx(1.0, abs=1e-6)
    for t, m in traj.samples:
        assert abs(m.u - (1.0 - t)) < 1e-9
        assert m.u == m.v == m.w


def test_integrate_snake_collapse_time():
    traj = integrate(MetricCoeffs(0.5, 0.5, 1.0))
    assert traj.collapse_time == pytest.approx(0.25 + math.pi / 8.0, abs=1e-6)


def test_integrate_turtle_collapse_time():
    # (U, beta) = (0.75, 0.5); frozen from a 40-digit closed-form evaluation.
    traj = integrate(MetricCoeffs(0.75, 1.0, 1.0))
    assert traj.collapse_time == pytest.approx(0.9119796082505411, abs=1e-5)


def test_trajectory_invariants():
    traj = integrate(MetricCoeffs(0.4, 0.7, 1.3))
    assert np.all(np.diff(traj.times) > 0)
    assert np.all(traj.coeffs > 0)
    assert traj.terminated is Termination.COLLAPSED
    assert traj.collapse_time >= traj.times[-1]
    assert len(traj) == len(traj.times)
    assert np.min(traj.coeffs[-1]) <= 1e-9 * (1 + 1e-6)


def test_trajectory_dense_output():
    traj = integrate(MetricCoeffs(1, 1, 1))
    ts, grid = traj.uniform_grid(50)
    assert len(ts) == 50 and grid.shape == (50, 3)
    assert_allclose(grid[:, 0], 1.0 - ts, atol=1e-9)
    mid = traj.sample_at(0.5 * traj.times[-1])
    assert mid.shape == (3,)
    with pytest.raises(DomainError):
        traj.sample_at(traj.times[-1] + 1.0)
    with pytest.raises(DomainError):
        traj.uniform_grid(1)


def test_integrate_validates_collapse_eps():
    with pytest.raises(DomainError):
        integrate(MetricCoeffs(1e-10, 1.0, 1.0))
    with pytest.raises(DomainError):
        integrate(MetricCoeffs(1, 1, 1), FlowParams(collapse_eps=2.0))


def test_integrate_max_steps():
    traj = integrate(MetricCoeffs(1, 1, 1), FlowParams(max_steps=2))
    assert traj.terminated is Termination.MAX_STEPS
    assert traj.collapse_time is None
    assert len(traj) == 3  # initial sample plus two steps


def test_integration_failure_carries_partial_trajectory(monkeypatch):
    # A quadratic blow-up field forces step-size underflow before any event.
    monkeypatch.setattr(flow_mod, "_rhs_array", lambda y, r2: 1e3 * y * y)
    with pytest.raises(IntegrationFailureError) as excinfo:
        integrate(MetricCoeffs(1, 1, 1), FlowParams(max_steps=100_000))
    partial = excinfo.value.trajectory
    assert isinstance(partial, Trajectory)
    assert partial.terminated is Termination.FAILED
    assert len(partial) >= 1


def test_ordering_preservation():
    rng = np.random.default_rng(31)
    for _ in range(20):
        vals = np.sort(rng.uniform(0.2, 2.0, size=3))
        traj = integrate(MetricCoeffs(*map(float, vals)))
        assert np.all(traj.coeffs[:, 0] <= traj.coeffs[:, 1] + 1e-10)
        assert np.all(traj.coeffs[:, 1] <= traj.coeffs[:, 2] + 1e-10)


def test_subspace_preservation():
    snake = integrate(MetricCoeffs(0.5, 0.5, 1.0))
    gap = np.abs(snake.coeffs[:, 0] - snake.coeffs[:, 1])
    assert np.all(gap <= 1e-9 * snake.coeffs[:, 2])

    turtle = integrate(MetricCoeffs(0.6, 1.1, 1.1))
    gap = np.abs(turtle.coeffs[:, 1] - turtle.coeffs[:, 2])
    assert np.all(gap <= 1e-9 * turtle.coeffs[:, 2])


def test_scale_covariance():
    rng = np.random.default_rng(37)
    for _ in range(3):
        vals = np.sort(rng.uniform(0.3, 1.5, size=3))
        lam = float(rng.uniform(0.5, 3.0))
        base = integrate(MetricCoeffs(*map(float, vals))).collapse_time
        scaled = integrate(MetricCoeffs(*map(float, lam * vals))).collapse_time
        assert scaled == pytest.approx(lam * base, rel=1e-5)


def test_min_coefficient_grows_then_collapses():
    # Thin-snake start (x < 1): the smallest coefficient rises first, yet
    # the flow still collapses in finite time.
    traj = integrate(MetricCoeffs(0.1, 0.12, 1.0))
    u = traj.coeffs[:, 0]
    assert np.max(u) > u[0]
    assert traj.terminated is Termination.COLLAPSED


def test_x_monotonicity_along_trajectory():
    # Projected coordinates are reliable down to min(u,v,w) ~ sqrt(abs_tol);
    # below that the division by w amplifies integrator noise past the
    # monotonicity increments.
    traj = integrate(MetricCoeffs(0.3, 0.6, 1.2))
    reliable = traj.coeffs.min(axis=1) >= 1e-6
    coeffs = traj.coeffs[reliable]
    x = (coeffs[:, 0] + coeffs[:, 1]) / coeffs[:, 2]
    dx = np.diff(x)
    assert np.all(dx >= 0)
    interior = x[:-1] < 2.0 - 1e-6
    assert np.all(dx[interior] > 0)


def test_isotropic_lambda():
    assert isotropic_lambda(0.0, 4.0) == 1.0
    assert isotropic_lambda(0.75, 4.0) == 0.5
    with pytest.raises(CollapseReachedError):
        isotropic_lambda(1.0, 4.0)
    with pytest.raises(DomainError):
        isotropic_lambda(-0.1, 4.0)


def test_x_rate_examples():
    assert x_rate(MetricCoeffs(0.7, 0.7, 0.7)) == 0.0
    assert x_rate(MetricCoeffs(0.5, 0.5, 1.0)) == pytest.approx(4.0, rel=1e-15)
    assert x_rate(MetricCoeffs(0.5, 0.75, 1.0)) > 0.0
    # The rate scales like the flow itself, by 4/R^2.
    assert x_rate(MetricCoeffs(0.5, 0.5, 1.0), 8.0) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(DomainError):
        x_rate(MetricCoeffs(1.0, 0.5, 0.75))


def test_x_rate_matches_projected_derivative():
    rng = np.random.default_rng(41)
    for _ in range(300):
        u, v, w = np.sort(rng.uniform(0.1, 3.0, size=3))
        m = MetricCoeffs(float(u), float(v), float(w))
        du, dv, dw = rhs(m, 4.0)
        expected = (du + dv) / w - (u + v) * dw / (w * w)
        assert x_rate(m) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_dragon_collapse_time_against_independent_solver():
    # Dragons have no closed form; cross-check the event localization with
    # scipy's own terminal-event machinery on a different method.
    from scipy.integrate import solve_ivp
    from danteflow.flow import _rhs_array

    m0 = MetricCoeffs(0.3, 0.6, 1.2)
    mine = integrate(m0).collapse_time

    eps = 1e-9

    def event(t, y):
        return float(np.min(y)) - eps

    event.terminal = True
    event.direction = -1
    ref = solve_ivp(lambda t, y: _rhs_array(y, 4.0), (0.0, 1e3),
                    np.array(m0.as_tuple()), method="DOP853",
                    rtol=1e-12, atol=1e-14, events=event, dense_output=True)
    assert ref.t_events[0].size == 1
    t_event = float(ref.t_events[0][0])
    y_event = ref.y_events[0][0]
    i = int(np.argmin(y_event))
    slope_est = _rhs_array(y_event, 4.0)[i]
    t_ref = t_event - y_event[i] / slope_est
    assert mine == pytest.approx(t_ref, abs=1e-8)


def test_flow_params_validation():
    with pytest.raises(DomainError):
        FlowParams(rel_tol=0.0)
    with pytest.raises(DomainError):
        FlowParams(abs_tol=-1.0)
    with pytest.raises(DomainError):
        FlowParams(collapse_eps=0.0)
    with pytest.raises(DomainError):
        FlowParams(max_steps=0)
    with pytest.raises(DomainError):
        FlowParams(r_squared=0.0)
