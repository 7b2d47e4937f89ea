"""Ricci-flow dynamics of the metric coefficients (u, v, w).

The flow ``dg/dt = -2 Ric(g)`` restricted to left-invariant metrics reduces
to three coupled ODEs.  With sigma = (u + v + w)/2,

    du/dt = -16 (sigma - v)(sigma - w) / (R^2 v w)
          = -(4/R^2) [2 + (u^2 - v^2 - w^2)/(v w)],

and cyclically.  Every solution collapses (all coefficients reach zero) in
finite time; the collapse is detected by an event threshold on
min(u, v, w) and the collapse time is extrapolated linearly through zero.

Two symmetric reductions integrate in closed form and are implemented
here alongside the numeric integrator so each can check the other:

* snake (u = v):  with W = w(0), alpha^2 = W/V - 1 and lambda = w/W,

      t(lambda) = (W/2) [ (1-lambda)(1-lambda a^2) / ((1+a^2)(1+a^2 lambda^2))
                          + atan((1-lambda) a / (1+a^2 lambda)) / a ],

  collapsing at T = (W/2)(1/(1+a^2) + atan(a)/a).

* turtle (v = w):  with U = u(0), beta^2 = 1 - U/V and mu = u/U,

      t(mu) = U [ 1/(2(1-b^2)) - mu/(2(1-b^2 mu^2))
                  + log((1+b)(1-b mu) / ((1-b)(1+b mu))) / (4b) ],

  collapsing at T' = (U/2)(1/(1-b^2) + log((1+b)/(1-b))/(2b)).

Closed-form times are expressed in the R^2 = 4 normalization in which the
reductions are derived; rescale by r_squared/4 for other radii.

Integrations are single-threaded per trajectory; trajectories are
independent values, so sweeps may run many integrations concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import RK45, OdeSolution
from scipy.optimize import brentq

from .errors import CollapseReachedError, DomainError, IntegrationFailureError
from .geometry import DEFAULT_R_SQUARED, MetricCoeffs, _require_positive

#: Below this, the removable 1/alpha (1/beta) terms switch to series form.
SERIES_SWITCH = 1e-6

#: Turtle non-sphericity cap; precision degrades noticeably beyond 0.999.
BETA_CAP = 1.0 - 1e-12


@dataclass(frozen=True)
class FlowParams:
    """Integration controls.  collapse_eps must stay below min(u0, v0, w0)."""

    r_squared: float = DEFAULT_R_SQUARED
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    collapse_eps: float = 1e-9
    max_steps: int = 10_000

    def __post_init__(self) -> None:
        _require_positive("r_squared", self.r_squared)
        _require_positive("rel_tol", self.rel_tol)
        _require_positive("abs_tol", self.abs_tol)
        _require_positive("collapse_eps", self.collapse_eps)
        if self.max_steps < 1:
            raise DomainError(f"max_steps must be positive, got {self.max_steps}")


class Termination(Enum):
    COLLAPSED = "collapsed"
    MAX_STEPS = "max_steps"
    FAILED = "failed"  # only on the partial trajectory inside IntegrationFailureError


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stamped metric coefficients with the detected collapse time.

    ``times`` is strictly increasing and every row of ``coeffs`` is
    positive.  When terminated == COLLAPSED, collapse_time is at or past
    the final sample time.
    """

    times: np.ndarray
    coeffs: np.ndarray
    terminated: Termination
    collapse_time: float | None
    _sol: OdeSolution | None = field(default=None, repr=False)

    @property
    def samples(self) -> list[tuple[float, MetricCoeffs]]:
        return [(float(t), MetricCoeffs(*row)) for t, row in zip(self.times, self.coeffs)]

    def __iter__(self) -> Iterator[tuple[float, MetricCoeffs]]:
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.times)

    def sample_at(self, t) -> np.ndarray:
        """Coefficients at arbitrary times inside the covered span (4th-order
        dense output of the integrator)."""
        if self._sol is None:
            raise DomainError("trajectory carries no dense output")
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise DomainError("requested time outside the integrated span")
        out = self._sol(t)
        return out.T if out.ndim == 2 else out

    def uniform_grid(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """n equispaced samples spanning the trajectory."""
        if n < 2:
            raise DomainError(f"grid needs at least 2 points, got {n}")
        ts = np.linspace(self.times[0], self.times[-1], n)
        return ts, self.sample_at(ts)


def _rhs_scalar(u, v, w, r_squared):
    # Each half-difference sums the other two components first, which keeps
    # the slot map exactly equivariant under input permutations.
    qu = ((v + w) - u) / 2.0
    qv = ((u + w) - v) / 2.0
    qw = ((u + v) - w) / 2.0
    k = -16.0 / r_squared
    du = k * (qv * qw) / (v * w)
    dv = k * (qu * qw) / (u * w)
    dw = k * (qu * qv) / (u * v)
    return du, dv, dw


def _rhs_array(y: np.ndarray, r_squared: float) -> np.ndarray:
    return np.array(_rhs_scalar(y[0], y[1], y[2], r_squared))


def rhs(m: MetricCoeffs, r_squared: float = DEFAULT_R_SQUARED) -> tuple[float, float, float]:
    """Time derivatives (du, dv, dw) of the metric coefficients.

    Uses the sigma-product form; the bracket form
    -(4/R^2)[2 + (u^2 - v^2 - w^2)/(vw)] agrees to 1e-12 relative and is
    kept in the test suite as the cross-check.
    """
    _require_positive("r_squared", r_squared)
    return _rhs_scalar(m.u, m.v, m.w, r_squared)


def _advance(fun: Callable[[float, np.ndarray], np.ndarray],
             y0: np.ndarray,
             rel_tol: float,
             abs_tol: float,
             max_steps: int,
             margin: Callable[[np.ndarray], float]):
    """Step an RK45 solver from t=0 until margin(y) crosses zero.

    margin must be positive at y0; the crossing is localized with brentq on
    the dense output of the crossing step.  Returns (times, states,
    interpolants, status) with status in {"event", "max_steps", "failed"};
    on failure the failing step's message is appended as a fifth element.
    """
    y0 = np.asarray(y0, dtype=float)
    if margin(y0) <= 0.0:
        raise DomainError("stop margin must be positive at the initial state")
    solver = RK45(fun, 0.0, y0, t_bound=math.inf, rtol=rel_tol, atol=abs_tol)
    times = [0.0]
    states = [np.array(y0, dtype=float)]
    interps = []
    for _ in range(max_steps):
        message = solver.step()
        if solver.status == "failed":
            return times, states, interps, "failed", message
        dense = solver.dense_output()
        interps.append(dense)
        if margin(solver.y) <= 0.0:
            def crossing(t: float) -> float:
                return margin(dense(t))
            if crossing(solver.t) == 0.0:
                t_event = solver.t
            else:
                t_event = brentq(crossing, solver.t_old, solver.t)
            times.append(float(t_event))
            states.append(np.array(dense(t_event), dtype=float))
            return times, states, interps, "event", None
        times.append(float(solver.t))
        states.append(solver.y.copy())
    return times, states, interps, "max_steps", None


def _build_solution(times: list[float], interps) -> OdeSolution | None:
    if not interps:
        return None
    return OdeSolution(np.array(times), interps)


def _extrapolate_collapse(times: np.ndarray, coeffs: np.ndarray) -> float:
    # Linear extrapolation of the smallest coefficient through zero from the
    # final two samples; near collapse that coefficient is linear to O(dt^3).
    i = int(np.argmin(coeffs[-1]))
    t1, y1 = times[-2], coeffs[-2, i]
    t2, y2 = times[-1], coeffs[-1, i]
    if y1 <= y2:
        return float(t2)
    return float(t2 + y2 * (t2 - t1) / (y1 - y2))


def integrate(m0: MetricCoeffs, params: FlowParams | None = None) -> Trajectory:
    """Integrate the flow from m0 until collapse or max_steps.

    Adaptive embedded Runge-Kutta 4(5); stops when min(u, v, w) reaches
    params.collapse_eps, then estimates the collapse time by linear
    extrapolation of the smallest coefficient.  Raises
    IntegrationFailureError (carrying the partial trajectory) on step-size
    underflow.
    """
    if params is None:
        params = FlowParams()
    y0 = np.array(m0.as_tuple(), dtype=float)
    if params.collapse_eps >= y0.min():
        raise DomainError(
            f"collapse_eps ({params.collapse_eps}) must be below the initial "
            f"minimum coefficient ({y0.min()})")

    def fun(t: float, y: np.ndarray) -> np.ndarray:
        return _rhs_array(y, params.r_squared)

    def margin(y: np.ndarray) -> float:
        return float(np.min(y)) - params.collapse_eps

    times, states, interps, status, *rest = _advance(
        fun, y0, params.rel_tol, params.abs_tol, params.max_steps, margin)
    times_arr = np.array(times)
    coeffs_arr = np.array(states)
    sol = _build_solution(times, interps)

    if status == "failed":
        partial = Trajectory(times_arr, coeffs_arr, Termination.FAILED, None, sol)
        raise IntegrationFailureError(
            f"integration failed: {rest[0]}", trajectory=partial)
    if status == "max_steps":
        return Trajectory(times_arr, coeffs_arr, Termination.MAX_STEPS, None, sol)
    collapse_time = _extrapolate_collapse(times_arr, coeffs_arr)
    return Trajectory(times_arr, coeffs_arr, Termination.COLLAPSED, collapse_time, sol)


def isotropic_lambda(t: float, r_squared: float = DEFAULT_R_SQUARED) -> float:
    """Linear stretch factor sqrt(1 - 4t/R^2) of the round collapsing sphere."""
    _require_positive("r_squared", r_squared)
    if t < 0.0:
        raise DomainError(f"time must be nonnegative, got {t}")
    if t >= r_squared / 4.0:
        raise CollapseReachedError(
            f"t = {t} is at or past the collapse time {r_squared / 4.0}")
    return math.sqrt(1.0 - 4.0 * t / r_squared)


def _snake_collapse_time(W: float, alpha: float) -> float:
    a2 = alpha * alpha
    if alpha < SERIES_SWITCH:
        tail = 1.0 - a2 / 3.0 + a2 * a2 / 5.0
    else:
        tail = math.atan(alpha) / alpha
    return 0.5 * W * (1.0 / (1.0 + a2) + tail)


def _turtle_collapse_time(U: float, beta: float) -> float:
    b2 = beta * beta
    if beta < SERIES_SWITCH:
        tail = 1.0 + b2 / 3.0 + b2 * b2 / 5.0
    else:
        tail = math.log((1.0 + beta) / (1.0 - beta)) / (2.0 * beta)
    return 0.5 * U * (1.0 / (1.0 - b2) + tail)


@dataclass(frozen=True)
class SnakeSolution:
    """Closed-form flow of a snake (u = v), parameterized by W = w(0) and
    the non-sphericity alpha, alpha^2 = W/V - 1.  alpha = 0 is the round
    sphere."""

    W: float
    alpha: float

    def __post_init__(self) -> None:
        _require_positive("W", self.W)
        if not math.isfinite(self.alpha) or self.alpha < 0.0:
            raise DomainError(f"alpha must be nonnegative, got {self.alpha!r}")

    @classmethod
    def from_initial(cls, m0: MetricCoeffs) -> "SnakeSolution":
        """Build from snake initial coefficients (V, V, W) with W >= V."""
        if m0.u != m0.v:
            raise DomainError(f"snake initial data needs u = v, got ({m0.u}, {m0.v})")
        if m0.w < m0.v:
            raise DomainError(f"snake initial data needs w >= v, got ({m0.v}, {m0.w})")
        return cls(W=m0.w, alpha=math.sqrt(m0.w / m0.v - 1.0))

    @property
    def V(self) -> float:
        return self.W / (1.0 + self.alpha * self.alpha)

    @property
    def collapse_T(self) -> float:
        return _snake_collapse_time(self.W, self.alpha)

    @property
    def initial_coeffs(self) -> MetricCoeffs:
        return MetricCoeffs(self.V, self.V, self.W)


@dataclass(frozen=True)
class TurtleSolution:
    """Closed-form flow of a turtle (v = w), parameterized by U = u(0) and
    the non-sphericity beta in [0, 1), beta^2 = 1 - U/V."""

    U: float
    beta: float

    def __post_init__(self) -> None:
        _require_positive("U", self.U)
        if not math.isfinite(self.beta) or not (0.0 <= self.beta <= BETA_CAP):
            raise DomainError(
                f"beta must lie in [0, {BETA_CAP}], got {self.beta!r}")

    @classmethod
    def from_initial(cls, m0: MetricCoeffs) -> "TurtleSolution":
        """Build from turtle initial coefficients (U, V, V) with U <= V."""
        if m0.v != m0.w:
            raise DomainError(f"turtle initial data needs v = w, got ({m0.v}, {m0.w})")
        if m0.u > m0.v:
            raise DomainError(f"turtle initial data needs u <= v, got ({m0.u}, {m0.v})")
        beta = min(math.sqrt(1.0 - m0.u / m0.v), BETA_CAP)
        return cls(U=m0.u, beta=beta)

    @property
    def V(self) -> float:
        return self.U / (1.0 - self.beta * self.beta)

    @property
    def collapse_T(self) -> float:
        return _turtle_collapse_time(self.U, self.beta)

    @property
    def initial_coeffs(self) -> MetricCoeffs:
        return MetricCoeffs(self.U, self.V, self.V)


def snake_time_of_lambda(s: SnakeSolution, lam: float) -> float:
    """Elapsed time at which the snake's largest coefficient is w = W*lambda.

    Strictly decreasing in lambda with t(1) = 0 and t(0) = collapse_T.
    For alpha below the series switch the removable atan(.)/alpha term is
    evaluated by series to avoid 0/0.
    """
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    a = s.alpha
    a2 = a * a
    frac = (1.0 - lam) * (1.0 - lam * a2) / ((1.0 + a2) * (1.0 + a2 * lam * lam))
    z = (1.0 - lam) * a / (1.0 + a2 * lam)
    if a < SERIES_SWITCH:
        z2 = z * z
        tail = (1.0 - lam) / (1.0 + a2 * lam) * (1.0 - z2 / 3.0 + z2 * z2 / 5.0)
    else:
        tail = math.atan(z) / a
    return 0.5 * s.W * (frac + tail)


def snake_profile(s: SnakeSolution, lam: float) -> tuple[float, float]:
    """Coefficients (w, v) = (W*lambda, W*lambda/(1 + alpha^2 lambda^2)).

    The aspect ratio w/v = 1 + alpha^2 lambda^2 tends to 1 at collapse:
    the snake rounds out into a sphere before vanishing.
    """
    if not 0.0 < lam <= 1.0:
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")
    w = s.W * lam
    v = w / (1.0 + s.alpha * s.alpha * lam * lam)
    return (w, v)


def snake_lambda_of_time(s: SnakeSolution, t: float, tol: float = 1e-12) -> float:
    """Invert t(lambda) by bisection; monotone, so convergence is guaranteed."""
    _require_positive("tol", tol)
    T = s.collapse_T
    if not 0.0 <= t <= T:
        raise DomainError(f"time must lie in [0, {T}], got {t}")
    lo, hi = 0.0, 1.0  # t(lo) = T >= t, t(hi) = 0 <= t
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if snake_time_of_lambda(s, mid) > t:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def turtle_time_of_mu(s: TurtleSolution, mu: float) -> float:
    """Elapsed time at which the turtle's smallest coefficient is u = U*mu.

    Strictly decreasing in mu with t(1) = 0 and t(0) = collapse_T; the
    removable log(.)/beta term switches to its series below the switch.
    """
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"mu must lie in [0, 1], got {mu}")
    b = s.beta
    b2 = b * b
    if b < SERIES_SWITCH:
        tail = 0.5 * ((1.0 - mu)
                      + b2 * (1.0 - mu ** 3) / 3.0
                      + b2 * b2 * (1.0 - mu ** 5) / 5.0)
    else:
        tail = math.log((1.0 + b) * (1.0 - b * mu)
                        / ((1.0 - b) * (1.0 + b * mu))) / (4.0 * b)
    return s.U * (0.5 / (1.0 - b2) - 0.5 * mu / (1.0 - b2 * mu * mu) + tail)


def turtle_profile(s: TurtleSolution, mu: float) -> tuple[float, float]:
    """Coefficients (u, v) = (U*mu, U*mu/(1 - beta^2 mu^2)); v = w throughout.

    The aspect ratio u/v = 1 - beta^2 mu^2 tends to 1 at collapse: the
    contracting turtle becomes relatively thicker.
    """
    if not 0.0 < mu <= 1.0:
        raise DomainError(f"mu must lie in (0, 1], got {mu}")
    if s.beta * mu >= 1.0:
        raise DomainError(f"beta*mu must stay below 1, got {s.beta * mu}")
    u = s.U * mu
    v = u / (1.0 - s.beta * s.beta * mu * mu)
    return (u, v)


def turtle_mu_of_time(s: TurtleSolution, t: float, tol: float = 1e-12) -> float:
    """Invert t(mu) by bisection, mirroring snake_lambda_of_time."""
    _require_positive("tol", tol)
    T = s.collapse_T
    if not 0.0 <= t <= T:
        raise DomainError(f"time must lie in [0, {T}], got {t}")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if turtle_time_of_mu(s, mid) > t:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def x_rate(m: MetricCoeffs, r_squared: float = DEFAULT_R_SQUARED) -> float:
    """Time derivative of the triangle abscissa x = (u + v)/w.

    Requires the ordered convention w >= v >= u.  Strictly positive unless
    u = v = w: the flow always drifts toward the isotropic corner x = 2.
    """
    _require_positive("r_squared", r_squared)
    u, v, w = m.as_tuple()
    if not (w >= v >= u):
        raise DomainError(f"x_rate needs u <= v <= w, got ({u}, {v}, {w})")
    numerator = u * (w - v) ** 2 + u * u * (v - u) + v * (w * w - v * v)
    return (4.0 / r_squared) * 2.0 * numerator / (u * v * w * w)
