"""The optimal subgradient iteration and its step-size update scheme.

The solver maintains an affine global underestimator (gamma, h) of the
objective, the best point found, and an error factor eta that bounds
f(x_b) - f_min via eta * Q(x_min).  Each iteration evaluates the objective
at two trial points built from the auxiliary-problem maximizer and then
adjusts the mixing factor alpha based on how much eta decreased.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import subproblem as sp
from .domains import project, residual
from .trace import TraceRecord

__all__ = [
    "OsgaParams",
    "Objective",
    "OsgaState",
    "NonFiniteObjective",
    "default_q0",
    "init",
    "step",
    "update_params",
    "run",
]


class NonFiniteObjective(RuntimeError):
    """The objective returned a non-finite value or subgradient at a
    feasible point."""


@dataclass(frozen=True)
class OsgaParams:
    """Solver parameters; the defaults are the standard choices."""

    delta: float = 0.9
    alpha_max: float = 0.7
    kappa: float = 0.5
    kappa_prime: float = 0.5
    mu: float = 0.0
    f_target: float = -math.inf
    max_iter: int = 500
    eta_tol: float = 0.0
    time_budget: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if not 0 < self.alpha_max < 1:
            raise ValueError("alpha_max must be in (0, 1)")
        if not 0 < self.kappa_prime <= self.kappa:
            raise ValueError("need 0 < kappa_prime <= kappa")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")


@dataclass(frozen=True)
class Objective:
    """First-order oracle: x -> (f(x), subgradient).  ``f_min`` is an
    optional known minimum used only for diagnostics."""

    func: Callable[[np.ndarray], tuple]
    f_min: Optional[float] = None

    def __call__(self, x: np.ndarray):
        f, g = self.func(x)
        f = float(f)
        g = np.asarray(g, dtype=float)
        if not (math.isfinite(f) and np.all(np.isfinite(g))):
            raise NonFiniteObjective(f"non-finite objective data at f={f}")
        return f, g


@dataclass
class OsgaState:
    x_b: np.ndarray
    f_xb: float
    gamma: float
    h: np.ndarray
    eta: float
    u: np.ndarray
    alpha: float
    iter: int = 0
    n_evals: int = 0


def default_q0(x0: np.ndarray) -> float:
    """Prox offset 0.5*||x0||^2 plus machine epsilon (keeps Q0 > 0 even
    for x0 = 0)."""
    return 0.5 * float(x0 @ x0) + np.finfo(float).eps


def _objective(obj) -> Objective:
    return obj if isinstance(obj, Objective) else Objective(obj)


def _solve(rel, domain, q0, fallback_u):
    """Subproblem solve that maps a vanishing supremum (root at 0, e.g.
    when starting at the optimum) to e = 0 so the caller stops cleanly."""
    try:
        return sp.solve(rel, domain, q0)
    except sp.BracketingFailure as exc:
        if exc.vanishing:
            return sp.SubproblemSolution(fallback_u, 0.0)
        raise


def init(obj, domain, x0, params: OsgaParams, q0: float) -> OsgaState:
    """Build the starting state: first linear relaxation from the
    subgradient at x0, then one subproblem solve."""
    obj = _objective(obj)
    x0 = np.asarray(x0, dtype=float)
    f0, g0 = obj(x0)
    mu = params.mu
    h = g0 - mu * sp.prox_gradient(x0)
    gamma = f0 - mu * sp.eval_prox(q0, x0) - float(h @ x0)
    gamma_b = gamma - f0
    sol = _solve(sp.Relaxation(gamma_b, h), domain, q0, project(domain, np.zeros_like(x0)))
    return OsgaState(
        x_b=x0.copy(),
        f_xb=f0,
        gamma=gamma,
        h=h,
        eta=sol.e - mu,
        u=sol.u,
        alpha=params.alpha_max,
        iter=0,
        n_evals=1,
    )


def update_params(
    alpha, eta, h, gamma, u, eta_bar, h_bar, gamma_bar, u_bar, params: OsgaParams
):
    """Step-factor and relaxation update.

    R = (eta - eta_bar) / (delta * alpha * eta); alpha shrinks by
    exp(-kappa) when R < 1 and grows by exp(kappa_prime * (R - 1)) capped
    at alpha_max otherwise.  The barred quantities are accepted only when
    they decreased eta.
    """
    diff = float(eta) - float(eta_bar)
    denom = params.delta * alpha * float(eta)
    # Guard the ratio against underflow of eta near optimality: a zero or
    # non-finite denominator would otherwise poison alpha with inf/NaN.
    R = diff / denom if denom > 0.0 and math.isfinite(diff / denom) else 1.0
    if R < 1.0:
        alpha = alpha * math.exp(-params.kappa)
    else:
        grow = params.kappa_prime * (R - 1.0)
        if grow >= 700.0:
            alpha = params.alpha_max
        else:
            alpha = min(alpha * math.exp(grow), params.alpha_max)
    if eta_bar < eta:
        h, gamma, eta, u = h_bar, gamma_bar, eta_bar, u_bar
    return alpha, h, gamma, eta, u


def step(state: OsgaState, obj, domain, params: OsgaParams, q0: float) -> OsgaState:
    """One full iteration: two trial evaluations, best-point update,
    subproblem resolution, and the parameter update."""
    obj = _objective(obj)
    mu = params.mu
    alpha = state.alpha
    x_b, f_xb = state.x_b, state.f_xb
    gamma, h, u = state.gamma, state.h, state.u

    x = x_b + alpha * (u - x_b)
    f_x, g_x = obj(x)
    g = g_x - mu * sp.prox_gradient(x)
    h_bar = h + alpha * (g - h)
    gamma_bar = gamma + alpha * (f_x - mu * sp.eval_prox(q0, x) - float(g @ x) - gamma)

    # Best of the incumbent and the first trial point (ties keep x_b).
    if f_x < f_xb:
        xb1, fb1 = x, f_x
    else:
        xb1, fb1 = x_b, f_xb

    sol1 = _solve(sp.Relaxation(gamma_bar - fb1, h_bar), domain, q0, x_b)
    x2 = x_b + alpha * (sol1.u - x_b)
    f_x2, _ = obj(x2)

    if f_x2 < fb1:
        xb_new, fb_new = x2, f_x2
    else:
        xb_new, fb_new = xb1, fb1

    sol2 = _solve(sp.Relaxation(gamma_bar - fb_new, h_bar), domain, q0, xb_new)
    eta_bar = sol2.e - mu

    alpha, h, gamma, eta, u = update_params(
        alpha, state.eta, h, gamma, u, eta_bar, h_bar, gamma_bar, sol2.u, params
    )
    return OsgaState(
        x_b=xb_new,
        f_xb=fb_new,
        gamma=gamma,
        h=h,
        eta=eta,
        u=u,
        alpha=alpha,
        iter=state.iter + 1,
        n_evals=state.n_evals + 2,
    )


def run(obj, domain, x0, params: OsgaParams = OsgaParams(), q0=None, trace_sink=None):
    """Run the solver until a stopping rule fires.

    Stops on max_iter, f <= f_target, eta <= eta_tol (eta <= 0 certifies
    optimality), or the time budget.  Returns (x_b, f_xb, trace); the
    trace is also streamed to ``trace_sink`` when given.
    """
    obj = _objective(obj)
    x0 = np.asarray(x0, dtype=float)
    if residual(domain, x0) > 1e-12:
        x0 = project(domain, x0)
    if q0 is None:
        q0 = default_q0(x0)

    t_start = time.perf_counter()
    trace: list[TraceRecord] = []

    def emit(state):
        rec = TraceRecord(
            iter=state.iter,
            elapsed=time.perf_counter() - t_start,
            f=state.f_xb,
            eta=state.eta,
            alpha=state.alpha,
        )
        trace.append(rec)
        if trace_sink is not None:
            trace_sink(rec)

    state = init(obj, domain, x0, params, q0)
    emit(state)
    while (
        state.iter < params.max_iter
        and state.f_xb > params.f_target
        and state.eta > params.eta_tol
    ):
        if (
            params.time_budget is not None
            and time.perf_counter() - t_start > params.time_budget
        ):
            break
        state = step(state, obj, domain, params, q0)
        emit(state)
    return state.x_b, state.f_xb, trace
