import math

import numpy as np
import pytest

from osga.core import (
    NonFiniteObjective,
    Objective,
    OsgaParams,
    default_q0,
    init,
    run,
    step,
    update_params,
)
from osga.domains import L2Ball, NonNeg, residual
from osga.subproblem import eval_prox

import oracles


def quad_shift(c):
    c = np.asarray(c, dtype=float)

    def f(x):
        d = x - c
        return 0.5 * float(d @ d), d

    return f


def test_init_example_values():
    x0 = np.array([1.0, 1.0])
    q0 = default_q0(x0)
    state = init(lambda x: (0.5 * float(x @ x), x), NonNeg(), x0, OsgaParams(), q0)
    np.testing.assert_allclose(state.h, [1.0, 1.0])
    assert state.gamma == pytest.approx(-1.0)
    assert state.alpha == OsgaParams().alpha_max
    assert state.eta > 0


def test_init_at_minimizer_gives_zero_eta():
    c = np.array([2.0, 3.0])
    x_b, f_b, trace = run(quad_shift(c), NonNeg(), c, OsgaParams(max_iter=50))
    # subgradient vanishes at the start point: certified immediately
    np.testing.assert_allclose(x_b, c)
    assert trace[-1].eta == 0.0
    assert len(trace) == 1


def test_linear_objective_first_u_is_support_point():
    cvec = np.array([3.0, -4.0])
    x0 = np.array([0.1, 0.1])
    q0 = default_q0(x0)
    state = init(lambda x: (float(cvec @ x), cvec), L2Ball(2.0), x0, OsgaParams(), q0)
    # the auxiliary maximizer points against the gradient direction
    u_dir = state.u / np.linalg.norm(state.u)
    np.testing.assert_allclose(u_dir, -cvec / np.linalg.norm(cvec), atol=1e-8)


def test_f_target_stops_immediately():
    x0 = np.array([1.0, 1.0])
    obj = quad_shift([0.0, 0.0])
    f0, _ = obj(x0)
    x_b, f_b, trace = run(obj, NonNeg(), x0, OsgaParams(max_iter=100, f_target=f0))
    assert len(trace) == 1
    assert f_b == f0


def test_max_iter_zero_returns_x0():
    x0 = np.array([1.0, 2.0])
    x_b, f_b, trace = run(quad_shift([0.0, 0.0]), NonNeg(), x0, OsgaParams(max_iter=0))
    np.testing.assert_allclose(x_b, x0)
    assert len(trace) == 1


def test_single_step_decreases_interior_quadratic():
    c = np.array([1.0, 2.0, 0.5])
    x0 = np.array([4.0, 4.0, 4.0])
    q0 = default_q0(x0)
    params = OsgaParams()
    state = init(quad_shift(c), NonNeg(), x0, params, q0)
    new = step(state, quad_shift(c), NonNeg(), params, q0)
    assert new.f_xb < state.f_xb


def test_update_params_ratio_boundary():
    p = OsgaParams()
    alpha, eta = 0.3, 2.0
    eta_bar = eta * (1 - p.delta * alpha)  # R == 1 exactly
    a2, h2, g2, e2, u2 = update_params(
        alpha, eta, "h", "g", "u", eta_bar, "hb", "gb", "ub", p
    )
    assert a2 == pytest.approx(alpha)
    assert (h2, g2, e2, u2) == ("hb", "gb", eta_bar, "ub")


def test_update_params_no_improvement_shrinks_alpha():
    p = OsgaParams()
    a2, h2, g2, e2, u2 = update_params(
        0.3, 2.0, "h", "g", "u", 2.5, "hb", "gb", "ub", p
    )
    assert a2 == pytest.approx(0.3 * math.exp(-p.kappa))
    assert (h2, g2, e2, u2) == ("h", "g", 2.0, "u")


def test_update_params_growth_capped():
    p = OsgaParams(delta=0.9, alpha_max=0.7, kappa=0.5, kappa_prime=0.5)
    alpha, eta = 0.1, 1.0
    # choose eta_bar so R = 3
    eta_bar = eta - 3 * p.delta * alpha * eta
    a2, *_ = update_params(alpha, eta, "h", "g", "u", eta_bar, "hb", "gb", "ub", p)
    assert a2 == pytest.approx(min(0.1 * math.e, 0.7))


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        OsgaParams(delta=1.5)
    with pytest.raises(ValueError):
        OsgaParams(kappa=0.1, kappa_prime=0.5)
    with pytest.raises(ValueError):
        OsgaParams(mu=-1.0)


def test_non_finite_objective_raises():
    def bad(x):
        return np.nan, x

    with pytest.raises(NonFiniteObjective):
        run(bad, NonNeg(), np.ones(2), OsgaParams(max_iter=5))


def test_infeasible_x0_projected():
    x_b, f_b, trace = run(
        quad_shift([1.0, 1.0]), NonNeg(), np.array([-5.0, -5.0]), OsgaParams(max_iter=20)
    )
    assert residual(NonNeg(), x_b) == 0.0


def test_evaluated_points_stay_feasible():
    dom = L2Ball(2.0)
    seen = []

    def obj(x):
        seen.append(x.copy())
        d = x - np.array([5.0, 5.0])
        return 0.5 * float(d @ d), d

    run(obj, dom, np.array([0.5, 0.5]), OsgaParams(max_iter=30))
    for x in seen:
        assert residual(dom, x) <= 1e-10


@pytest.mark.parametrize("kind", ["nonneg", "l2ball", "box", "l1ball", "simplex"])
@pytest.mark.parametrize("data", ["quad", "l1"])
def test_monotonicity_and_alpha_range(kind, data):
    rng = np.random.default_rng(hash((kind, data)) % 2**32)
    n = 8
    dom = oracles.random_domain(kind, n, rng)
    c = rng.standard_normal(n)
    if data == "quad":
        obj = quad_shift(c)
    else:
        def obj(x):
            return float(np.abs(x - c).sum()), np.sign(x - c)
    x0 = rng.standard_normal(n)
    params = OsgaParams(max_iter=100)
    x_b, f_b, trace = run(obj, dom, x0, params)
    fs = [r.f for r in trace]
    etas = [r.eta for r in trace]
    assert all(b <= a + 1e-14 for a, b in zip(fs, fs[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(etas, etas[1:]))
    assert all(0 < r.alpha <= params.alpha_max for r in trace)


def test_error_bound_with_known_minimum():
    c = np.array([1.0, 0.5, 2.0, 0.2])
    obj = quad_shift(c)  # minimum 0 at c, interior of the orthant
    x0 = np.array([5.0, 5.0, 5.0, 5.0])
    q0 = default_q0(x0)
    x_b, f_b, trace = run(obj, NonNeg(), x0, OsgaParams(max_iter=200), q0=q0)
    q_hat = eval_prox(q0, c)
    for rec in trace:
        assert 0.0 <= rec.f
        assert rec.f <= rec.eta * q_hat + 1e-8
    assert f_b < 1e-6


def test_strongly_convex_mode_runs_and_descends():
    c = np.array([1.0, 2.0])
    x0 = np.array([6.0, 6.0])
    params = OsgaParams(max_iter=100, mu=0.1)
    x_b, f_b, trace = run(quad_shift(c), NonNeg(), x0, params)
    assert f_b < trace[0].f
    fs = [r.f for r in trace]
    assert all(b <= a + 1e-14 for a, b in zip(fs, fs[1:]))


def test_eta_tol_stopping():
    c = np.array([1.0, 1.0])
    x_b, f_b, trace = run(
        quad_shift(c), NonNeg(), np.array([4.0, 4.0]),
        OsgaParams(max_iter=5000, eta_tol=1e-6),
    )
    assert trace[-1].eta <= 1e-6
    assert trace[-1].iter < 5000


def test_time_budget_stops():
    c = np.zeros(50)
    params = OsgaParams(max_iter=10**7, time_budget=0.2)
    x_b, f_b, trace = run(quad_shift(c), NonNeg(), np.ones(50), params)
    assert trace[-1].elapsed < 5.0
