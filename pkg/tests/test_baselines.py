import numpy as np
import pytest

from osga.baselines import run_pga, run_psga
from osga.domains import Box, L2Ball, NonNeg, residual

import oracles


def quad(c):
    c = np.asarray(c, dtype=float)

    def f(x):
        d = x - c
        return 0.5 * float(d @ d), d

    return f


def test_pga_one_exact_step():
    # f = 0.5*||x||^2, gradient step with t=2 from (1,1) lands at -(1,1),
    # projected onto the orthant gives the origin; the origin is optimal
    x, f, trace = run_pga(quad([0.0, 0.0]), NonNeg(), np.array([1.0, 1.0]), max_iter=50)
    np.testing.assert_allclose(x, [0.0, 0.0], atol=1e-12)
    assert f == 0.0
    # stationarity detected: the run stops well before the iteration cap
    assert trace[-1].iter < 50


def test_pga_monotone_decrease():
    rng = np.random.default_rng(3)
    c = rng.standard_normal(10)
    x, f, trace = run_pga(quad(c), L2Ball(1.0), rng.standard_normal(10), max_iter=200)
    fs = [r.f for r in trace]
    assert all(b <= a + 1e-14 for a, b in zip(fs, fs[1:]))
    assert residual(L2Ball(1.0), x) <= 1e-10


def test_pga_reaches_constrained_optimum():
    # minimize 0.5*||x - c||^2 over the unit ball with ||c|| > 1: the
    # optimum is the projection c/||c||
    c = np.array([3.0, 4.0])
    x, f, trace = run_pga(quad(c), L2Ball(1.0), np.zeros(2), max_iter=300)
    np.testing.assert_allclose(x, c / 5.0, atol=1e-6)


def test_pga_infeasible_start_projected():
    x, f, trace = run_pga(
        quad([0.5, 0.5]), Box([0.0, 0.0], [1.0, 1.0]), np.array([5.0, -5.0]), max_iter=100
    )
    np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-8)


def test_psga_zero_subgradient_stops():
    x, f, trace = run_psga(quad([2.0, 2.0]), NonNeg(), np.array([2.0, 2.0]), max_iter=100)
    np.testing.assert_allclose(x, [2.0, 2.0])
    assert len(trace) == 1


def test_psga_best_so_far_nonincreasing():
    rng = np.random.default_rng(9)
    c = rng.standard_normal(6)

    def obj(x):
        return float(np.abs(x - c).sum()), np.sign(x - c)

    x, f, trace = run_psga(obj, NonNeg(), rng.standard_normal(6), max_iter=500)
    fs = [r.f for r in trace]
    assert all(b <= a for a, b in zip(fs, fs[1:]))
    f_opt = float(np.abs(np.maximum(c, 0.0) - c).sum())
    assert f <= f_opt + 0.2
    assert residual(NonNeg(), x) == 0.0


def test_psga_iterates_feasible():
    dom = L2Ball(1.5)
    seen = []

    def obj(x):
        seen.append(x.copy())
        d = x - np.array([4.0, 0.0, 0.0])
        return 0.5 * float(d @ d), d

    run_psga(obj, dom, np.ones(3), max_iter=50)
    for x in seen:
        assert residual(dom, x) <= 1e-10


def test_trace_records_well_formed():
    x, f, trace = run_pga(quad([1.0, 1.0]), NonNeg(), np.zeros(2), max_iter=20)
    assert trace[0].iter == 0
    iters = [r.iter for r in trace]
    assert iters == list(range(len(trace)))
    assert all(r.elapsed >= 0.0 for r in trace)
    assert trace[-1].f == f


def test_trace_sink_receives_every_record():
    sink = []
    x, f, trace = run_psga(
        quad([1.0, 1.0]), NonNeg(), np.zeros(2), max_iter=10, trace_sink=sink.append
    )
    assert len(sink) == len(trace)
    assert all(a is b for a, b in zip(sink, trace))


@pytest.mark.parametrize("kind", ["nonneg", "box", "l2ball", "simplex"])
def test_both_baselines_improve_random_quadratics(kind):
    rng = np.random.default_rng(hash(kind) % 2**32)
    n = 8
    dom = oracles.random_domain(kind, n, rng)
    c = rng.standard_normal(n) * 2.0
    x0 = rng.standard_normal(n)
    _, f_pga, tr_pga = run_pga(quad(c), dom, x0, max_iter=200)
    _, f_psga, tr_psga = run_psga(quad(c), dom, x0, max_iter=200)
    assert f_pga <= tr_pga[0].f
    assert f_psga <= tr_psga[0].f
