"""Reference first-order solvers: projected gradient with Armijo
backtracking (PGA) and projected subgradient with diminishing steps
(PSGA)."""

from __future__ import annotations

import time

import numpy as np

from .core import Objective
from .domains import project
from .trace import TraceRecord

__all__ = ["run_pga", "run_psga"]


def _objective(obj) -> Objective:
    return obj if isinstance(obj, Objective) else Objective(obj)


def run_pga(
    obj,
    domain,
    x0,
    max_iter: int = 500,
    t0: float = 1.0,
    beta: float = 0.5,
    c: float = 1e-4,
    trace_sink=None,
):
    """Projected gradient descent with Armijo backtracking.

    Accepts a step t when f(z) <= f(x) - (c/t)*||z - x||^2 for
    z = P_C(x - t grad f(x)); the step is re-expanded once per iteration.
    Requires a differentiable objective.  Returns (x, f, trace).
    """
    obj = _objective(obj)
    x = project(domain, np.asarray(x0, dtype=float))
    f, g = obj(x)
    t = t0
    t_start = time.perf_counter()
    trace = [TraceRecord(0, 0.0, f)]
    if trace_sink is not None:
        trace_sink(trace[0])

    for k in range(1, max_iter + 1):
        t = min(t / beta, 1e12)
        accepted = False
        for _ in range(80):
            z = project(domain, x - t * g)
            dz = z - x
            sq = float(dz @ dz)
            if sq == 0.0:
                accepted = True
                f_z = f
                z = x
                break
            f_z, _ = obj(z)
            if f_z <= f - (c / t) * sq:
                accepted = True
                break
            t *= beta
        if not accepted:
            break
        x = z
        f = f_z
        _, g = obj(x)
        rec = TraceRecord(k, time.perf_counter() - t_start, f)
        trace.append(rec)
        if trace_sink is not None:
            trace_sink(rec)
        if sq == 0.0:
            break
    return x, f, trace


def run_psga(
    obj,
    domain,
    x0,
    max_iter: int = 500,
    a: float = 1.0,
    trace_sink=None,
):
    """Projected subgradient method with nonsummable diminishing steps.

    x_{k+1} = P_C(x_k - (a/sqrt(k)) * g_k / max(1, ||g_k||)); the iterate
    sequence is not monotone, so the best point seen is tracked and
    returned.  Returns (x_best, f_best, trace).
    """
    obj = _objective(obj)
    x = project(domain, np.asarray(x0, dtype=float))
    f, g = obj(x)
    x_best, f_best = x, f
    t_start = time.perf_counter()
    trace = [TraceRecord(0, 0.0, f_best)]
    if trace_sink is not None:
        trace_sink(trace[0])

    for k in range(1, max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm == 0.0:
            break
        step = a / np.sqrt(k)
        x = project(domain, x - step * g / max(1.0, gnorm))
        f, g = obj(x)
        if f < f_best:
            x_best, f_best = x, f
        rec = TraceRecord(k, time.perf_counter() - t_start, f_best)
        trace.append(rec)
        if trace_sink is not None:
            trace_sink(rec)
    return x_best, f_best, trace
