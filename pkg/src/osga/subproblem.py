"""Solvers for the auxiliary problem  max_{x in C} -(gamma + <h, x>) / Q(x).

With the quadratic prox term Q(x) = 0.5*||x||^2 + Q0, the maximizer is the
projection of -h/e onto C, where e > 0 is the unique root of the scalar
function ``phi`` below.  ``phi`` is the pointwise minimum over C of affine
functions of e with positive slope Q(x), hence increasing, so the root can
be bracketed by geometric expansion and refined with Brent's method.

For several domains the root solves a quadratic and is available in closed
form; for constraints given as a norm sublevel set, the same maximizer is
characterized by a KKT system whose multiplier is recovered from the
projection's shrink threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .domains import (
    Affine,
    GroupL12Ball,
    Halfspace,
    Hyperplane,
    L2Ball,
    NonNeg,
    project,
)

__all__ = [
    "Relaxation",
    "SubproblemSolution",
    "BracketingFailure",
    "NegativeDiscriminant",
    "eval_prox",
    "prox_gradient",
    "eval_E",
    "u_hat",
    "phi",
    "solve_generic",
    "solve_closed_form",
    "solve",
    "solve_functional_l2",
    "solve_functional_group_l12",
    "NormSubdifferential",
    "subdifferential_norm",
]

# Root residual target: |phi(e)| <= PHI_TOL * max(1, |gamma|).
PHI_TOL = 1e-10

_BRACKET_FACTOR = 4.0
_BRACKET_STEPS = 60


class BracketingFailure(RuntimeError):
    """No sign change of phi found within the expansion budget.

    Signals (gamma, h) outside the regime where the supremum is positive.
    ``best_e`` holds the last abscissa tried; ``vanishing`` is True when
    phi stayed positive all the way down, i.e. the root collapses to 0
    and the supremum of E is at most ~0.
    """

    def __init__(self, message, best_e, vanishing=False):
        super().__init__(message)
        self.best_e = best_e
        self.vanishing = vanishing


class NegativeDiscriminant(RuntimeError):
    """The closed-form quadratic has no real root; fall back to the
    generic solver."""


@dataclass(frozen=True)
class Relaxation:
    """Affine global underestimator f(z) >= gamma + <h, z>."""

    gamma: float
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float).ravel()
        if not (np.isfinite(self.gamma) and np.all(np.isfinite(h))):
            raise ValueError("relaxation parameters must be finite")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class SubproblemSolution:
    """Maximizer u in C, value e > 0, and KKT multiplier mu (0 for
    simple domains)."""

    u: np.ndarray
    e: float
    mu: float = 0.0


def eval_prox(q0: float, x: np.ndarray) -> float:
    """Q(x) = 0.5*||x||^2 + q0; requires q0 > 0."""
    return 0.5 * float(x @ x) + q0


def prox_gradient(x: np.ndarray) -> np.ndarray:
    return x


def eval_E(rel: Relaxation, q0: float, x: np.ndarray) -> float:
    return -(rel.gamma + float(rel.h @ x)) / eval_prox(q0, x)


def u_hat(e: float, rel: Relaxation, domain) -> np.ndarray:
    return project(domain, -rel.h / e)


def phi(e: float, rel: Relaxation, domain, q0: float) -> float:
    """phi(e) = e*Q(u(e)) + gamma + <h, u(e)> with u(e) = P_C(-h/e)."""
    u = u_hat(e, rel, domain)
    return e * eval_prox(q0, u) + rel.gamma + float(rel.h @ u)


def _root_tol(rel: Relaxation) -> float:
    return PHI_TOL * max(1.0, abs(rel.gamma))


def solve_generic(rel: Relaxation, domain, q0: float) -> SubproblemSolution:
    """Root-find phi(e) = 0 via bracketing plus Brent refinement.

    Starts from e0 = max(eps, E(P_C(0))) when that value is positive, else
    1, and expands/shrinks geometrically until phi changes sign.  Raises
    :class:`BracketingFailure` when no sign change is found.
    """
    p0 = project(domain, np.zeros_like(rel.h))
    e0 = eval_E(rel, q0, p0)
    e = max(1e-12, e0) if e0 > 0 else 1.0

    f = phi(e, rel, domain, q0)
    tol = _root_tol(rel)
    if abs(f) <= tol:
        return SubproblemSolution(u_hat(e, rel, domain), e)

    # phi is increasing: walk up while negative, down while positive.
    if f < 0:
        lo, flo = e, f
        hi = e
        for _ in range(_BRACKET_STEPS):
            hi *= _BRACKET_FACTOR
            fhi = phi(hi, rel, domain, q0)
            if fhi >= 0:
                break
            lo, flo = hi, fhi
        else:
            raise BracketingFailure("phi stayed negative during expansion", hi)
    else:
        hi, fhi = e, f
        lo = e
        for _ in range(_BRACKET_STEPS):
            lo /= _BRACKET_FACTOR
            flo = phi(lo, rel, domain, q0)
            if flo <= 0:
                break
            hi, fhi = lo, flo
        else:
            raise BracketingFailure(
                "phi stayed positive during shrinking", lo, vanishing=True
            )

    e = brentq(phi, lo, hi, args=(rel, domain, q0), xtol=1e-300, rtol=8.9e-16)
    return SubproblemSolution(u_hat(e, rel, domain), float(e))


def _larger_root(b1: float, b2: float, b3: float) -> float:
    disc = b2 * b2 - 4.0 * b1 * b3
    if disc < 0:
        raise NegativeDiscriminant(f"discriminant {disc} < 0")
    # b1 > 0 always (it contains Q0), so the larger root is (-b2 + sqrt)/2b1.
    return (-b2 + math.sqrt(disc)) / (2.0 * b1)


def _solve_affine_like(rel, q0, particular, null_h):
    """Shared algebra for affine sets and hyperplanes.

    ``particular`` is the minimum-norm point of C, ``null_h`` the component
    of h parallel to C's direction space; the two are orthogonal, which
    collapses phi(e)*e to a quadratic in e.
    """
    b1 = 0.5 * float(particular @ particular) + q0
    b2 = rel.gamma + float(rel.h @ particular)
    b3 = -0.5 * float(null_h @ null_h)
    e = _larger_root(b1, b2, b3)
    if not e > 0:
        raise NegativeDiscriminant(f"closed-form root {e} not positive")
    u = particular - null_h / e
    return SubproblemSolution(u, e)


def solve_closed_form(rel: Relaxation, domain, q0: float) -> SubproblemSolution:
    """Closed-form subproblem solution for affine sets, hyperplanes,
    halfspaces, the nonnegative orthant, and Euclidean balls.

    Each case reduces to the larger root of a quadratic; for halfspaces
    and balls both branch candidates are formed and validated a
    posteriori against the fixed-point identity, keeping the larger
    feasible e.  Raises :class:`NegativeDiscriminant` outside the regime
    where a positive root exists.
    """
    h = rel.h
    gamma = rel.gamma

    if isinstance(domain, Affine):
        return _solve_affine_like(
            rel, q0, domain.particular, domain.nullspace_component(h)
        )

    if isinstance(domain, Hyperplane):
        a, b = domain.a, domain.b
        na2 = float(a @ a)
        particular = (b / na2) * a
        null_h = h - (float(a @ h) / na2) * a
        return _solve_affine_like(rel, q0, particular, null_h)

    if isinstance(domain, Halfspace):
        candidates = []
        # Interior branch: projection leaves -h/e untouched.
        try:
            e1 = _larger_root(q0, gamma, -0.5 * float(h @ h))
        except NegativeDiscriminant:
            e1 = None
        if e1 is not None and e1 > 0 and float(domain.a @ (-h / e1)) <= domain.b:
            candidates.append(e1)
        # Boundary branch: projection lands on the bounding hyperplane.
        hyper = Hyperplane(domain.a, domain.b)
        try:
            sol2 = solve_closed_form(rel, hyper, q0)
        except NegativeDiscriminant:
            sol2 = None
        if sol2 is not None and float(domain.a @ (-h / sol2.e)) >= domain.b:
            candidates.append(sol2.e)
        if not candidates:
            return solve_generic(rel, domain, q0)
        e = max(candidates)
        return SubproblemSolution(u_hat(e, rel, domain), e)

    if isinstance(domain, NonNeg):
        h_neg = np.minimum(h, 0.0)
        e = _larger_root(q0, gamma, -0.5 * float(h_neg @ h_neg))
        if not e > 0:
            raise NegativeDiscriminant(f"closed-form root {e} not positive")
        return SubproblemSolution(-h_neg / e, e)

    if isinstance(domain, L2Ball):
        xi = domain.xi
        nh = float(np.linalg.norm(h))
        if nh == 0.0:
            e = _larger_root(q0, gamma, 0.0)
            if not e > 0:
                raise NegativeDiscriminant("no positive root with h = 0")
            return SubproblemSolution(np.zeros_like(h), e)
        candidates = []
        try:
            e_int = _larger_root(q0, gamma, -0.5 * nh * nh)
        except NegativeDiscriminant:
            e_int = None
        if e_int is not None and e_int > 0 and nh <= e_int * xi:
            candidates.append((e_int, -h / e_int))
        e_bnd = 2.0 * (xi * nh - gamma) / (xi * xi + 2.0 * q0)
        if e_bnd > 0 and nh >= e_bnd * xi:
            candidates.append((e_bnd, -(xi / nh) * h))
        if not candidates:
            return solve_generic(rel, domain, q0)
        e, u = max(candidates, key=lambda t: t[0])
        return SubproblemSolution(u, e)

    raise TypeError(f"no closed form for domain type {type(domain)!r}")


_CLOSED_FORM_TYPES = (Affine, Hyperplane, Halfspace, NonNeg, L2Ball)


def solve(rel: Relaxation, domain, q0: float) -> SubproblemSolution:
    """Dispatch: closed form where available, generic root-finding
    otherwise, falling back to generic on closed-form failure."""
    if isinstance(domain, _CLOSED_FORM_TYPES):
        try:
            return solve_closed_form(rel, domain, q0)
        except NegativeDiscriminant:
            return solve_generic(rel, domain, q0)
    if isinstance(domain, GroupL12Ball):
        return solve_functional_group_l12(rel, domain.groups, domain.xi, q0)
    return solve_generic(rel, domain, q0)


def solve_functional_l2(rel: Relaxation, xi: float, q0: float) -> SubproblemSolution:
    """KKT solution for the constraint ||x||_2 <= xi.

    Interior branch u = -h/e with mu = 0; boundary branch places u on the
    sphere antiparallel to h with multiplier
    mu = (||h|| - e*xi) / (0.5*xi^2 + q0) > 0.
    """
    sol = solve_closed_form(rel, L2Ball(xi), q0)
    nh = float(np.linalg.norm(rel.h))
    qu = eval_prox(q0, sol.u)
    mu = max((nh - sol.e * xi) / qu, 0.0)
    if np.linalg.norm(sol.u) < xi * (1.0 - 1e-12):
        mu = 0.0
    return SubproblemSolution(sol.u, sol.e, mu)


def solve_functional_group_l12(
    rel: Relaxation, groups, xi: float, q0: float
) -> SubproblemSolution:
    """KKT solution for the group-norm constraint sum_i ||x_{g_i}||_2 <= xi.

    Nested scalar solves: the outer root-find is on e, the inner shrink
    threshold comes from the sort-and-scan projection of the per-group
    norms.  The multiplier follows from mu = e * theta / Q(u), where theta
    is the amount each active group norm was shrunk.
    """
    ball = groups if isinstance(groups, GroupL12Ball) else GroupL12Ball(tuple(groups), xi)
    sol = solve_generic(rel, ball, q0)
    theta = ball.shrink_threshold(-rel.h / sol.e)
    mu = sol.e * theta / eval_prox(q0, sol.u)
    return SubproblemSolution(sol.u, sol.e, mu)


@dataclass(frozen=True)
class NormSubdifferential:
    """Subdifferential of a norm at a point.

    ``element`` is the minimal-norm member; when ``exact`` the set is the
    singleton {element}, otherwise the zero blocks range over the unit
    dual ball.
    """

    element: np.ndarray
    exact: bool


def subdifferential_norm(x, groups=None) -> NormSubdifferential:
    """Subdifferential of ||.||_2 (groups=None) or of the group l_{1,2}
    norm for the given index partition."""
    x = np.asarray(x, dtype=float).ravel()
    if groups is None:
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            return NormSubdifferential(np.zeros_like(x), exact=False)
        return NormSubdifferential(x / nrm, exact=True)
    g_out = np.zeros_like(x)
    exact = True
    for g in groups:
        g = np.asarray(g, dtype=int)
        nrm = np.linalg.norm(x[g])
        if nrm == 0.0:
            exact = False
        else:
            g_out[g] = x[g] / nrm
    return NormSubdifferential(g_out, exact=exact)
