"""Feasible-set descriptors and their Euclidean projections.

Each domain is an immutable descriptor of a closed convex set C together
with its orthogonal projection ``P_C(y) = argmin_{x in C} 0.5*||x - y||^2``.
All projections are either closed-form or use an O(n log n) sort-and-scan
threshold (l1 ball, simplex, group-l2 ball).  Domains are safe to share
across threads after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "Affine",
    "Hyperplane",
    "Halfspace",
    "Box",
    "NonNeg",
    "L2Ball",
    "LInfBall",
    "L1Ball",
    "Simplex",
    "GroupL12Ball",
    "project",
    "project_affine",
    "project_l1ball",
    "project_simplex",
    "residual",
    "l1ball_threshold",
    "simplex_threshold",
]

# Constraint-consistency tolerance used when validating an affine system.
_AFFINE_CONSISTENCY_TOL = 1e-8


class DomainError(ValueError):
    """Invalid domain parameters (inconsistent system, bad bounds, ...)."""


def _as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("vector entries must be finite")
    return x


def _check_dim(domain, y: np.ndarray) -> None:
    if domain.dim is not None and y.shape[0] != domain.dim:
        raise ValueError(
            f"dimension mismatch: domain expects {domain.dim}, got {y.shape[0]}"
        )


@dataclass(frozen=True)
class Affine:
    """The affine set {x | A x = b}.

    A pseudoinverse of ``A`` is precomputed at construction so each
    projection costs two matrix-vector products.  Raises ``DomainError``
    if ``b`` is not in the range of ``A``.
    """

    A: np.ndarray
    b: np.ndarray
    _pinv: np.ndarray = field(init=False, repr=False, compare=False)
    _particular: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = _as_vector(self.b)
        if A.shape[0] != b.shape[0]:
            raise DomainError("A and b have incompatible shapes")
        pinv = np.linalg.pinv(A)
        particular = pinv @ b
        if np.linalg.norm(A @ particular - b) > _AFFINE_CONSISTENCY_TOL * max(
            1.0, float(np.linalg.norm(b))
        ):
            raise DomainError("inconsistent affine system: b not in range(A)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_pinv", pinv)
        object.__setattr__(self, "_particular", particular)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def particular(self) -> np.ndarray:
        """The minimum-norm solution of A x = b (lies in range(A^T))."""
        return self._particular

    def nullspace_component(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``v`` onto null(A)."""
        return v - self._pinv @ (self.A @ v)

    def project(self, y: np.ndarray) -> np.ndarray:
        return y - self._pinv @ (self.A @ y - self.b)


@dataclass(frozen=True)
class Hyperplane:
    """{x | <a, x> = b} with a != 0."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = _as_vector(self.a)
        if not np.any(a):
            raise DomainError("hyperplane normal must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def project(self, y: np.ndarray) -> np.ndarray:
        a = self.a
        return y - ((a @ y - self.b) / (a @ a)) * a


@dataclass(frozen=True)
class Halfspace:
    """{x | <a, x> <= b} with a != 0."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = _as_vector(self.a)
        if not np.any(a):
            raise DomainError("halfspace normal must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def project(self, y: np.ndarray) -> np.ndarray:
        a = self.a
        excess = a @ y - self.b
        if excess <= 0.0:
            return y.copy()
        return y - (excess / (a @ a)) * a


@dataclass(frozen=True)
class Box:
    """{x | lo <= x <= hi} elementwise; lo == hi on a coordinate is allowed."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _as_vector(self.lo)
        hi = _as_vector(self.hi)
        if lo.shape != hi.shape:
            raise DomainError("box bounds have different shapes")
        if np.any(lo > hi):
            raise DomainError("box requires lo <= hi elementwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def project(self, y: np.ndarray) -> np.ndarray:
        return np.clip(y, self.lo, self.hi)


@dataclass(frozen=True)
class NonNeg:
    """The nonnegative orthant {x | x >= 0} (any dimension)."""

    @property
    def dim(self):
        return None

    def project(self, y: np.ndarray) -> np.ndarray:
        return np.maximum(y, 0.0)


@dataclass(frozen=True)
class L2Ball:
    """{x | ||x||_2 <= xi} with xi > 0."""

    xi: float

    def __post_init__(self):
        if not self.xi > 0:
            raise DomainError("ball radius must be positive")
        object.__setattr__(self, "xi", float(self.xi))

    @property
    def dim(self):
        return None

    def project(self, y: np.ndarray) -> np.ndarray:
        nrm = np.linalg.norm(y)
        if nrm <= self.xi:
            return y.copy()
        return (self.xi / nrm) * y


@dataclass(frozen=True)
class LInfBall:
    """{x | ||x||_inf <= xi} with xi > 0."""

    xi: float

    def __post_init__(self):
        if not self.xi > 0:
            raise DomainError("ball radius must be positive")
        object.__setattr__(self, "xi", float(self.xi))

    @property
    def dim(self):
        return None

    def project(self, y: np.ndarray) -> np.ndarray:
        return np.clip(y, -self.xi, self.xi)


def l1ball_threshold(absy: np.ndarray, xi: float) -> float:
    """Soft threshold theta so that sum(max(|y| - theta, 0)) == xi.

    Assumes ``sum(absy) > xi``.  Sort-and-scan, O(n log n).
    """
    s = np.sort(absy)[::-1]
    cumsum = np.cumsum(s)
    k = np.arange(1, s.shape[0] + 1)
    cand = (cumsum - xi) / k
    rho = np.nonzero(s > cand)[0][-1]
    return float(cand[rho])


def simplex_threshold(y: np.ndarray, xi: float) -> float:
    """Threshold theta so that sum(max(y - theta, 0)) == xi."""
    s = np.sort(y)[::-1]
    cumsum = np.cumsum(s)
    k = np.arange(1, s.shape[0] + 1)
    cand = (cumsum - xi) / k
    rho = np.nonzero(s > cand)[0][-1]
    return float(cand[rho])


@dataclass(frozen=True)
class L1Ball:
    """{x | ||x||_1 <= xi} with xi > 0; sort-and-scan projection."""

    xi: float

    def __post_init__(self):
        if not self.xi > 0:
            raise DomainError("ball radius must be positive")
        object.__setattr__(self, "xi", float(self.xi))

    @property
    def dim(self):
        return None

    def project(self, y: np.ndarray) -> np.ndarray:
        absy = np.abs(y)
        if absy.sum() <= self.xi:
            return y.copy()
        theta = l1ball_threshold(absy, self.xi)
        return np.sign(y) * np.maximum(absy - theta, 0.0)


@dataclass(frozen=True)
class Simplex:
    """{x | x >= 0, sum(x) = xi} with xi > 0."""

    xi: float

    def __post_init__(self):
        if not self.xi > 0:
            raise DomainError("simplex scale must be positive")
        object.__setattr__(self, "xi", float(self.xi))

    @property
    def dim(self):
        return None

    def project(self, y: np.ndarray) -> np.ndarray:
        theta = simplex_threshold(y, self.xi)
        return np.maximum(y - theta, 0.0)


@dataclass(frozen=True)
class GroupL12Ball:
    """{x | sum_i ||x_{g_i}||_2 <= xi} for a partition g_1,...,g_m of indices.

    Projection shrinks the vector of per-group norms onto the l1 ball and
    rescales each group accordingly.
    """

    groups: tuple
    xi: float

    def __post_init__(self):
        groups = tuple(np.asarray(g, dtype=int) for g in self.groups)
        if not groups:
            raise DomainError("at least one group required")
        all_idx = np.concatenate(groups)
        n = all_idx.shape[0]
        if np.unique(all_idx).shape[0] != n or all_idx.min() != 0 or all_idx.max() != n - 1:
            raise DomainError("groups must form a disjoint cover of 0..n-1")
        if not self.xi > 0:
            raise DomainError("ball radius must be positive")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "_dim", n)

    @property
    def dim(self) -> int:
        return self._dim

    def group_norms(self, y: np.ndarray) -> np.ndarray:
        return np.array([np.linalg.norm(y[g]) for g in self.groups])

    def shrink_threshold(self, y: np.ndarray) -> float:
        """Amount theta by which every active group norm shrinks; 0 inside."""
        w = self.group_norms(y)
        if w.sum() <= self.xi:
            return 0.0
        return l1ball_threshold(w, self.xi)

    def project(self, y: np.ndarray) -> np.ndarray:
        w = self.group_norms(y)
        if w.sum() <= self.xi:
            return y.copy()
        theta = l1ball_threshold(w, self.xi)
        out = np.zeros_like(y)
        for g, wg in zip(self.groups, w):
            if wg > theta:
                out[g] = y[g] * ((wg - theta) / wg)
        return out


def project(domain, y) -> np.ndarray:
    """Orthogonal projection of ``y`` onto ``domain``."""
    y = _as_vector(y)
    _check_dim(domain, y)
    return domain.project(y)


def project_affine(A, b, y) -> np.ndarray:
    """One-shot projection onto {x | A x = b}.

    Prefer constructing an :class:`Affine` domain when projecting many
    points against the same system; this helper refactorizes per call.
    """
    return Affine(A, b).project(_as_vector(y))


def project_l1ball(xi: float, y) -> np.ndarray:
    return L1Ball(xi).project(_as_vector(y))


def project_simplex(xi: float, y) -> np.ndarray:
    return Simplex(xi).project(_as_vector(y))


def residual(domain, x: np.ndarray) -> float:
    """Constraint violation of ``x`` (0 when x is feasible)."""
    x = np.asarray(x, dtype=float)
    if isinstance(domain, Affine):
        return float(np.linalg.norm(domain.A @ x - domain.b))
    if isinstance(domain, Hyperplane):
        return float(abs(domain.a @ x - domain.b))
    if isinstance(domain, Halfspace):
        return float(max(domain.a @ x - domain.b, 0.0))
    if isinstance(domain, Box):
        return float(
            max(np.max(domain.lo - x, initial=0.0), np.max(x - domain.hi, initial=0.0))
        )
    if isinstance(domain, NonNeg):
        return float(max(-x.min(initial=0.0), 0.0))
    if isinstance(domain, L2Ball):
        return float(max(np.linalg.norm(x) - domain.xi, 0.0))
    if isinstance(domain, LInfBall):
        return float(max(np.max(np.abs(x)) - domain.xi, 0.0))
    if isinstance(domain, L1Ball):
        return float(max(np.abs(x).sum() - domain.xi, 0.0))
    if isinstance(domain, Simplex):
        return float(
            max(abs(x.sum() - domain.xi), max(-x.min(initial=0.0), 0.0))
        )
    if isinstance(domain, GroupL12Ball):
        return float(max(domain.group_norms(x).sum() - domain.xi, 0.0))
    raise TypeError(f"unknown domain type {type(domain)!r}")
