"""Objectives, linear operators, total-variation regularizers, and
seedable instance generators for the benchmark families.

Images are 2-D float arrays with values in [0, 1]; solvers see them as
flattened row-major vectors.  All generators are pure functions of their
seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .domains import Affine, L2Ball, NonNeg

__all__ = [
    "DenseMatrix",
    "Convolution2D",
    "CompositeObjective",
    "itv",
    "atv",
    "tv_subgradient",
    "uniform_kernel",
    "gaussian_kernel",
    "phantom",
    "RidgeInstance",
    "DeblurInstance",
    "BasisPursuitInstance",
    "gen_ridge",
    "gen_deblur",
    "gen_basis_pursuit",
]


class DenseMatrix:
    """Linear operator backed by a dense matrix."""

    def __init__(self, M):
        self.M = np.asarray(M, dtype=float)
        self.n_out, self.n_in = self.M.shape

    def forward(self, x):
        return self.M @ x

    def adjoint(self, y):
        return self.M.T @ y


class Convolution2D:
    """Periodic 2-D convolution on m x n images, applied via the FFT.

    The adjoint is correlation, i.e. convolution with the flipped kernel;
    with periodic boundary the two transfer functions are complex
    conjugates, so adjoint consistency is exact up to FFT rounding.
    """

    def __init__(self, kernel, image_shape):
        kernel = np.asarray(kernel, dtype=float)
        m, n = image_shape
        p, q = kernel.shape
        if p > m or q > n:
            raise ValueError("kernel larger than image")
        psf = np.zeros((m, n))
        psf[:p, :q] = kernel
        # Center the kernel on (0, 0) so the blur does not shift the image.
        psf = np.roll(psf, (-(p // 2), -(q // 2)), axis=(0, 1))
        self.kernel = kernel
        self.image_shape = (m, n)
        self.n_in = self.n_out = m * n
        self._transfer = np.fft.fft2(psf)

    def _apply(self, x, transfer):
        X = np.asarray(x, dtype=float).reshape(self.image_shape)
        out = np.fft.ifft2(np.fft.fft2(X) * transfer).real
        return out.ravel()

    def forward(self, x):
        return self._apply(x, self._transfer)

    def adjoint(self, y):
        return self._apply(y, np.conj(self._transfer))


def _identity_map(n):
    return DenseMatrix(np.eye(n))


def itv(x: np.ndarray) -> float:
    """Isotropic total variation of a 2-D image.

    Interior terms sqrt(dv^2 + dh^2) over the first m-1 rows and n-1
    columns, plus absolute differences down the last column and along the
    last row.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a 2-D image")
    m, n = x.shape
    dv = x[1:, :] - x[:-1, :]  # (m-1, n)
    dh = x[:, 1:] - x[:, :-1]  # (m, n-1)
    interior = np.hypot(dv[:, : n - 1], dh[: m - 1, :])
    terms = np.concatenate(
        [interior.ravel(), np.abs(dv[:, n - 1]), np.abs(dh[m - 1, :])]
    )
    return float(np.sum(terms))


def atv(x: np.ndarray) -> float:
    """Anisotropic total variation: |dv| + |dh| interior terms plus the
    same boundary sums as :func:`itv`."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a 2-D image")
    m, n = x.shape
    dv = x[1:, :] - x[:-1, :]
    dh = x[:, 1:] - x[:, :-1]
    interior = np.abs(dv[:, : n - 1]) + np.abs(dh[: m - 1, :])
    terms = np.concatenate(
        [interior.ravel(), np.abs(dv[:, n - 1]), np.abs(dh[m - 1, :])]
    )
    return float(np.sum(terms))


def tv_subgradient(x: np.ndarray, kind: str) -> np.ndarray:
    """A subgradient of itv/atv at ``x`` (2-D in, 2-D out).

    Zero-difference terms contribute the zero element of their
    subdifferential, so the result is finite everywhere.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a 2-D image")
    m, n = x.shape
    g = np.zeros_like(x)
    a = x[1:m, : n - 1] - x[: m - 1, : n - 1]  # vertical interior diffs
    b = x[: m - 1, 1:n] - x[: m - 1, : n - 1]  # horizontal interior diffs
    if kind == "itv":
        r = np.hypot(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            ga = np.where(r > 0, a / np.where(r > 0, r, 1.0), 0.0)
            gb = np.where(r > 0, b / np.where(r > 0, r, 1.0), 0.0)
    elif kind == "atv":
        ga = np.sign(a)
        gb = np.sign(b)
    else:
        raise ValueError(f"unknown TV kind {kind!r}")
    g[1:m, : n - 1] += ga
    g[: m - 1, : n - 1] -= ga + gb
    g[: m - 1, 1:n] += gb
    # Last column / last row absolute differences (shared by both kinds).
    dcol = x[1:m, n - 1] - x[: m - 1, n - 1]
    s = np.sign(dcol)
    g[1:m, n - 1] += s
    g[: m - 1, n - 1] -= s
    drow = x[m - 1, 1:n] - x[m - 1, : n - 1]
    s = np.sign(drow)
    g[m - 1, 1:n] += s
    g[m - 1, : n - 1] -= s
    return g


@dataclass
class CompositeObjective:
    """data(A x - b) + lam * reg(x) with subgradients.

    data: 'l22' (0.5*||r||^2) or 'l1' (||r||_1, sign(0) = 0).
    reg: 'none', 'l22', 'l1', 'itv', or 'atv'; the TV kinds need
    ``image_shape``.  Calling the instance returns (f, g).
    """

    A: object
    b: np.ndarray
    data: str = "l22"
    reg: str = "none"
    lam: float = 0.0
    image_shape: Optional[tuple] = None
    f_min: Optional[float] = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.data not in ("l22", "l1"):
            raise ValueError(f"unknown data term {self.data!r}")
        if self.reg not in ("none", "l22", "l1", "itv", "atv"):
            raise ValueError(f"unknown regularizer {self.reg!r}")
        if self.reg in ("itv", "atv") and self.image_shape is None:
            raise ValueError("TV regularizers require image_shape")

    def _data_term(self, x):
        r = self.A.forward(x) - self.b
        if self.data == "l22":
            return 0.5 * float(r @ r), self.A.adjoint(r)
        return float(np.abs(r).sum()), self.A.adjoint(np.sign(r))

    def _reg_term(self, x):
        if self.reg == "none" or self.lam == 0.0:
            return 0.0, np.zeros_like(x)
        if self.reg == "l22":
            return float(x @ x), 2.0 * x
        if self.reg == "l1":
            return float(np.abs(x).sum()), np.sign(x)
        X = x.reshape(self.image_shape)
        if self.reg == "itv":
            return itv(X), tv_subgradient(X, "itv").ravel()
        return atv(X), tv_subgradient(X, "atv").ravel()

    def __call__(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.A.n_in:
            raise ValueError(
                f"dimension mismatch: operator expects {self.A.n_in}, got {x.shape[0]}"
            )
        f_d, g_d = self._data_term(x)
        f_r, g_r = self._reg_term(x)
        return f_d + self.lam * f_r, g_d + self.lam * g_r


def uniform_kernel(size: int = 9) -> np.ndarray:
    return np.full((size, size), 1.0 / (size * size))


def gaussian_kernel(size: int = 7, sigma: float = 5.0) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-(r**2) / (2.0 * sigma**2))
    k = np.outer(w, w)
    return k / k.sum()


def phantom(m: int = 64, n: int = 64) -> np.ndarray:
    """Deterministic piecewise-smooth test image in [0, 1]: a background
    ramp, two rectangles, and a disc."""
    ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    img = 0.2 + 0.3 * jj / max(n - 1, 1)
    img[m // 8 : m // 2, n // 8 : n // 3] = 0.9
    img[m // 2 : 7 * m // 8, n // 2 : 3 * n // 4] = 0.05
    disc = (ii - 0.3 * m) ** 2 + (jj - 0.7 * n) ** 2 <= (0.15 * min(m, n)) ** 2
    img[disc] = 0.7
    return np.clip(img, 0.0, 1.0)


@dataclass
class RidgeInstance:
    A: DenseMatrix
    y: np.ndarray
    x_true: np.ndarray
    domain: L2Ball


@dataclass
class DeblurInstance:
    A: Convolution2D
    y: np.ndarray  # observed image, 2-D
    x_true: np.ndarray  # true image, 2-D


@dataclass
class BasisPursuitInstance:
    A: DenseMatrix
    y: np.ndarray
    x_true: np.ndarray
    domain: Affine


def gen_ridge(
    n: int,
    cond: float,
    noise: float,
    seed: int,
    xi: float = 10.0,
    x_norm: float = 15.0,
) -> RidgeInstance:
    """Seedable ill-conditioned least-squares instance.

    A = U diag(s) V^T with geometric singular-value decay from 1 down to
    1/cond and random orthogonal factors; observations are
    y = A x_true + noise * uniform[0,1).
    """
    if n < 2 or cond < 1:
        raise ValueError("need n >= 2 and cond >= 1")
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = cond ** (-np.arange(n) / (n - 1))
    M = (U * s) @ V.T
    x_true = rng.standard_normal(n)
    x_true *= x_norm / np.linalg.norm(x_true)
    y = M @ x_true + noise * rng.random(n)
    return RidgeInstance(DenseMatrix(M), y, x_true, L2Ball(xi))


def gen_deblur(
    image: np.ndarray,
    blur: str,
    noise: str,
    noise_level: float,
    seed: int,
) -> DeblurInstance:
    """Blur an image and corrupt it with noise.

    blur: 'uniform9' (9x9 averaging) or 'gaussian7' (7x7, sigma 5).
    noise: 'gaussian' (additive, std = noise_level) or 'salt_pepper'
    (round(noise_level * mn) pixels forced to 0 or 1 with equal
    probability).  The observation is clipped to [0, 1].
    """
    x_true = np.asarray(image, dtype=float)
    if x_true.min() < 0 or x_true.max() > 1:
        raise ValueError("pixel values must lie in [0, 1]")
    if blur == "uniform9":
        kernel = uniform_kernel(9)
    elif blur == "gaussian7":
        kernel = gaussian_kernel(7, 5.0)
    elif blur == "delta":
        kernel = np.ones((1, 1))
    else:
        raise ValueError(f"unknown blur {blur!r}")
    A = Convolution2D(kernel, x_true.shape)
    blurred = A.forward(x_true.ravel()).reshape(x_true.shape)
    rng = np.random.default_rng(seed)
    if noise == "gaussian":
        y = blurred + noise_level * rng.standard_normal(x_true.shape)
    elif noise == "salt_pepper":
        m, n = x_true.shape
        k = int(round(noise_level * m * n))
        flat = blurred.ravel().copy()
        idx = rng.choice(m * n, size=k, replace=False)
        flat[idx] = rng.integers(0, 2, size=k).astype(float)
        y = flat.reshape(x_true.shape)
    else:
        raise ValueError(f"unknown noise model {noise!r}")
    return DeblurInstance(A, np.clip(y, 0.0, 1.0), x_true)


def gen_basis_pursuit(m: int, n: int, k: int, seed: int) -> BasisPursuitInstance:
    """Gaussian sensing matrix, k-sparse ground truth, exact data."""
    if not m < n:
        raise ValueError("need m < n")
    if k < 0 or 3 * k > m:
        raise ValueError("sparsity k must satisfy 0 <= 3k <= m")
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((m, n))
    x_true = np.zeros(n)
    if k > 0:
        support = rng.choice(n, size=k, replace=False)
        x_true[support] = rng.standard_normal(k)
    y = M @ x_true
    return BasisPursuitInstance(DenseMatrix(M), y, x_true, Affine(M, y))
