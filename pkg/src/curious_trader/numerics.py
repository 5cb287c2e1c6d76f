"""Numerical substrate: counter-based RNG, SPD algebra, adaptive quadrature, sample summaries.

Random numbers come from a SplitMix64 counter generator: the i-th 64-bit word of
stream ``seed`` is ``mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)`` with the
published SplitMix64 finalizer constants.  Because every word is a pure function
of ``(seed, i)``, the uniform stream is bit-identical on every platform and can be
jumped to any position.  Standard normals use the Box-Muller transform on
consecutive uniform pairs.

Matrices are plain 2-D ``numpy`` arrays (row-major, at most 64x64 by convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NonConvergence, NotPositiveDefinite, TooFewSamples

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_TWO_PI = 2.0 * math.pi

MAX_DIM = 64


def _splitmix64(seed: int, start: int, n: int) -> np.ndarray:
    idx = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + idx * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class Rng:
    """Single-owner random stream positioned at ``(seed, counter)``.

    Two instances built from the same ``(seed, counter)`` emit identical output.
    Draws advance ``counter`` by the number of 64-bit words consumed.
    """

    def __init__(self, seed: int, counter: int = 0):
        if seed < 0 or counter < 0:
            raise ValueError("seed and counter must be unsigned")
        self.seed = int(seed) & _MASK64
        self.counter = int(counter)

    @property
    def state(self) -> tuple[int, int]:
        return self.seed, self.counter

    def words(self, n: int) -> np.ndarray:
        out = _splitmix64(self.seed, self.counter, n)
        self.counter += n
        return out

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles on [0, 1) built from the top 53 bits of each word."""
        return (self.words(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        return gaussian_sample(self, n)

    def __repr__(self):
        return f"Rng(seed={self.seed}, counter={self.counter})"


def gaussian_sample(rng: Rng, n: int) -> np.ndarray:
    """Draw ``n`` standard normals by Box-Muller.

    Consumes ``2 * ceil(n / 2)`` words; with an odd ``n`` the last sine branch
    is discarded so the stream position stays pair-aligned.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    pairs = (n + 1) // 2
    u = rng.uniform(2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u is in (0, 1]
    angle = _TWO_PI * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = radius * np.cos(angle)
    z[:, 1] = radius * np.sin(angle)
    return z.reshape(-1)[:n]


# --------------------------------------------------------------------------- algebra


def _check_square_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionMismatch(f"expected square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - np.swapaxes(m, -1, -2)), initial=0.0) > 1e-10 * scale:
        raise NotPositiveDefinite("matrix is not symmetric")
    return m


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == m``; stacks of matrices are accepted."""
    m = _check_square_symmetric(m)
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("non-positive pivot in Cholesky factorization") from exc


def log_det(m: np.ndarray) -> np.ndarray | float:
    """Log-determinant of an SPD matrix (or stack) through its Cholesky factor."""
    chol = cholesky(m)
    out = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def solve(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Solve ``m @ x = v`` for SPD ``m`` via two triangular solves."""
    chol = cholesky(m)
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != chol.shape[-1]:
        raise DimensionMismatch(f"rhs length {v.shape[-1]} != matrix size {chol.shape[-1]}")
    y = np.linalg.solve(chol, v[..., None])
    return np.linalg.solve(np.swapaxes(chol, -1, -2), y)[..., 0]


# ------------------------------------------------------------------------ quadrature

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 points, ascending
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.array([f(mid + half * x) for x in _NODES], dtype=float)
    if not np.all(np.isfinite(fx)):
        raise NonConvergence(f"integrand is not finite on [{a}, {b}]")
    kronrod = half * float(_KRONROD @ fx)
    gauss = half * float(_GAUSS @ fx)
    return kronrod, abs(kronrod - gauss)


def quadrature(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
               max_depth: int = 50) -> float:
    """Adaptive Gauss-Kronrod (7/15) integral of ``f`` over ``[a, b]``.

    Intervals are bisected until each one's Kronrod-Gauss error estimate is below
    its width-proportional share of ``tol``.  Raises ``NonConvergence`` if an
    interval still fails after ``max_depth`` bisections.
    """
    if not a < b:
        raise ValueError("quadrature needs a < b")
    if tol <= 0:
        raise ValueError("tol must be positive")
    width = b - a
    total = 0.0
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        value, err = _gk15(f, lo, hi)
        share = tol * (hi - lo) / width
        if err <= share or err <= 50.0 * np.finfo(float).eps * abs(value):
            total += value
            continue
        if depth >= max_depth:
            raise NonConvergence(f"no convergence on [{lo}, {hi}] after {max_depth} bisections")
        mid = 0.5 * (lo + hi)
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    return total


# ------------------------------------------------------------------- sample summaries


@dataclass(frozen=True, eq=False)
class GaussianSummary:
    """Mean vector and SPD covariance fitted to ``n`` observations of ``m`` variables."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"cov shape {cov.shape} does not match mean of size {mean.size}")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def __eq__(self, other):
        if not isinstance(other, GaussianSummary):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.cov, other.cov)

    def __hash__(self):
        return hash((self.mean.tobytes(), self.cov.tobytes()))


def regularization(cov: np.ndarray) -> float:
    """Ridge added to a covariance: ``max(1e-8, 1e-10 * trace / m)``."""
    cov = np.atleast_2d(cov)
    return max(1e-8, 1e-10 * float(np.trace(cov)) / cov.shape[0])


def fit_gaussian_summary(samples) -> GaussianSummary:
    """Sample mean and ridge-regularized unbiased covariance of an ``n x m`` sample.

    A 1-D input is read as ``n`` observations of a single variable.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionMismatch("samples must be a vector or an n x m matrix")
    n, m = x.shape
    if n < 2:
        raise TooFewSamples(f"need at least 2 observations, got {n}")
    if m > MAX_DIM:
        raise DimensionMismatch(f"{m} variables exceeds the {MAX_DIM}-dimension limit")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    cov = 0.5 * (cov + cov.T)
    cov = cov + regularization(cov) * np.eye(m)
    return GaussianSummary(mean, cov)
