"""Bhattacharyya coefficient and distance.

Covers discrete (multinomial) populations, arbitrary 1-D densities by quadrature,
the univariate and multivariate normal closed forms, and the discrete
M-population coefficient.  The continuous M-population integral is not provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, NonPositiveVariance, NotPositiveDefinite
from .numerics import GaussianSummary, cholesky, quadrature

__all__ = [
    "Divergence",
    "GaussianSummary",
    "as_distribution",
    "bc_discrete",
    "bc_continuous",
    "bc_normal_1d",
    "bc_normal_mv",
    "bc_multi_population",
    "bhattacharyya_mvn",
]


@dataclass(frozen=True)
class Divergence:
    """Coefficient ``rho`` in [0, 1] and distance ``-ln rho`` (``inf`` when rho == 0)."""

    coefficient: float
    distance: float

    @classmethod
    def from_coefficient(cls, rho: float) -> "Divergence":
        rho = min(max(float(rho), 0.0), 1.0)
        return cls(rho, math.inf if rho == 0.0 else -math.log(rho))

    @classmethod
    def from_distance(cls, distance: float) -> "Divergence":
        distance = max(float(distance), 0.0)
        return cls(math.exp(-distance), distance)

    @property
    def angle(self) -> float:
        """Angle between the square-root probability vectors; rho = cos(angle)."""
        return math.acos(self.coefficient)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.distance)


def as_distribution(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DimensionMismatch("a discrete distribution is a non-empty vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    if abs(math.fsum(p) - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {math.fsum(p)!r}, not 1")
    return p


def bc_discrete(a, b) -> Divergence:
    a, b = as_distribution(a), as_distribution(b)
    if a.size != b.size:
        raise DimensionMismatch(f"category counts differ: {a.size} vs {b.size}")
    return Divergence.from_coefficient(np.sum(np.sqrt(a * b)))


def bc_continuous(pdf_a: Callable[[float], float], pdf_b: Callable[[float], float],
                  support: tuple[float, float], tol: float = 1e-10,
                  check_normalized: bool = True) -> Divergence:
    """Coefficient as the integral of sqrt(pdf_a * pdf_b) over ``support``."""
    lo, hi = support
    if check_normalized:
        for name, pdf in (("pdf_a", pdf_a), ("pdf_b", pdf_b)):
            mass = quadrature(pdf, lo, hi, tol)
            if abs(mass - 1.0) > 1e-6:
                raise ValueError(f"{name} integrates to {mass:.9g} on the support, not 1")

    def overlap(x):
        return math.sqrt(max(pdf_a(x), 0.0) * max(pdf_b(x), 0.0))

    return Divergence.from_coefficient(quadrature(overlap, lo, hi, tol))


def bc_normal_1d(p: tuple[float, float], q: tuple[float, float]) -> Divergence:
    """Closed form for two univariate normals given as ``(mean, variance)``."""
    mu_p, var_p = p
    mu_q, var_q = q
    if not (var_p > 0 and var_q > 0):
        raise NonPositiveVariance(f"variances must be positive, got {var_p}, {var_q}")
    shape = 0.25 * math.log(0.25 * (var_p / var_q + var_q / var_p + 2.0))
    location = 0.25 * (mu_p - mu_q) ** 2 / (var_p + var_q)
    return Divergence.from_distance(shape + location)


def bhattacharyya_mvn(mean1, cov1, mean2, cov2) -> np.ndarray:
    """Multivariate normal distance, broadcasting over leading (batch) axes.

    ``mean*`` have shape ``(..., m)`` and ``cov*`` shape ``(..., m, m)``.
    """
    mean1, mean2 = np.asarray(mean1, float), np.asarray(mean2, float)
    cov1, cov2 = np.asarray(cov1, float), np.asarray(cov2, float)
    pooled = 0.5 * (cov1 + cov2)
    chol = cholesky(pooled)
    half_logdet = np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
    half_logdet1 = np.sum(np.log(np.diagonal(cholesky(cov1), axis1=-2, axis2=-1)), axis=-1)
    half_logdet2 = np.sum(np.log(np.diagonal(cholesky(cov2), axis1=-2, axis2=-1)), axis=-1)
    diff = mean1 - mean2
    # diff' pooled^-1 diff = |L^-1 diff|^2
    white = np.linalg.solve(chol, np.broadcast_to(diff, chol.shape[:-1])[..., None])[..., 0]
    mahalanobis = np.sum(white * white, axis=-1)
    dist = mahalanobis / 8.0 + half_logdet - 0.5 * (half_logdet1 + half_logdet2)
    return np.maximum(dist, 0.0)


def bc_normal_mv(p1: GaussianSummary, p2: GaussianSummary) -> Divergence:
    """Closed form for two multivariate normals; pooled covariance (S1 + S2) / 2."""
    if p1.dim != p2.dim:
        raise DimensionMismatch(f"dimensions differ: {p1.dim} vs {p2.dim}")
    dist = float(bhattacharyya_mvn(p1.mean, p1.cov, p2.mean, p2.cov))
    if not math.isfinite(dist):
        raise NotPositiveDefinite("covariance produced a non-finite distance")
    return Divergence.from_distance(dist)


def bc_multi_population(distributions: Sequence) -> float:
    """Coefficient of M discrete populations: sum_j (prod_i p_ij)^(1/M)."""
    if len(distributions) < 2:
        raise ValueError("need at least two populations")
    rows = [as_distribution(d) for d in distributions]
    if len({r.size for r in rows}) != 1:
        raise DimensionMismatch("populations have different category counts")
    stacked = np.vstack(rows)
    m = stacked.shape[0]
    if m == 2:
        terms = np.sqrt(stacked[0] * stacked[1])
    else:
        terms = np.prod(stacked, axis=0) ** (1.0 / m)
    return min(float(np.sum(terms)), 1.0)
