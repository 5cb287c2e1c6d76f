"""Johnson-Lindenstrauss random projections.

A map sends ``x`` in R^d to ``A x / sqrt(k)`` where ``A`` is ``k x d`` with i.i.d.
standard normal entries drawn from ``Rng(seed)``.  ``k`` comes from the
bound ``k >= 4 ln(n) / (eps^2/2 - eps^3/3)``.  At desk scale that
bound often exceeds ``d``; the projection is applied anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .divergence import Divergence, bhattacharyya_mvn
from .errors import AttemptsExhausted, DimensionMismatch, InvalidEpsilon, TooFewPoints
from .numerics import GaussianSummary, Rng, gaussian_sample

DEFAULT_MAX_ATTEMPTS = 64


def _bound(epsilon: float, n: int) -> float:
    return 4.0 * math.log(n) / (epsilon**2 / 2.0 - epsilon**3 / 3.0)


def _validate(epsilon: float, n: int) -> None:
    if not 0.0 < epsilon < 1.0:
        raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 2:
        raise TooFewPoints(f"need at least 2 points, got {n}")


def jl_min_dimension(epsilon: float, n: int) -> int:
    """Smallest integer ``k`` satisfying the JL dimension bound for ``n`` points."""
    _validate(epsilon, n)
    return math.ceil(_bound(epsilon, n))


@dataclass(frozen=True)
class JlCertificate:
    epsilon: float
    n: int
    k: int
    d: int

    def __post_init__(self):
        _validate(self.epsilon, self.n)
        if self.d < 1:
            raise DimensionMismatch("source dimension must be >= 1")
        if self.k < _bound(self.epsilon, self.n):
            raise ValueError(f"k={self.k} is below the bound for eps={self.epsilon}, n={self.n}")

    @classmethod
    def for_points(cls, epsilon: float, n: int, d: int) -> "JlCertificate":
        return cls(epsilon, n, jl_min_dimension(epsilon, n), d)


@lru_cache(maxsize=256)
def _gaussian_matrix(k: int, d: int, seed: int) -> np.ndarray:
    a = gaussian_sample(Rng(seed), k * d).reshape(k, d)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProjectionMap:
    matrix: np.ndarray
    seed: int
    certificate: JlCertificate
    attempts: int = 1
    scale: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "scale", 1.0 / math.sqrt(self.certificate.k))

    @property
    def k(self) -> int:
        return self.certificate.k

    @property
    def d(self) -> int:
        return self.certificate.d

    @property
    def scaled(self) -> np.ndarray:
        return self.scale * self.matrix


def make_map(d: int, certificate: JlCertificate, seed: int) -> ProjectionMap:
    """Draw the ``k x d`` Gaussian matrix for ``seed`` (row-major fill)."""
    if d < 1:
        raise DimensionMismatch("d must be >= 1")
    if certificate.d != d:
        certificate = JlCertificate(certificate.epsilon, certificate.n, certificate.k, d)
    return ProjectionMap(_gaussian_matrix(certificate.k, d, seed), seed, certificate)


def project(pmap: ProjectionMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != pmap.d:
        raise DimensionMismatch(f"vector has dimension {x.shape[-1]}, map expects {pmap.d}")
    return pmap.scale * (x @ pmap.matrix.T)


def _pair_differences(points: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(len(points), k=1)
    return points[i] - points[j]


_CHUNK_ELEMENTS = 1 << 22


def _projected_sq_norms(pmap: ProjectionMap, diffs: np.ndarray) -> np.ndarray:
    # explicit broadcast-and-sum keeps each row's arithmetic independent of batch size
    rows = max(1, _CHUNK_ELEMENTS // pmap.matrix.size)
    out = np.empty(len(diffs))
    for start in range(0, len(diffs), rows):
        block = diffs[start:start + rows]
        img = pmap.scale * np.sum(block[:, None, :] * pmap.matrix[None, :, :], axis=-1)
        out[start:start + rows] = np.sum(img * img, axis=-1)
    return out


def _within(pmap: ProjectionMap, diffs: np.ndarray, epsilon: float) -> np.ndarray:
    orig = np.sum(diffs * diffs, axis=-1)
    new = _projected_sq_norms(pmap, diffs)
    return ((1.0 - epsilon) * orig <= new) & (new <= (1.0 + epsilon) * orig)


def max_distortion(pmap: ProjectionMap, points) -> float:
    """Largest ``| |f(u)-f(v)|^2 / |u-v|^2 - 1 |`` over pairs at nonzero distance."""
    diffs = _pair_differences(np.asarray(points, dtype=float))
    orig = np.sum(diffs * diffs, axis=-1)
    keep = orig > 0
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(_projected_sq_norms(pmap, diffs[keep]) / orig[keep] - 1.0)))


def preserves_distances(pmap: ProjectionMap, points, epsilon: float) -> bool:
    """Two-sided check ``(1-eps)|u-v|^2 <= |f(u)-f(v)|^2 <= (1+eps)|u-v|^2`` on all pairs."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return True
    return bool(np.all(_within(pmap, _pair_differences(pts), epsilon)))


def find_map(points: Sequence, epsilon: float, seed: int,
             max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> ProjectionMap:
    """First map over seeds ``seed, seed+1, ...`` meeting the distortion bound on every pair."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise DimensionMismatch("points must be an n x d array")
    n, d = pts.shape
    cert = JlCertificate.for_points(epsilon, n, d)
    diffs = _pair_differences(pts)
    for attempt in range(max_attempts):
        pmap = make_map(d, cert, seed + attempt)
        if np.all(_within(pmap, diffs, epsilon)):
            return ProjectionMap(pmap.matrix, pmap.seed, cert, attempts=attempt + 1)
    raise AttemptsExhausted(f"no map within eps={epsilon} after {max_attempts} attempts")


def _pad(x, d: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise DimensionMismatch("expected a vector")
    out = np.zeros(d)
    out[: x.size] = x
    return out


def pair_seeds(anchor, others: Sequence, epsilon: float, seed: int,
               max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> tuple[int, np.ndarray]:
    """Seeds ``find_map`` would settle on for each pair ``(anchor, other)``.

    All vectors are zero-padded to the largest dimension ``d`` (returned first).
    """
    d = max([np.size(anchor)] + [np.size(o) for o in others])
    if d < 1:
        raise DimensionMismatch("vectors must be non-empty")
    cert = JlCertificate.for_points(epsilon, 2, d)
    diffs = np.stack([_pad(o, d) for o in others]) - _pad(anchor, d) if others else np.zeros((0, d))
    seeds = np.full(len(diffs), -1, dtype=np.int64)
    todo = np.arange(len(diffs))
    for attempt in range(max_attempts):
        if todo.size == 0:
            break
        ok = _within(make_map(d, cert, seed + attempt), diffs[todo], epsilon)
        seeds[todo[ok]] = seed + attempt
        todo = todo[~ok]
    if todo.size:
        raise AttemptsExhausted(f"no map within eps={epsilon} after {max_attempts} attempts")
    return d, seeds


def pair_map(a, b, epsilon: float, seed: int,
             max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> ProjectionMap:
    """Shared map for two vectors after zero-padding both to the larger dimension."""
    d, seeds = pair_seeds(a, [b], epsilon, seed, max_attempts)
    chosen = int(seeds[0])
    pmap = make_map(d, JlCertificate.for_points(epsilon, 2, d), chosen)
    return ProjectionMap(pmap.matrix, chosen, pmap.certificate, attempts=chosen - seed + 1)


def align_dimensions(a, b, epsilon: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Project two vectors of possibly different length into one common k-space."""
    pmap = pair_map(a, b, epsilon, seed)
    return project(pmap, _pad(a, pmap.d)), project(pmap, _pad(b, pmap.d))


# ----------------------------------------------- Gaussian summaries through a map


@lru_cache(maxsize=256)
def _range_coordinates(k: int, d: int, seed: int) -> np.ndarray:
    """Matrix ``B`` with ``|B x| = |A x| / sqrt(k)`` for every ``x``.

    For ``k > d`` it is the triangular factor of ``A / sqrt(k) = Q R``, which
    expresses images in an orthonormal basis of the map's range.
    """
    scaled = _gaussian_matrix(k, d, seed) / math.sqrt(k)
    basis = np.linalg.qr(scaled, mode="r") if k > d else scaled.copy()
    basis.setflags(write=False)
    return basis


@dataclass(frozen=True, eq=False)
class ProjectedSummary:
    """Image of a normal under a map, in coordinates of the map's range.

    ``mean`` and ``cov`` are ``Q^T P mu`` and ``Q^T P S P^T Q`` for an orthonormal
    basis ``Q`` of ``range(P)``; ``ridge`` is the regularization the full ``k x k``
    image covariance ``P S P^T`` would receive on its own.
    """

    mean: np.ndarray
    cov: np.ndarray
    ridge: float
    k: int


def project_summary(summary: GaussianSummary, pmap: ProjectionMap) -> ProjectedSummary:
    """Push a normal through ``f``; dimensions below ``pmap.d`` are zero-padded."""
    if summary.dim > pmap.d:
        raise DimensionMismatch(f"summary dimension {summary.dim} exceeds map input {pmap.d}")
    basis = _range_coordinates(pmap.k, pmap.d, pmap.seed)[:, : summary.dim]
    cov = basis @ summary.cov @ basis.T
    cov = 0.5 * (cov + cov.T)
    ridge = max(1e-8, 1e-10 * float(np.trace(cov)) / pmap.k)
    return ProjectedSummary(basis @ summary.mean, cov, ridge, pmap.k)


def full_image(projected: ProjectedSummary, ridge: float, pmap: ProjectionMap,
               summary: GaussianSummary) -> GaussianSummary:
    """The explicit ``k``-dimensional image ``N(P mu, P S P^T + ridge I)``."""
    scaled = pmap.scaled[:, : summary.dim]
    cov = scaled @ summary.cov @ scaled.T
    return GaussianSummary(scaled @ summary.mean, 0.5 * (cov + cov.T) + ridge * np.eye(pmap.k))


def compare_projected(a: ProjectedSummary, others: Sequence[ProjectedSummary]) -> np.ndarray:
    """Distances from ``a`` to each of ``others`` between regularized ``k``-dim images.

    Each pair is regularized with the larger of its two ridges.  With a shared
    ridge the ``k - d`` directions orthogonal to the map's range have the same
    variance in both images and add exactly zero to the distance, so the
    computation runs in the ``d``-dimensional range coordinates.
    """
    if not others:
        return np.zeros(0)
    r = a.mean.size
    ridge = np.maximum(a.ridge, np.array([o.ridge for o in others]))
    eye = np.eye(r)
    cov_a = a.cov[None] + ridge[:, None, None] * eye
    cov_b = np.stack([o.cov for o in others]) + ridge[:, None, None] * eye
    mean_b = np.stack([o.mean for o in others])
    return bhattacharyya_mvn(a.mean[None], cov_a, mean_b, cov_b)


def compare_summaries(s1: GaussianSummary, s2: GaussianSummary, epsilon: float,
                      seed: int) -> tuple[Divergence, ProjectionMap]:
    """Bhattacharyya divergence of two summaries after aligning them through one JL map.

    The map is the one ``align_dimensions`` picks for the summaries' mean vectors.
    """
    pmap = pair_map(s1.mean, s2.mean, epsilon, seed)
    dist = compare_projected(project_summary(s1, pmap), [project_summary(s2, pmap)])[0]
    return Divergence.from_distance(float(dist)), pmap
