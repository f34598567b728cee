"""Numeric kernel: distances, centroids, affine rank, n-ball volumes,
cosines, PCA, and 2-D convex hulls.

All functions are pure and operate on plain arrays; a point cloud is any
array-like of shape (m, d).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import (
    DegenerateCovariance,
    EmptyCloud,
    InsufficientPoints,
    NegativeRadius,
    ZeroVector,
)

PCA_SCHEMA_VERSION = 1


def _cloud(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyCloud("point cloud must be a non-empty (m, d) array")
    return x


def centroid(points) -> np.ndarray:
    """Coordinate-wise mean of the cloud.

    A cloud of coincident points returns that point exactly rather than a
    floating-point mean that can drift by an ulp.
    """
    x = _cloud(points)
    if np.all(x == x[0]):
        return x[0].copy()
    return x.mean(axis=0)


def mean_centroid_distance(points) -> float:
    """Mean Euclidean distance from each point to the cloud centroid.

    Exactly 0.0 when (and only when) all points coincide; the explicit
    check avoids the ~1e-16 residue a floating-point mean would leave.
    """
    x = _cloud(points)
    if np.all(x == x[0]):
        return 0.0
    return float(np.linalg.norm(x - x.mean(axis=0), axis=1).mean())


def max_centroid_distance(points) -> float:
    """Largest Euclidean distance from any point to the cloud centroid."""
    x = _cloud(points)
    if np.all(x == x[0]):
        return 0.0
    return float(np.linalg.norm(x - x.mean(axis=0), axis=1).max())


def mean_pairwise_distance(points) -> float:
    """Mean Euclidean distance over all unordered point pairs."""
    x = _cloud(points)
    m = x.shape[0]
    if m < 2:
        raise InsufficientPoints("pairwise distance needs at least 2 points")
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    iu = np.triu_indices(m, 1)
    return float(d[iu].mean())


def affine_dimension(points, tol: float = 1e-9) -> int:
    """Rank of the mean-centered point matrix.

    Counts singular values above ``tol`` times the largest one; a single
    point or fully coincident cloud has dimension 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = _cloud(points)
    if np.all(x == x[0]):
        return 0
    centered = x - x.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def ball_volume_fraction(d: int, radius: float) -> float:
    """Volume of the d-ball of the given radius as a fraction of the unit cube.

    Computed in log space, ``exp(d/2 log pi + d log r - lgamma(d/2 + 1))``,
    so large d cannot overflow. Not clipped at 1; a big radius legitimately
    yields a ball larger than the cube.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if radius < 0:
        raise NegativeRadius(f"radius must be >= 0, got {radius}")
    if radius == 0.0:
        return 0.0
    return float(np.exp(0.5 * d * np.log(np.pi) + d * np.log(radius) - gammaln(0.5 * d + 1.0)))


def cosine_similarity(a, b, shift: float | None = None) -> float:
    """Cosine of the angle between two vectors, optionally in shifted space.

    With ``shift`` given, the scalar is subtracted from every coordinate of
    both vectors first (0.5 recenters unit-cube points on the cube center).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if shift is not None:
        a = a - shift
        b = b - shift
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for zero-length vector")
    if np.array_equal(a, b):
        return 1.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class PcaModel:
    """Fitted principal components: mean, orthonormal components (k, d) and
    their explained variances, sorted descending."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def to_dict(self) -> dict:
        return {
            "schema_version": PCA_SCHEMA_VERSION,
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
        }

    @staticmethod
    def from_dict(data: dict) -> "PcaModel":
        return PcaModel(
            mean=np.asarray(data["mean"], dtype=float),
            components=np.asarray(data["components"], dtype=float),
            explained_variance=np.asarray(data["explained_variance"], dtype=float),
        )


def fit_pca(points, k: int) -> PcaModel:
    """Top-k eigenvectors of the sample covariance (ddof=1).

    The sign of each component is fixed so its largest-magnitude entry is
    positive, making fits reproducible across runs.
    """
    x = _cloud(points)
    m, d = x.shape
    if m < 2:
        raise InsufficientPoints("PCA needs at least 2 points")
    if not (1 <= k <= d):
        raise ValueError(f"k must be in [1, {d}]")
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    evals, evecs = np.linalg.eigh(cov)
    if float(evals.max(initial=0.0)) <= 0.0:
        raise DegenerateCovariance("all points coincide; covariance is zero")
    order = np.argsort(evals)[::-1]
    comps = evecs[:, order[:k]].T.copy()
    for row in comps:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    explained = np.clip(evals[order[:k]], 0.0, None)
    return PcaModel(mean=mean, components=comps, explained_variance=explained)


def project(model: PcaModel, points) -> np.ndarray:
    """Project one point (d,) or many (m, d) into component space."""
    x = np.asarray(points, dtype=float)
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    out = (x - model.mean) @ model.components.T
    return out[0] if single else out


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_2d(points) -> list[tuple[float, float]]:
    """Counter-clockwise convex hull of 2-D points (monotone chain).

    Collinear boundary points are dropped. Degenerate inputs return what is
    left: a single point, or the two endpoints of a segment.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if not pts:
        raise EmptyCloud("hull of an empty point set")
    if len(pts) == 1:
        return [pts[0]]
    if len(pts) == 2:
        return [pts[0], pts[1]]

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    if len(ring) == 2 and ring[0] == ring[1]:
        return [ring[0]]
    return ring
