"""Depth consumers: depth-weighted mean, rank-sign transform, robust PCA, DD-plot."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .api import compute_depth
from .errors import AllZeroDepths, DimensionError
from .geometry import PointCloud

log = logging.getLogger(__name__)

#: Upper bound of the Tukey depth, used as D_max in the rank-sign transform.
TUKEY_DMAX = 0.5


class RankDeficient(UserWarning):
    """A singular value is negligible relative to the largest one."""


@dataclass(frozen=True)
class DepthField:
    """Depth of every sample point w.r.t. the whole sample, as k/n counts."""

    counts: np.ndarray
    n: int
    method: str = "exact"

    @property
    def depths(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def fractions(self) -> list[Fraction]:
        return [Fraction(int(c), self.n) for c in self.counts]


@dataclass(frozen=True)
class RsgnCloud:
    vectors: np.ndarray
    center: np.ndarray
    dmax: float


@dataclass(frozen=True)
class PcaResult:
    eigenvectors: np.ndarray  # columns, descending singular value
    singular_values: np.ndarray
    center: np.ndarray
    field: DepthField
    rsgn: RsgnCloud


@dataclass(frozen=True)
class DdPlot:
    coordinates: np.ndarray  # (N, 2) floats in [0, 1]
    counts: np.ndarray  # (N, 2) integer numerators
    sizes: tuple[int, int]
    labels: np.ndarray

    @property
    def outsiders(self) -> np.ndarray:
        """Points with zero depth w.r.t. both classes."""
        return np.all(self.counts == 0, axis=1)

    def without_outsiders(self) -> "DdPlot":
        keep = ~self.outsiders
        return DdPlot(self.coordinates[keep], self.counts[keep], self.sizes, self.labels[keep])


def _cloud(x):
    return x if isinstance(x, PointCloud) else PointCloud(x)


def depth_field(cloud, method: str = "exact", seed: int = 0, **options) -> DepthField:
    """Depth of each sample point with respect to the full sample.

    The query coincides with one data point, which breaks general
    position; the perturbation path of :func:`compute_depth` handles it.
    """
    cloud = _cloud(cloud)
    counts = np.array([compute_depth(cloud, x, method, seed=seed, **options).count
                       for x in cloud.points], dtype=np.int64)
    return DepthField(counts, cloud.n, method)


def depth_weighted_mean(cloud, field: DepthField) -> np.ndarray:
    """sum_i x_i D(x_i) / sum_i D(x_i)."""
    cloud = _cloud(cloud)
    w = field.depths
    total = w.sum()
    if total <= 0:
        raise AllZeroDepths("all depths are zero")
    return (cloud.points * w[:, None]).sum(axis=0) / total


def rsgn_transform(cloud, field: DepthField, center, dmax: float = TUKEY_DMAX) -> RsgnCloud:
    """Unit sign vectors about ``center`` scaled by (dmax - depth)."""
    cloud = _cloud(cloud)
    depths = field.depths
    if dmax < depths.max():
        raise ValueError(f"dmax={dmax} is below the largest depth {depths.max()}")
    c = np.asarray(center, dtype=float)
    diff = cloud.points - c
    norms = np.linalg.norm(diff, axis=1)
    at_center = norms == 0.0
    if at_center.any():
        log.warning("%d point(s) coincide with the center; mapped to zero", int(at_center.sum()))
    norms[at_center] = 1.0
    vectors = diff / norms[:, None] * (dmax - depths)[:, None]
    vectors[at_center] = 0.0
    return RsgnCloud(vectors, c, float(dmax))


def sign_normalize(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so that its largest-magnitude entry is positive."""
    v = np.array(vectors, dtype=float)
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def principal_axes(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right singular vectors (as columns, sign-normalized) and singular values."""
    _, s, vt = np.linalg.svd(matrix, full_matrices=False)
    if s.size and s[-1] < 1e-10 * s[0]:
        warnings.warn(f"singular value {s[-1]:.3g} is negligible", RankDeficient, stacklevel=2)
    return sign_normalize(vt.T), s


def robust_pca(cloud, method: str = "exact", seed: int = 0, dmax: float = TUKEY_DMAX,
               **options) -> PcaResult:
    """Principal axes of the depth-scaled sign vectors around the depth-weighted mean."""
    cloud = _cloud(cloud)
    if cloud.n <= cloud.d:
        raise DimensionError(f"need n > d, got n={cloud.n}, d={cloud.d}")
    field = depth_field(cloud, method, seed, **options)
    c = depth_weighted_mean(cloud, field)
    rsgn = rsgn_transform(cloud, field, c, dmax)
    axes, s = principal_axes(rsgn.vectors)
    return PcaResult(axes, s, c, field, rsgn)


def classical_pca(cloud) -> tuple[np.ndarray, np.ndarray]:
    """Plain SVD of the mean-centered data, same sign convention."""
    pts = _cloud(cloud).points
    return principal_axes(pts - pts.mean(axis=0))


def dd_plot(class1, class2, method: str = "exact", points=None, seed: int = 0,
            **options) -> DdPlot:
    """(D(x|X1), D(x|X2)) for every point of both classes, or for ``points``."""
    c1, c2 = _cloud(class1), _cloud(class2)
    if c1.d != c2.d:
        raise DimensionError(f"class dimensions differ: {c1.d} vs {c2.d}")
    if points is None:
        points = np.vstack([c1.points, c2.points])
        labels = np.repeat([1, 2], [c1.n, c2.n])
    else:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        labels = np.zeros(len(points), dtype=int)
    counts = np.array([[compute_depth(c, x, method, seed=seed, **options).count for c in (c1, c2)]
                       for x in points], dtype=np.int64).reshape(-1, 2)
    coords = counts / np.array([c1.n, c2.n])
    return DdPlot(coords, counts, (c1.n, c2.n), labels)
