"""Reference depth computations used to validate the cone search.

None of these share code with the breadth-first search beyond the data
model, so agreement between them is meaningful evidence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cones import DepthResult, SearchDiagnostics
from .errors import DegeneracyDetected, DimensionError
from .geometry import ZERO_TOL, CenteredCloud, ConeCode, pack, random_directions


@dataclass(frozen=True)
class ApproxConfig:
    directions: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.directions < 1:
            raise ValueError("need at least one direction")


def _result(count, n, direction, points, method):
    code = None
    if direction is not None:
        code = ConeCode(pack(points @ direction >= 0), n)
    return DepthResult(int(count), n, code, direction, SearchDiagnostics(), method)


def subset_normals(points: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Normal vector of span(points[S]) for every (d-1)-subset S.

    Uses the generalized cross product: entry k is (-1)^k times the minor
    with column k removed. Deterministic and orientation-consistent.
    """
    d = points.shape[1]
    blocks = points[subsets]  # (m, d-1, d)
    normals = np.empty((len(subsets), d))
    for k in range(d):
        minor = np.delete(blocks, k, axis=2)
        normals[:, k] = (-1) ** k * (np.linalg.det(minor) if d > 1 else 1.0)
    return normals


def combinatorial_depth(cloud: CenteredCloud) -> DepthResult:
    """Brute-force depth over all (d-1)-subsets of the centered points.

    Every cone of the segmentation has an extreme ray on which d-1 of the
    hyperplanes meet. On such a ray r0 the other points keep the signs
    they have in the cone, while the d-1 boundary points project to zero.
    Those boundary points are linearly independent, so some direction near
    r0 puts all of them strictly on one side; the halfspace count with
    all of them on the negative side is #{x.r0 > 0}, and symmetrically for
    the other side. Minimizing min(#pos, #neg) over all subsets therefore
    gives the depth. O(n^d) work.
    """
    pts = cloud.points
    n, d = pts.shape
    scale = cloud.scale
    subsets = np.array(list(itertools.combinations(range(n), d - 1)), dtype=np.intp)
    if subsets.size == 0:
        subsets = subsets.reshape(1, 0)
    normals = subset_normals(pts, subsets)
    lengths = np.linalg.norm(normals, axis=1)
    if np.any(lengths < ZERO_TOL * scale ** (d - 1)):
        bad = subsets[int(np.argmin(lengths))]
        raise DegeneracyDetected(f"points {tuple(bad)} do not span a hyperplane")
    normals /= lengths[:, None]
    dots = normals @ pts.T  # (m, n)
    member = np.zeros_like(dots, dtype=bool)
    if d > 1:
        member[np.arange(len(subsets))[:, None], subsets] = True
    zero = (np.abs(dots) < ZERO_TOL * scale) & ~member
    if zero.any():
        row, col = np.argwhere(zero)[0]
        raise DegeneracyDetected(f"point {col} lies in the span of {tuple(subsets[row])}")
    pos = ((dots > 0) & ~member).sum(axis=1)
    neg = ((dots < 0) & ~member).sum(axis=1)
    counts = np.minimum(pos, neg)
    best = int(np.argmin(counts))  # first minimum: fixed tie order
    direction = _push_off(pts, subsets[best], normals[best], pos[best] <= neg[best])
    return _result(counts[best], n, direction, pts, "comb")


def _push_off(points, subset, normal, keep_positive):
    """Rotate ``normal`` slightly so every subset point is strictly negative.

    With ``keep_positive`` the positive side keeps exactly the non-subset
    points that were positive; otherwise the roles are mirrored and the
    result is negated, so in both cases the closed positive side holds the
    smaller count.
    """
    r0 = normal if keep_positive else -normal
    if len(subset) == 0:
        return r0
    s = points[subset]
    push, *_ = np.linalg.lstsq(s, -np.ones(len(subset)), rcond=None)
    others = np.delete(points, subset, axis=0)
    base = np.abs(others @ r0)
    drift = np.abs(others @ push)
    limit = np.min(base[drift > 0] / drift[drift > 0]) if np.any(drift > 0) else 1.0
    step = 0.5 * min(limit, 1.0)
    r = r0 + step * push
    return r / np.linalg.norm(r)


def univariate_depth(values, query: float) -> DepthResult:
    """Depth of ``query`` among reals: min(#below, #above)."""
    v = np.asarray(values, dtype=float).ravel()
    if np.any(v == query):
        raise DegeneracyDetected("a value coincides with the query")
    below = int(np.sum(v < query))
    above = v.size - below
    direction = np.array([1.0 if above <= below else -1.0])
    count = min(below, above)
    return _result(count, v.size, direction, (v - query)[:, None], "univariate")


def planar_depth(cloud: CenteredCloud) -> DepthResult:
    """Angular sweep in the plane, O(n log n).

    A direction at angle t sees point i positive iff t lies in the open
    half-circle of width pi centred at the point's angle. Sorting the 2n
    half-circle endpoints and sweeping once gives the positive count on
    every arc between consecutive endpoints.
    """
    pts = cloud.points
    n, d = pts.shape
    if d != 2:
        raise DimensionError("planar depth needs d = 2")
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    two_pi = 2.0 * math.pi
    starts = np.mod(phi - math.pi / 2, two_pi)
    ends = np.mod(phi + math.pi / 2, two_pi)
    angles = np.concatenate([starts, ends])
    deltas = np.concatenate([np.ones(n, dtype=int), -np.ones(n, dtype=int)])
    order = np.argsort(angles, kind="stable")
    angles, deltas = angles[order], deltas[order]
    gaps = np.diff(np.append(angles, angles[0] + two_pi))
    if np.min(gaps) < ZERO_TOL:
        raise DegeneracyDetected("two points are collinear with the query")
    # count on the arc just before the first event
    probe = angles[0] - 0.5 * gaps[-1]
    r = np.array([math.cos(probe), math.sin(probe)])
    running = int(np.sum(pts @ r > 0))
    best, best_angle = min(running, n - running), probe
    for k in range(2 * n):
        running += deltas[k]
        c = min(running, n - running)
        if c < best:
            best, best_angle = c, angles[k] + 0.5 * gaps[k]
    r = np.array([math.cos(best_angle), math.sin(best_angle)])
    positive = int(np.sum(pts @ r > 0))
    direction = r if positive == best else -r
    return _result(best, n, direction, pts, "planar")


def approximate_depth(cloud: CenteredCloud, config: ApproxConfig = ApproxConfig(),
                      directions=None) -> DepthResult:
    """Minimum univariate depth over random projections (an upper bound).

    A zero projection is counted on both sides, which is what the closed
    halfspace does, so every candidate is an attained halfspace count.
    Explicit ``directions`` (rows) replace the random draw.
    """
    pts = cloud.points
    n, d = pts.shape
    if directions is None:
        dirs = random_directions(np.random.default_rng(config.seed), config.directions, d)
    else:
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    dots = dirs @ pts.T
    pos = (dots > 0).sum(axis=1)
    neg = (dots < 0).sum(axis=1)
    ties = n - pos - neg
    counts = np.minimum(pos, neg) + ties
    best = int(np.argmin(counts))
    r = dirs[best] if pos[best] <= neg[best] else -dirs[best]
    return _result(counts[best], n, r, pts, "approx")
