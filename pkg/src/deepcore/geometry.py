"""Data model and low-level geometry: clouds, cone codes, projections.

Cone codes are stored as Python integers used as bitsets: bit ``i`` is
set when point ``i`` has a strictly positive projection on the interior
directions of the cone. The hot loops of the cone search work on the raw
integers; :class:`ConeCode` wraps one together with its length for the
public API.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ExhaustedRetries, ZeroProjection

log = logging.getLogger(__name__)

#: Relative threshold below which a projection counts as zero.
ZERO_TOL = 1e-12
#: Threshold on |det| of d unit vectors below which they count as dependent.
DEPENDENCE_TOL = 1e-11
#: Largest C(n, d) for which the general-position check is exhaustive.
EXHAUSTIVE_LIMIT = 200_000
DEFAULT_PERTURBATION = 1e-7
MIN_PERTURBATION = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PointCloud:
    """n points in R^d; the ordering is fixed for the lifetime of the cloud."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DimensionError(f"expected an (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class CenteredCloud:
    """A cloud shifted so that the query point sits at the origin."""

    points: np.ndarray
    query: np.ndarray
    perturbed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(self.points))
        object.__setattr__(self, "query", _frozen(self.query))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def scale(self) -> float:
        """Largest point norm; the unit for relative tolerances."""
        s = float(np.max(np.linalg.norm(self.points, axis=1)))
        return s if s > 0 else 1.0

    def directions(self) -> "CenteredCloud":
        """Each point scaled to unit length.

        Depth at the origin depends only on the point directions, and unit
        rows keep the absolute zero tests meaningful when point norms span
        many orders of magnitude. Points at the origin are left alone.
        """
        norms = np.linalg.norm(self.points, axis=1)
        norms[norms == 0.0] = 1.0
        return CenteredCloud(self.points / norms[:, None], self.query, self.perturbed)

    def uncenter(self) -> np.ndarray:
        return self.points + self.query


@dataclass(frozen=True)
class ConeCode:
    """Sign pattern of a direction cone, one bit per data point."""

    value: int
    n: int

    def __post_init__(self):
        if self.value < 0 or self.value >> self.n:
            raise ValueError(f"code {self.value:#x} does not fit in {self.n} bits")

    @classmethod
    def from_bits(cls, bits) -> "ConeCode":
        bits = [int(bool(b)) for b in bits]
        return cls(sum(b << i for i, b in enumerate(bits)), len(bits))

    def bits(self) -> np.ndarray:
        return unpack(self.value, self.n)

    @property
    def ones(self) -> int:
        return self.value.bit_count()

    @property
    def zeros(self) -> int:
        return self.n - self.ones

    @property
    def halfspace_count(self) -> int:
        """min(#positive, #negative): the depth count of this cone."""
        return min(self.ones, self.zeros)

    def complement(self) -> "ConeCode":
        return ConeCode(self.value ^ ((1 << self.n) - 1), self.n)

    def flip(self, i: int) -> "ConeCode":
        return ConeCode(self.value ^ (1 << i), self.n)

    def __xor__(self, other: "ConeCode") -> "ConeCode":
        if other.n != self.n:
            raise ValueError("codes of different length")
        return ConeCode(self.value ^ other.value, self.n)

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.value >> i) & 1

    def __str__(self):
        return "".join(str((self.value >> i) & 1) for i in range(self.n))


def unpack(value: int, n: int) -> np.ndarray:
    """Bitset integer -> boolean array of length n (bit i -> entry i)."""
    nbytes = max(1, (n + 7) // 8)
    raw = np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].astype(bool)


def pack(mask) -> int:
    """Boolean array -> bitset integer (inverse of :func:`unpack`)."""
    mask = np.asarray(mask, dtype=bool)
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


@dataclass(frozen=True)
class GeneralPositionReport:
    ok: bool
    violation: tuple[int, ...] | None = None
    reason: str = ""
    exhaustive: bool = True


def center(cloud: PointCloud, query) -> CenteredCloud:
    """Shift the cloud so that ``query`` becomes the origin."""
    z = np.atleast_1d(np.asarray(query, dtype=float))
    if z.shape != (cloud.d,):
        raise DimensionError(f"query has dimension {z.size}, cloud has d={cloud.d}")
    centered = CenteredCloud(cloud.points - z, z)
    if np.any(np.all(centered.points == 0.0, axis=1)):
        log.debug("query coincides with a data point")
    return centered


def check_general_position(cloud: CenteredCloud, mode: str = "auto", seed: int = 0,
                           samples: int = 20_000) -> GeneralPositionReport:
    """Check that {0} together with the centered points is in general position.

    With the query at the origin this amounts to: no point is the origin
    and every min(n, d) points are linearly independent. ``mode`` is
    ``"exhaustive"``, ``"sampled"`` or ``"auto"`` (exhaustive when there are
    at most ``EXHAUSTIVE_LIMIT`` subsets).
    """
    pts = cloud.points
    n, d = pts.shape
    norms = np.linalg.norm(pts, axis=1)
    at_origin = np.flatnonzero(norms <= ZERO_TOL * cloud.scale)
    if at_origin.size:
        return GeneralPositionReport(False, (int(at_origin[0]),), "point at the query")
    k = min(n, d)
    unit = pts / norms[:, None]
    total = math.comb(n, k)
    if mode == "auto":
        mode = "exhaustive" if total <= EXHAUSTIVE_LIMIT else "sampled"
    if mode == "exhaustive":
        subsets = np.array(list(itertools.combinations(range(n), k)), dtype=np.intp)
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        subsets = np.sort(np.array([rng.choice(n, size=k, replace=False)
                                    for _ in range(min(samples, total))]), axis=1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    exhaustive = mode == "exhaustive"
    for start in range(0, len(subsets), 50_000):
        chunk = subsets[start:start + 50_000]
        blocks = unit[chunk]
        if k == d:
            vol = np.abs(np.linalg.det(blocks))
        else:
            # fewer points than dimensions: smallest singular value of the block
            vol = np.linalg.svd(blocks, compute_uv=False)[:, -1]
        bad = np.flatnonzero(vol < DEPENDENCE_TOL)
        if bad.size:
            return GeneralPositionReport(False, tuple(int(i) for i in chunk[bad[0]]),
                                         "linearly dependent subset", exhaustive)
    return GeneralPositionReport(True, exhaustive=exhaustive)


def _point_keys(pts: np.ndarray) -> list[int]:
    """Order-independent key per point: hash of its coordinates plus its
    occurrence number among exact duplicates."""
    seen: dict[bytes, int] = {}
    keys = []
    for row in np.ascontiguousarray(pts):
        raw = row.tobytes()
        seen[raw] = seen.get(raw, -1) + 1
        digest = hashlib.blake2b(raw + seen[raw].to_bytes(4, "little"), digest_size=8)
        keys.append(int.from_bytes(digest.digest(), "little"))
    return keys


def perturb(cloud: CenteredCloud, magnitude: float = DEFAULT_PERTURBATION,
            seed=0) -> CenteredCloud:
    """Add seeded uniform jitter of +-(magnitude * bounding-box diagonal).

    Each point's jitter is drawn from a generator keyed by ``seed`` and the
    point's own coordinates, so reordering the cloud reorders the jitter
    with it. ``seed`` may be an int or a sequence of ints.
    """
    if not magnitude > 0:
        log.warning("perturbation magnitude %r rejected, using %g", magnitude, MIN_PERTURBATION)
        magnitude = MIN_PERTURBATION
    magnitude = max(float(magnitude), MIN_PERTURBATION)
    pts = cloud.points
    diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    if diag == 0.0:
        diag = max(cloud.scale, 1.0)
    bound = magnitude * diag
    base = list(np.atleast_1d(seed).astype(np.int64))
    jitter = np.empty_like(pts)
    for i, key in enumerate(_point_keys(pts)):
        jitter[i] = np.random.default_rng(base + [key]).uniform(-bound, bound, size=cloud.d)
    return CenteredCloud(pts + jitter, cloud.query, perturbed=True)


def complement_basis(anchor) -> np.ndarray:
    """Orthonormal basis (as columns, d x (d-1)) of the complement of ``anchor``.

    Uses the Householder reflector that maps the coordinate axis of the
    largest-magnitude anchor entry onto the anchor direction; the other
    columns of the reflector span the orthogonal complement. The result
    depends only on the anchor vector.
    """
    a = np.asarray(anchor, dtype=float)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        raise ZeroProjection(-1)
    u = a / norm
    d = u.size
    k = int(np.argmax(np.abs(u)))
    v = u.copy()
    v[k] += 1.0 if u[k] >= 0 else -1.0
    reflector = np.eye(d) - 2.0 * np.outer(v, v) / (v @ v)
    return np.delete(reflector, k, axis=1)


@dataclass
class PlaneCache:
    """Projections of the cloud onto the hyperplane normal to one data point.

    ``initial`` holds the raw projections (row ``anchor_index`` is zero).
    ``sign_state`` is the cone code the LP rows are currently aligned to:
    row k is multiplied by +1 if bit k is set and by -1 otherwise, which is
    what the interior directions of that cone see as "positive". The LP
    rows exclude the anchor, are scaled to unit length, and receive sign
    flips lazily when they are next read.
    """

    anchor_index: int
    initial: np.ndarray
    sign_state: int | None = None
    hull_basis: frozenset | None = None
    hull_basis_mask: int = 0
    row_index: np.ndarray = field(default=None, repr=False)
    _rows: np.ndarray = field(default=None, repr=False)
    _pending: int = 0

    def __post_init__(self):
        n = self.initial.shape[0]
        keep = np.arange(n) != self.anchor_index
        self.row_index = np.flatnonzero(keep)
        rows = self.initial[keep]
        norms = np.linalg.norm(rows, axis=1)
        norms[norms == 0.0] = 1.0
        self._base = np.ascontiguousarray(rows / norms[:, None])
        self._keep = keep

    @property
    def n(self) -> int:
        return self.initial.shape[0]

    def sync(self, code: int) -> int:
        """Align to ``code``; return the bitset of points whose sign flipped."""
        if self.sign_state is None:
            self.sign_state = code
            signs = np.where(unpack(code, self.n)[self._keep], 1.0, -1.0)
            self._rows = np.ascontiguousarray(self._base * signs[:, None])
            self._pending = 0
            return 0
        flipped = self.sign_state ^ code
        self.sign_state = code
        self._pending ^= flipped
        return flipped

    @property
    def lp_rows(self) -> np.ndarray:
        """Unit, sign-aligned projections of every point but the anchor."""
        if self._rows is None:
            return self._base
        if self._pending:
            mask = unpack(self._pending, self.n)[self._keep]
            self._rows[mask] *= -1.0
            self._pending = 0
        return self._rows

    @property
    def projected_points(self) -> np.ndarray:
        """Raw projections aligned to ``sign_state`` (anchor row stays zero)."""
        if self.sign_state is None:
            return self.initial
        return self.initial * np.where(unpack(self.sign_state, self.n), 1.0, -1.0)[:, None]

    def set_basis(self, indices) -> None:
        if indices is None:
            self.hull_basis, self.hull_basis_mask = None, 0
        else:
            self.hull_basis = frozenset(int(i) for i in indices)
            self.hull_basis_mask = sum(1 << i for i in self.hull_basis)


def project_onto_plane(cloud: CenteredCloud, anchor_index: int) -> PlaneCache:
    """Express every point in a basis of the complement of point ``anchor_index``."""
    anchor = cloud.points[anchor_index]
    if not np.any(anchor):
        raise ZeroProjection(anchor_index)
    basis = complement_basis(anchor)
    proj = cloud.points @ basis
    proj[anchor_index] = 0.0
    return PlaneCache(anchor_index, proj)


def stacked_projections(cloud: CenteredCloud) -> np.ndarray:
    """Projections for every anchor at once, shape (n, n, d-1).

    Entry [j] equals ``project_onto_plane(cloud, j).initial``; the
    reflectors are applied as rank-one updates instead of forming them.
    """
    pts = cloud.points
    n, d = pts.shape
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms == 0.0):
        raise ZeroProjection(int(np.argmin(norms)))
    v = pts / norms[:, None]
    k = np.argmax(np.abs(v), axis=1)
    rows = np.arange(n)
    v[rows, k] += np.where(v[rows, k] >= 0, 1.0, -1.0)
    coef = 2.0 / np.einsum("ij,ij->i", v, v)
    dots = pts @ v.T  # dots[i, j] = x_i . v_j
    full = pts[None, :, :] - (dots.T * coef[:, None])[:, :, None] * v[:, None, :]
    keep = np.ones((n, d), dtype=bool)
    keep[rows, k] = False
    proj = full.transpose(0, 2, 1)[keep].reshape(n, d - 1, n).transpose(0, 2, 1).copy()
    proj[rows, rows] = 0.0
    return proj


def project_all(cloud: CenteredCloud) -> list[PlaneCache]:
    return [PlaneCache(j, proj) for j, proj in enumerate(stacked_projections(cloud))]


def sign_vector(cloud: CenteredCloud, direction) -> ConeCode:
    """Code of the cone containing ``direction`` (bit i <=> x_i . r > 0)."""
    r = np.asarray(direction, dtype=float)
    if r.shape != (cloud.d,):
        raise DimensionError(f"direction has shape {r.shape}, expected ({cloud.d},)")
    if abs(np.linalg.norm(r) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    dots = cloud.points @ r
    small = np.flatnonzero(np.abs(dots) < ZERO_TOL * cloud.scale)
    if small.size:
        raise ZeroProjection(int(small[0]), float(dots[small[0]]))
    return ConeCode(pack(dots > 0.0), cloud.n)


def random_directions(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    """``count`` directions drawn uniformly from the unit sphere in R^d."""
    g = rng.standard_normal((count, d))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    return g / norms[:, None]


def initial_direction(cloud: CenteredCloud, seed: int = 0,
                      max_tries: int = 100) -> tuple[np.ndarray, ConeCode]:
    """Draw a direction with no zero projection and no tied projections."""
    rng = np.random.default_rng(seed)
    tol = ZERO_TOL * cloud.scale
    for _ in range(max_tries):
        r = random_directions(rng, 1, cloud.d)[0]
        dots = cloud.points @ r
        if np.min(np.abs(dots)) < tol:
            continue
        if cloud.n > 1 and np.min(np.diff(np.sort(dots))) < tol:
            continue
        return r, ConeCode(pack(dots > 0.0), cloud.n)
    raise ExhaustedRetries(f"no admissible direction in {max_tries} draws")
