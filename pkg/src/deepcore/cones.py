"""Exact Tukey depth by breadth-first search over the cone segmentation.

The search starts from the cone of a random direction and walks to
neighbouring cones through their common facets. Crossing the facet that
lies in the hyperplane normal to point j flips exactly bit j of the cone
code, so a neighbour is ``b ^ (1 << j)``. Whether that hyperplane carries
a facet of the current cone is a strict-separability question in the
hyperplane, answered by the phase-1 LP on the sign-aligned projections:
the facet exists iff the origin is *outside* their convex hull.

Each bit is flipped at most once along any search path, so the cones of
generation g are exactly those g-1 flips away from the start, and only
floor((n+2)/2) generations are needed: cones further away are mirror
images of nearer ones and have the same halfspace count.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from numba import njit

from .errors import DegeneracyDetected, DimensionError, IterationLimit, NumericallyAmbiguous, Unrealizable
from .geometry import (
    DEFAULT_PERTURBATION,
    CenteredCloud,
    ConeCode,
    PlaneCache,
    PointCloud,
    center,
    check_general_position,
    initial_direction,
    pack,
    project_all,
    stacked_projections,
    perturb,
    unpack,
)
from .simplex import (
    CERTIFICATE_TOL,
    FEASIBILITY_TOL,
    _pivot_loop,
    basis_still_valid,
    hull_verdict,
    origin_in_hull,
)

log = logging.getLogger(__name__)

DEFAULT_RESTARTS = 5


@dataclass
class SearchDiagnostics:
    cones_visited: int = 0
    lp_calls: int = 0
    cache_hits: int = 0
    facet_tests: int = 0
    generations: int = 0
    duplicate_inserts: int = 0
    restarts: int = 0
    perturbed: bool = False
    precheck: bool = False
    coincident: int = 0


@dataclass(frozen=True)
class DepthResult:
    count: int
    n: int
    minimizing_code: ConeCode | None = None
    witness_direction: np.ndarray | None = None
    diagnostics: SearchDiagnostics = field(default_factory=SearchDiagnostics)
    method: str = "exact"

    @property
    def depth(self) -> Fraction:
        return Fraction(self.count, self.n)

    @property
    def rational(self) -> str:
        return f"{self.count}/{self.n}"

    def __float__(self):
        return self.count / self.n


def is_facet(cache: PlaneCache, code: int, diagnostics: SearchDiagnostics | None = None) -> bool:
    """Does the hyperplane normal to the cache's anchor carry a facet of ``code``?

    Aligns the cached projections to ``code`` first. A still-valid hull
    basis from an earlier call answers "no" without solving.
    """
    diag = diagnostics if diagnostics is not None else SearchDiagnostics()
    if isinstance(code, ConeCode):
        code = code.value
    flipped = cache.sync(code)
    diag.facet_tests += 1
    if cache.hull_basis is not None and basis_still_valid(cache.hull_basis_mask, flipped):
        diag.cache_hits += 1
        return False
    diag.lp_calls += 1
    in_hull, support, _ = hull_verdict(cache.lp_rows)
    if in_hull:
        cache.set_basis(cache.row_index[list(support)])
        return False
    cache.set_basis(None)
    return True


def interior_direction(code: ConeCode, cloud: CenteredCloud) -> np.ndarray:
    """A unit vector whose projection signs reproduce ``code``."""
    signs = np.where(code.bits(), 1.0, -1.0)
    outcome = origin_in_hull(cloud.points * signs[:, None])
    if outcome.in_hull:
        raise Unrealizable(f"code {code} has no interior direction")
    v = outcome.witness
    if not np.array_equal((cloud.points @ v) > 0, code.bits()):
        raise Unrealizable(f"witness for code {code} has the wrong sign pattern")
    return v


def _witness(code: ConeCode, cloud: CenteredCloud) -> np.ndarray:
    # closed positive side of the witness must hold exactly `count` points
    v = interior_direction(code, cloud)
    return v if code.ones <= code.zeros else -v


@njit(cache=True)
def _expand(bits, cand, rows, row_index, state, in_basis, has_basis, counters, tol, cert_tol):  # pragma: no cover - compiled
    """Facet tests for every candidate anchor of one cone.

    Same steps as :func:`is_facet`, on stacked per-anchor arrays:
    rows[j] are the unit sign-aligned projections for anchor j (anchor
    row excluded, original point index in row_index[j]), state[j] the
    sign state, in_basis[j] the cached hull basis. counters accumulates
    facet tests, cache hits and LP calls. Returns (flags, error) with
    error 1 = iteration limit, 2 = numerically ambiguous.
    """
    m = rows.shape[1]
    p = rows.shape[2]
    flags = np.zeros(cand.size, dtype=np.bool_)
    limit = 50 * (m + p + 1) + 100
    for t in range(cand.size):
        j = cand[t]
        valid = has_basis[j]
        for r in range(m):
            k = row_index[j, r]
            if state[j, k] != bits[k]:
                state[j, k] = bits[k]
                for c in range(p):
                    rows[j, r, c] = -rows[j, r, c]
                if in_basis[j, k]:
                    valid = False
        counters[0] += 1
        if valid:
            counters[1] += 1
            continue
        counters[2] += 1
        for k in range(in_basis.shape[1]):
            in_basis[j, k] = False
        if p == 0:
            in_basis[j, row_index[j, 0]] = True
            has_basis[j] = True
            continue
        status, w, it, sol, v, margin, residual = _pivot_loop(rows[j], tol, limit)
        if status == 1:
            return flags, 1
        if status == 2:
            return flags, 2
        if w <= 2.0 * tol:
            if residual > cert_tol:
                return flags, 2
            for r in range(m):
                if sol[r] > tol:
                    in_basis[j, row_index[j, r]] = True
            has_basis[j] = True
        else:
            if not margin > 0.0:
                return flags, 2
            has_basis[j] = False
            flags[t] = True
    return flags, 0


class _CacheBank:
    """All n plane caches stacked into arrays for the compiled kernel."""

    def __init__(self, proj: np.ndarray, start: int):
        n, _, p = proj.shape
        bits = unpack(start, n)
        keep = ~np.eye(n, dtype=bool)
        self.row_index = np.nonzero(keep)[1].reshape(n, n - 1).astype(np.int64)
        rows = proj[keep].reshape(n, n - 1, p)
        norms = np.linalg.norm(rows, axis=2, keepdims=True)
        norms[norms == 0.0] = 1.0
        signs = np.where(bits, 1.0, -1.0)[self.row_index]
        self.rows = np.ascontiguousarray(rows / norms * signs[:, :, None])
        self.state = np.tile(bits, (n, 1))
        self.in_basis = np.zeros((n, n), dtype=np.bool_)
        self.has_basis = np.zeros(n, dtype=np.bool_)
        self.counters = np.zeros(3, dtype=np.int64)

    def facets(self, code: int, candidates: np.ndarray, n: int) -> np.ndarray:
        flags, err = _expand(unpack(code, n), candidates, self.rows, self.row_index,
                             self.state, self.in_basis, self.has_basis, self.counters,
                             FEASIBILITY_TOL, CERTIFICATE_TOL)
        if err == 1:
            raise IterationLimit("phase 1 did not finish")
        if err == 2:
            raise NumericallyAmbiguous("facet test could not be certified")
        return flags


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1, low
        mask ^= low


def cone_search(cloud: CenteredCloud, seed: int = 0, invert_facet: bool = False,
                trace: list | None = None, engine: str = "compiled") -> DepthResult:
    """Breadth-first search with generation pruning on a general-position cloud.

    ``invert_facet`` negates the facet test (fault injection for the
    cross-check command). ``trace``, if given, collects (parent, child)
    code pairs for every cone inserted into the next generation.
    ``engine="python"`` runs the facet tests through :func:`is_facet` one
    :class:`PlaneCache` at a time instead of the compiled kernel; both
    engines take identical decisions.
    """
    n = cloud.n
    full = (1 << n) - 1
    _, start = initial_direction(cloud, seed)
    b0 = start.value
    diag = SearchDiagnostics()
    if engine == "compiled":
        bank = _CacheBank(stacked_projections(cloud), b0)
    elif engine == "python":
        caches = project_all(cloud)
        for cache in caches:
            cache.sync(b0)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    best, best_code = n, b0
    last_generation = (n + 2) // 2
    topical = deque([b0])
    generation = 1
    while topical:
        diag.generations = generation
        expand = generation < last_generation
        future = set()
        while topical:
            b = topical.popleft()
            diag.cones_visited += 1
            ones = b.bit_count()
            if min(ones, n - ones) < best:
                best, best_code = min(ones, n - ones), b
            if not expand:
                continue
            unflipped = ~(b ^ b0) & full
            if engine == "compiled":
                cand = np.flatnonzero(unpack(unflipped, n))
                hits = cand[bank.facets(b, cand, n) != invert_facet].tolist()
            else:
                hits = [j for j, _ in _iter_bits(unflipped)
                        if is_facet(caches[j], b, diag) != invert_facet]
            for j in hits:
                child = b ^ (1 << j)
                if child in future:
                    diag.duplicate_inserts += 1
                    continue
                future.add(child)
                if trace is not None:
                    trace.append((b, child))
        topical = deque(sorted(future))
        generation += 1
    if engine == "compiled":
        diag.facet_tests, diag.cache_hits, diag.lp_calls = (int(c) for c in bank.counters)
    code = ConeCode(best_code, n)
    witness = None if invert_facet else _witness(code, cloud)
    return DepthResult(best, n, code, witness, diag)


def enumerate_cones(cloud: CenteredCloud, seed: int = 0) -> tuple[set, SearchDiagnostics]:
    """Visit every cone of the segmentation (no pruning, mirrors included).

    Diagnostic only: the number of cones of n central hyperplanes in
    general position in R^d is 2 * sum_{k<d} C(n-1, k).
    """
    n = cloud.n
    _, start = initial_direction(cloud, seed)
    caches = project_all(cloud)
    diag = SearchDiagnostics()
    seen = {start.value}
    queue = deque([start.value])
    while queue:
        b = queue.popleft()
        diag.cones_visited += 1
        for j in range(n):
            if is_facet(caches[j], b, diag):
                child = b ^ (1 << j)
                if child not in seen:
                    seen.add(child)
                    queue.append(child)
    return seen, diag


def hull_precheck(cloud: CenteredCloud) -> DepthResult | None:
    """Depth-0 shortcut: returns a result if the origin is outside conv(X)."""
    outcome = origin_in_hull(cloud.points)
    if outcome.in_hull:
        return None
    diag = SearchDiagnostics(precheck=True)
    return DepthResult(0, cloud.n, ConeCode(0, cloud.n), -outcome.witness, diag)


def run_with_perturbation(cloud: PointCloud, query, solver, *, seed: int = 0,
                          perturb_magnitude: float = DEFAULT_PERTURBATION,
                          skip_hull_precheck: bool = False,
                          max_restarts: int = DEFAULT_RESTARTS,
                          require_general_position: bool = True) -> DepthResult:
    """Center, precheck, perturb if needed, and run ``solver(centered, seed)``.

    Data points equal to the query lie in every closed halfspace through
    it, so they are set aside and added to the count of the remaining
    points; no jitter is involved. The hull precheck runs on the
    unperturbed data so that a jitter can never turn a zero depth into a
    positive one. Degeneracies raised by the solver trigger a fresh
    seeded perturbation of the original centered cloud, up to
    ``max_restarts`` times.
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    centered = center(cloud, query)
    at_query = ~np.any(centered.points, axis=1)
    if at_query.any():
        return _with_coincident(centered, at_query, solver, seed=seed,
                                perturb_magnitude=perturb_magnitude,
                                skip_hull_precheck=skip_hull_precheck,
                                max_restarts=max_restarts,
                                require_general_position=require_general_position)
    if not skip_hull_precheck:
        shortcut = hull_precheck(centered)
        if shortcut is not None:
            return shortcut
    work = centered
    if require_general_position and not check_general_position(centered, seed=seed).ok:
        work = perturb(centered, perturb_magnitude, [seed, 0])
    last_error = None
    for attempt in range(max_restarts + 1):
        if attempt:
            work = perturb(centered, perturb_magnitude, [seed, attempt])
        if work.perturbed:
            # Near-dependence relative to a fixed tolerance is common for far
            # outliers; the solver's own zero-projection and LP checks decide.
            report = check_general_position(work, seed=seed)
            if not report.ok:
                log.info("jittered cloud still near-degenerate at %s", report.violation)
        try:
            # on the line every direction is +-1, so normalizing only creates ties
            result = solver(work.directions() if work.d > 1 else work, seed + attempt)
        except DegeneracyDetected as exc:
            log.info("degeneracy on attempt %d: %s", attempt, exc)
            last_error = exc
            continue
        diag = replace(result.diagnostics, restarts=attempt, perturbed=work.perturbed)
        return replace(result, diagnostics=diag)
    raise DegeneracyDetected(f"unresolved after {max_restarts} restarts: {last_error}")


def _with_coincident(centered: CenteredCloud, at_query: np.ndarray, solver, **options) -> DepthResult:
    n, m = centered.n, int(at_query.sum())
    rest = centered.points[~at_query]
    if len(rest) == 0:
        w = np.zeros(centered.d)
        w[0] = 1.0
        return DepthResult(m, n, ConeCode((1 << n) - 1, n), w, SearchDiagnostics(coincident=m))
    sub = run_with_perturbation(PointCloud(rest), np.zeros(centered.d), solver, **options)
    w = sub.witness_direction
    code = None if w is None else ConeCode(pack(centered.points @ w >= 0), n)
    diag = replace(sub.diagnostics, coincident=m)
    return DepthResult(sub.count + m, n, code, w, diag, sub.method)


def tukey_depth(cloud, query, seed: int = 0, perturb_magnitude: float = DEFAULT_PERTURBATION,
                skip_hull_precheck: bool = False, max_restarts: int = DEFAULT_RESTARTS) -> DepthResult:
    """Exact Tukey depth of ``query`` with respect to ``cloud`` (needs d < n)."""
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    if cloud.d >= cloud.n:
        raise DimensionError(f"need d < n, got d={cloud.d}, n={cloud.n}")
    return run_with_perturbation(cloud, query, cone_search, seed=seed,
                                 perturb_magnitude=perturb_magnitude,
                                 skip_hull_precheck=skip_hull_precheck,
                                 max_restarts=max_restarts)


__all__ = [
    "DepthResult",
    "SearchDiagnostics",
    "cone_search",
    "enumerate_cones",
    "hull_precheck",
    "interior_direction",
    "is_facet",
    "run_with_perturbation",
    "tukey_depth",
]
