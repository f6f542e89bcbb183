"""Phase-1 simplex test for "is the origin in the convex hull of these rows?".

The feasibility system is

    Y' lam = 0,   sum(lam) = 1,   lam >= 0

for an (m, p) matrix ``Y``. Phase 1 adds one artificial variable per
equation and minimizes their sum. A zero optimum gives convex weights
(origin in the hull); a positive optimum w gives dual values y with
``Y_i . (-y[:p]) >= w > 0`` for every row, i.e. a strictly separating
direction, read off the reduced costs of the artificial columns.

Rows are rescaled to unit length before solving. Membership of the origin
in the hull is invariant under positive row scaling, and the weights are
mapped back to the caller's scale afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import IterationLimit, NumericallyAmbiguous

PIVOT_TOL = 1e-12
FEASIBILITY_TOL = 1e-9
CERTIFICATE_TOL = 1e-9


@dataclass(frozen=True)
class FeasibilityProblem:
    rows: np.ndarray
    tolerance: float = FEASIBILITY_TOL

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError(f"expected an (m, p) array with m >= 1, got {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows must be finite")
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True)
class FeasibilityOutcome:
    in_hull: bool
    weights: np.ndarray | None = None
    basis: tuple[int, ...] | None = None
    witness: np.ndarray | None = None
    objective: float = 0.0
    iterations: int = 0
    warm: bool = False

    @property
    def kind(self) -> str:
        return "InHull" if self.in_hull else "NotInHull"


def basis_still_valid(basis, flipped) -> bool:
    """True iff no flipped index belongs to the cached hull basis.

    Both arguments may be bitset integers or iterables of indices. A
    cache entry (anything with ``hull_basis_mask``) is accepted in place
    of ``basis``.
    """
    if hasattr(basis, "hull_basis_mask"):
        basis = basis.hull_basis_mask
    if not isinstance(basis, int):
        basis = sum(1 << int(i) for i in basis)
    if not isinstance(flipped, int):
        flipped = sum(1 << int(i) for i in flipped)
    return basis & flipped == 0


def _in_hull(weights_unit, norms, basis, iterations=0, warm=False):
    lam = np.zeros_like(norms)
    idx = list(basis)
    lam[idx] = np.clip(weights_unit[idx], 0.0, None) / norms[idx]
    lam /= lam.sum()
    return FeasibilityOutcome(True, lam, tuple(sorted(idx)), None, 0.0, iterations, warm)


def _solve_on_basis(unit_rows, basis):
    """Convex weights supported on ``basis`` solving the equality system, or None."""
    idx = list(basis)
    a = np.vstack([unit_rows[idx].T, np.ones(len(idx))])
    rhs = np.zeros(a.shape[0])
    rhs[-1] = 1.0
    sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    if np.max(np.abs(a @ sol - rhs)) > FEASIBILITY_TOL or sol.min() < -FEASIBILITY_TOL:
        return None
    full = np.zeros(unit_rows.shape[0])
    full[idx] = sol
    return full


def _check_certificate(rows, outcome, scale):
    residual = np.max(np.abs(rows.T @ outcome.weights)) if rows.shape[1] else 0.0
    if residual > CERTIFICATE_TOL * scale:
        raise NumericallyAmbiguous(f"hull certificate residual {residual:.3g}")
    return outcome


def origin_in_hull(problem, warm_start=None, method: str = "auto",
                   max_iterations: int | None = None) -> FeasibilityOutcome:
    """Decide whether 0 lies in the convex hull of the rows of ``problem``.

    ``problem`` is a :class:`FeasibilityProblem` or an (m, p) array.
    ``warm_start`` is a previously returned basis; if the weights it
    supports are still feasible they are returned without pivoting.
    ``method="simplex"`` disables the closed forms used for p <= 1.
    """
    if not isinstance(problem, FeasibilityProblem):
        problem = FeasibilityProblem(problem)
    rows = problem.rows
    m, p = rows.shape
    norms = np.linalg.norm(rows, axis=1)
    scale = float(norms.max())
    tiny = np.flatnonzero(norms <= 1e-300 + PIVOT_TOL * scale)
    if tiny.size or p == 0:
        i = int(tiny[0]) if tiny.size else 0
        lam = np.zeros(m)
        lam[i] = 1.0
        return FeasibilityOutcome(True, lam, (i,), None, 0.0, 0)
    unit = rows / norms[:, None]

    if warm_start:
        sol = _solve_on_basis(unit, warm_start)
        if sol is not None:
            support = [i for i in warm_start if sol[i] > problem.tolerance] or list(warm_start)
            return _check_certificate(rows, _in_hull(sol, norms, support, warm=True), scale)

    if p == 1 and method == "auto":
        u = unit[:, 0]
        pos, neg = np.flatnonzero(u > 0), np.flatnonzero(u < 0)
        if pos.size and neg.size:
            i, k = int(pos[0]), int(neg[0])
            sol = np.zeros(m)
            sol[[i, k]] = 0.5
            return _check_certificate(rows, _in_hull(sol, norms, (i, k)), scale)
        return FeasibilityOutcome(False, witness=np.array([1.0 if pos.size else -1.0]),
                                  objective=1.0)

    return _phase_one(rows, unit, norms, scale, problem.tolerance, max_iterations)


@njit(cache=True)
def _pivot_loop(unit, tol, limit):  # pragma: no cover - compiled
    """Phase-1 tableau simplex on unit rows.

    Returns (status, objective, pivots, primal weights, separating
    direction, margin, residual). status: 0 ok, 1 iteration limit,
    2 unbounded ray (cannot happen for well-formed input).
    """
    m, p = unit.shape
    neq = p + 1
    width = m + neq
    t = np.zeros((neq + 1, width + 1))
    for i in range(m):
        for k in range(p):
            t[k, i] = unit[i, k]
        t[p, i] = 1.0
        s = 1.0
        for k in range(p):
            s += unit[i, k]
        t[neq, i] = -s
    for k in range(neq):
        t[k, m + k] = 1.0
    t[p, width] = 1.0
    t[neq, width] = -1.0
    basis = np.empty(neq, dtype=np.int64)
    for k in range(neq):
        basis[k] = m + k
    bland_after = 3 * (m + p)
    it = 0
    status = 0
    while True:
        j = -1
        if it < bland_after:
            best = -PIVOT_TOL
            for c in range(width):
                if t[neq, c] < best:
                    best = t[neq, c]
                    j = c
        else:
            for c in range(width):
                if t[neq, c] < -PIVOT_TOL:
                    j = c
                    break
        if j < 0:
            break
        # ratio test, ties to the smallest basic variable index
        r = -1
        best_ratio = np.inf
        for k in range(neq):
            if t[k, j] > PIVOT_TOL:
                ratio = t[k, width] / t[k, j]
                if r < 0 or ratio < best_ratio - PIVOT_TOL:
                    r = k
                    best_ratio = ratio
                elif ratio <= best_ratio + PIVOT_TOL and basis[k] < basis[r]:
                    r = k
                    best_ratio = min(ratio, best_ratio)
        if r < 0:
            status = 2
            break
        piv = t[r, j]
        for c in range(width + 1):
            t[r, c] /= piv
        for k in range(neq + 1):
            if k != r:
                f = t[k, j]
                if f != 0.0:
                    for c in range(width + 1):
                        t[k, c] -= f * t[r, c]
        basis[r] = j
        it += 1
        if it >= limit:
            status = 1
            break

    w = -t[neq, width]
    sol = np.zeros(m)
    for k in range(neq):
        if basis[k] < m:
            sol[basis[k]] = max(t[k, width], 0.0)
    v = np.zeros(p)
    vn = 0.0
    for k in range(p):
        v[k] = t[neq, m + k] - 1.0  # -(dual value)
        vn += v[k] * v[k]
    vn = np.sqrt(vn)
    margin = -np.inf
    if vn > 0.0:
        for k in range(p):
            v[k] /= vn
        margin = np.inf
        for i in range(m):
            s = 0.0
            for k in range(p):
                s += unit[i, k] * v[k]
            if s < margin:
                margin = s
    total = sol.sum()
    residual = np.inf
    if total > 0.0:
        residual = 0.0
        for k in range(p):
            s = 0.0
            for i in range(m):
                s += unit[i, k] * sol[i]
            residual = max(residual, abs(s) / total)
    return status, w, it, sol, v, margin, residual


def _phase_one(rows, unit, norms, scale, tol, max_iterations):
    m, p = unit.shape
    limit = 50 * (m + p + 1) + 100 if max_iterations is None else max_iterations
    status, w, it, sol, v, margin, _ = _pivot_loop(np.ascontiguousarray(unit), tol, limit)
    if status == 1:
        raise IterationLimit(f"phase 1 did not finish in {limit} pivots")
    if status == 2:
        raise NumericallyAmbiguous("unbounded phase-1 direction")

    if w <= tol * (1.0 + 1.0):
        support = [i for i in range(m) if sol[i] > tol] or [int(np.argmax(sol))]
        outcome = _in_hull(sol, norms, support, it)
        residual = np.max(np.abs(rows.T @ outcome.weights))
        if residual > CERTIFICATE_TOL * scale:
            polished = _solve_on_basis(unit, support)
            if polished is not None:
                outcome = _in_hull(polished, norms, support, it)
        return _check_certificate(rows, outcome, scale)

    if not margin > 0.0:
        raise NumericallyAmbiguous(f"witness fails verification (margin {margin:.3g})")
    return FeasibilityOutcome(False, witness=v, objective=float(w), iterations=it)


def hull_verdict(unit, tol: float = FEASIBILITY_TOL):
    """Lean variant of :func:`origin_in_hull` for unit-length rows.

    Returns ``(in_hull, support, pivots)``; ``support`` lists the rows with
    positive weight when the origin is in the hull, else ``None``. Used in
    the inner loop of the cone search, where the full outcome object is
    not needed.
    """
    m, p = unit.shape
    if p == 0:
        return True, (0,), 0
    status, w, it, sol, v, margin, residual = _pivot_loop(unit, tol, 50 * (m + p + 1) + 100)
    if status == 1:
        raise IterationLimit("phase 1 did not finish")
    if status == 2:
        raise NumericallyAmbiguous("unbounded phase-1 direction")
    if w <= 2.0 * tol:
        if residual > CERTIFICATE_TOL:
            raise NumericallyAmbiguous(f"hull certificate residual {residual:.3g}")
        return True, tuple(np.flatnonzero(sol > tol).tolist()), it
    if not margin > 0.0:
        raise NumericallyAmbiguous(f"witness fails verification (margin {margin:.3g})")
    return False, None, it
