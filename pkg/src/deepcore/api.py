"""Method dispatch shared by the applications and the command line."""

from __future__ import annotations

from dataclasses import replace
from functools import partial

from .cones import DEFAULT_RESTARTS, DepthResult, cone_search, run_with_perturbation
from .errors import DimensionError
from .geometry import DEFAULT_PERTURBATION, PointCloud, center
from .oracles import ApproxConfig, approximate_depth, combinatorial_depth, planar_depth

METHODS = ("exact", "comb", "planar", "approx")


def compute_depth(cloud, query, method: str = "exact", *, seed: int = 0,
                  perturb_magnitude: float = DEFAULT_PERTURBATION,
                  skip_hull_precheck: bool = False, approx_directions: int = 1000,
                  max_restarts: int = DEFAULT_RESTARTS,
                  invert_facet: bool = False) -> DepthResult:
    """Depth of ``query`` w.r.t. ``cloud`` by the named method."""
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(cloud)
    if method == "approx":
        config = ApproxConfig(approx_directions, seed)
        return approximate_depth(center(cloud, query), config)
    if method == "exact":
        if cloud.d >= cloud.n:
            raise DimensionError(f"need d < n, got d={cloud.d}, n={cloud.n}")
        solver = partial(cone_search, invert_facet=invert_facet)
    elif method == "comb":
        solver = lambda c, s: combinatorial_depth(c)  # noqa: E731
    elif method == "planar":
        if cloud.d != 2:
            raise DimensionError("the planar method needs d = 2")
        solver = lambda c, s: planar_depth(c)  # noqa: E731
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    result = run_with_perturbation(cloud, query, solver, seed=seed,
                                   perturb_magnitude=perturb_magnitude,
                                   skip_hull_precheck=skip_hull_precheck,
                                   max_restarts=max_restarts)
    return replace(result, method=method)
