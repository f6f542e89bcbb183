"""Exact Tukey depth by breadth-first search over the cone segmentation."""

__version__ = "0.1.0"

from .api import METHODS, compute_depth
from .applications import (DdPlot, DepthField, PcaResult, classical_pca, dd_plot,
                           depth_field, depth_weighted_mean, robust_pca, rsgn_transform)
from .cones import DepthResult, SearchDiagnostics, cone_search, enumerate_cones, tukey_depth
from .errors import (DegeneracyDetected, DeepcoreError, DimensionError, ExhaustedRetries,
                     IterationLimit, NumericallyAmbiguous, Unrealizable, ZeroProjection)
from .geometry import (CenteredCloud, ConeCode, PointCloud, center, check_general_position,
                       perturb)
from .oracles import ApproxConfig, approximate_depth, combinatorial_depth, planar_depth
from .simplex import FeasibilityOutcome, FeasibilityProblem, origin_in_hull

__all__ = [
    "METHODS", "compute_depth", "DdPlot", "DepthField", "PcaResult", "classical_pca", "dd_plot",
    "depth_field", "depth_weighted_mean", "robust_pca", "rsgn_transform", "DepthResult",
    "SearchDiagnostics", "cone_search", "enumerate_cones", "tukey_depth", "DegeneracyDetected",
    "DeepcoreError", "DimensionError", "ExhaustedRetries", "IterationLimit",
    "NumericallyAmbiguous", "Unrealizable", "ZeroProjection", "CenteredCloud", "ConeCode",
    "PointCloud", "center", "check_general_position", "perturb", "ApproxConfig",
    "approximate_depth", "combinatorial_depth", "planar_depth", "FeasibilityOutcome",
    "FeasibilityProblem", "origin_in_hull",
]
