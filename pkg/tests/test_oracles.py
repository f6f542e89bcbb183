import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deepcore.api import compute_depth
from deepcore.cones import cone_search
from deepcore.errors import DegeneracyDetected, DimensionError
from deepcore.geometry import CenteredCloud
from deepcore.oracles import (
    ApproxConfig,
    approximate_depth,
    combinatorial_depth,
    planar_depth,
    subset_normals,
    univariate_depth,
)

from conftest import TRIANGLE, gaussian_cloud


def cc(points):
    pts = np.asarray(points, dtype=float)
    return CenteredCloud(pts, np.zeros(pts.shape[1]))


class TestCombinatorial:
    def test_triangle(self, triangle):
        res = combinatorial_depth(triangle)
        assert res.count == 1 and res.rational == "1/3"
        assert np.sum(triangle.points @ res.witness_direction >= 0) == 1

    def test_open_halfspace(self):
        assert combinatorial_depth(cc([[1, 0.2], [2, -1], [0.5, 3]])).count == 0

    def test_gaussian_three_dimensions(self):
        c = gaussian_cloud(0, 10, 3)
        assert combinatorial_depth(c).count == cone_search(c).count

    def test_normals_are_orthogonal(self):
        pts = np.random.default_rng(1).standard_normal((6, 4))
        subsets = np.array([[0, 1, 2], [1, 3, 5]])
        normals = subset_normals(pts, subsets)
        for s, nrm in zip(subsets, normals):
            assert np.allclose(pts[s] @ nrm, 0.0, atol=1e-12)

    def test_coplanar_subset_rejected(self):
        with pytest.raises(DegeneracyDetected):
            combinatorial_depth(cc([[1, 0], [2, 0], [0, 1], [-1, -1]]))

    @given(st.integers(0, 2**31), st.integers(2, 4))
    @settings(max_examples=40, deadline=None)
    def test_witness_holds_count(self, seed, d):
        c = gaussian_cloud(seed, d + 5, d)
        res = combinatorial_depth(c)
        assert np.sum(c.points @ res.witness_direction >= 0) == res.count


class TestUnivariate:
    def test_direct_count(self):
        assert univariate_depth([-1.0, 2.0, 3.0], 0.0).rational == "1/3"

    def test_extreme(self):
        assert univariate_depth([-1.0, 2.0, 3.0], 5.0).count == 0

    def test_median_of_the_others(self):
        v = np.random.default_rng(0).uniform(size=101)
        med = np.median(v)
        assert univariate_depth(v[v != med], med).rational == "50/100"

    @pytest.mark.parametrize("method", ["comb", "exact"])
    def test_median_counts_itself(self, method):
        # the median is a data point; it lies in every closed halfspace
        # through itself, on top of the 50 others on the smaller side
        v = np.random.default_rng(0).uniform(size=101)
        res = compute_depth(v[:, None], [np.median(v)], method)
        assert res.rational == "51/101"
        assert res.diagnostics.coincident == 1 and not res.diagnostics.perturbed

    def test_tie(self):
        with pytest.raises(DegeneracyDetected):
            univariate_depth([1.0, 2.0], 2.0)

    @given(st.integers(0, 2**31), st.integers(3, 30))
    @settings(max_examples=30, deadline=None)
    def test_matches_one_dimensional_search(self, seed, n):
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(n)
        z = 0.5 * rng.standard_normal()
        c = cc((v - z)[:, None])
        assert univariate_depth(v, z).count == cone_search(c).count == combinatorial_depth(c).count


class TestPlanar:
    def test_triangle(self, triangle):
        assert planar_depth(triangle).rational == "1/3"

    def test_square(self):
        jitter = np.random.default_rng(0).uniform(-1e-3, 1e-3, (4, 2))
        square = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]]) + jitter
        assert planar_depth(cc(square - [0.01, 0.02])).rational == "1/4"

    def test_one_side(self):
        assert planar_depth(cc([[1, 1], [2, 0.5], [0.3, 2]])).count == 0

    def test_needs_plane(self):
        with pytest.raises(DimensionError):
            planar_depth(gaussian_cloud(0, 5, 3))

    def test_collinear_with_query(self):
        with pytest.raises(DegeneracyDetected):
            planar_depth(cc([[1, 0], [-2, 0], [0, 1]]))

    @given(st.integers(0, 2**31), st.integers(3, 40))
    @settings(max_examples=50, deadline=None)
    def test_agrees_with_oracle(self, seed, n):
        c = gaussian_cloud(seed, n, 2)
        res = planar_depth(c)
        assert res.count == combinatorial_depth(c).count
        assert np.sum(c.points @ res.witness_direction >= 0) == res.count


class TestApproximate:
    def test_witness_direction_gives_exact(self):
        c = gaussian_cloud(3, 12, 3)
        exact = cone_search(c)
        approx = approximate_depth(c, directions=exact.witness_direction)
        assert approx.count == exact.count

    def test_triangle(self, triangle):
        assert approximate_depth(triangle, ApproxConfig(1000, seed=1)).rational == "1/3"

    @given(st.integers(0, 2**31), st.sampled_from([1, 10, 100]))
    @settings(max_examples=40, deadline=None)
    def test_upper_bound(self, seed, k):
        c = gaussian_cloud(seed, 9, 3)
        assert approximate_depth(c, ApproxConfig(k, seed)).count >= cone_search(c).count

    def test_zero_projection_counts_both_sides(self):
        c = cc([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        res = approximate_depth(c, directions=[[0.0, 1.0]])
        assert res.count == 2

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ApproxConfig(0)
