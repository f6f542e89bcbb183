import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deepcore.errors import DimensionError, ExhaustedRetries, ZeroProjection
from deepcore.geometry import (
    MIN_PERTURBATION,
    CenteredCloud,
    ConeCode,
    PointCloud,
    center,
    check_general_position,
    complement_basis,
    initial_direction,
    pack,
    perturb,
    project_all,
    project_onto_plane,
    sign_vector,
    stacked_projections,
    unpack,
)

from conftest import TRIANGLE, gaussian_cloud


def cc(points):
    pts = np.asarray(points, dtype=float)
    return CenteredCloud(pts, np.zeros(pts.shape[1]))


class TestCenter:
    def test_point_at_query_is_flagged(self):
        c = center(PointCloud([[1.0, 1.0]]), [1.0, 1.0])
        assert np.array_equal(c.points, [[0.0, 0.0]])
        report = check_general_position(c)
        assert not report.ok and report.violation == (0,)

    def test_shift(self):
        c = center(PointCloud([[2.0, 3.0], [0.0, 1.0]]), [1.0, 1.0])
        assert np.array_equal(c.points, [[1.0, 2.0], [-1.0, 0.0]])
        assert np.array_equal(c.uncenter(), [[2.0, 3.0], [0.0, 1.0]])

    def test_zero_shift(self):
        c = center(PointCloud(TRIANGLE), [0.0, 0.0])
        assert np.array_equal(c.points, TRIANGLE)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            center(PointCloud(TRIANGLE), [0.0, 0.0, 0.0])

    def test_points_are_read_only(self):
        c = center(PointCloud(TRIANGLE), [0.0, 0.0])
        with pytest.raises(ValueError):
            c.points[0, 0] = 5.0

    def test_one_dimensional_input(self):
        cloud = PointCloud([1.0, 2.0, 3.0])
        assert (cloud.n, cloud.d) == (3, 1)

    def test_directions_are_unit(self):
        c = cc([[3.0, 4.0], [0.0, -2.0]])
        assert np.allclose(c.directions().points, [[0.6, 0.8], [0.0, -1.0]])


class TestGeneralPosition:
    def test_dependent_pair(self):
        report = check_general_position(cc([[1, 0], [2, 0], [0, 1]]))
        assert not report.ok
        assert report.violation == (0, 1)

    def test_triangle_ok(self):
        assert check_general_position(cc(TRIANGLE)).ok

    def test_gaussian_exhaustive(self):
        report = check_general_position(gaussian_cloud(0, 10, 3), mode="exhaustive")
        assert report.ok and report.exhaustive

    def test_sampled_mode(self):
        report = check_general_position(gaussian_cloud(1, 12, 3), mode="sampled", samples=50)
        assert report.ok and not report.exhaustive

    def test_sampled_catches_planted_dependence(self):
        pts = np.array([[1.0, 0.0], [2.0, 0.0]])
        report = check_general_position(cc(pts), mode="sampled", seed=3)
        assert not report.ok

    def test_fewer_points_than_dimensions(self):
        assert check_general_position(cc([[1, 0, 0], [0, 1, 0]])).ok
        assert not check_general_position(cc([[1, 0, 0], [2, 0, 0]])).ok


class TestPerturb:
    def test_zero_magnitude_clamped(self, caplog):
        c = cc([[1, 0], [2, 0], [0, 1]])
        with caplog.at_level(logging.WARNING):
            out = perturb(c, 0.0, seed=1)
        assert "rejected" in caplog.text
        shift = np.abs(out.points - c.points).max()
        assert 0 < shift <= MIN_PERTURBATION * math.sqrt(5)

    def test_deterministic(self):
        c = gaussian_cloud(2, 8, 3)
        a, b = perturb(c, 1e-7, seed=9), perturb(c, 1e-7, seed=9)
        assert a.points.tobytes() == b.points.tobytes()
        assert a.perturbed

    def test_breaks_collinearity(self):
        out = perturb(cc([[1, 0], [2, 0], [0, 1]]), 1e-7, seed=42)
        assert check_general_position(out).ok

    def test_bounded(self):
        c = gaussian_cloud(3, 20, 2)
        out = perturb(c, 1e-6, seed=0)
        diag = np.linalg.norm(c.points.max(0) - c.points.min(0))
        assert np.abs(out.points - c.points).max() <= 1e-6 * diag

    def test_follows_permutation(self):
        c = gaussian_cloud(4, 9, 3)
        perm = np.random.default_rng(0).permutation(9)
        a = perturb(c, 1e-7, seed=5).points[perm]
        b = perturb(cc(c.points[perm]), 1e-7, seed=5).points
        assert np.array_equal(a, b)

    def test_duplicates_get_distinct_jitter(self):
        out = perturb(cc([[1.0, 1.0], [1.0, 1.0]]), 1e-7, seed=0)
        assert not np.array_equal(out.points[0], out.points[1])


class TestProjection:
    def test_axis_aligned_anchor(self):
        cache = project_onto_plane(cc([[0, 0, 1], [1, 2, 3]]), 0)
        assert np.allclose(cache.initial[1], [1.0, 2.0])

    def test_self_projection_is_zero(self):
        cache = project_onto_plane(gaussian_cloud(5, 6, 3), 2)
        assert np.array_equal(cache.initial[2], [0.0, 0.0])

    def test_diagonal_anchor(self):
        s = 1 / math.sqrt(2)
        cache = project_onto_plane(cc([[s, s], [1, -1]]), 0)
        assert abs(abs(cache.initial[1, 0]) - math.sqrt(2)) < 1e-14

    def test_zero_anchor(self):
        with pytest.raises(ZeroProjection):
            project_onto_plane(cc([[0, 0], [1, 0]]), 0)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_complement_basis_orthonormal(self, d):
        a = np.random.default_rng(d).standard_normal(d)
        b = complement_basis(a)
        assert b.shape == (d, d - 1)
        assert np.allclose(b.T @ b, np.eye(d - 1), atol=1e-14)
        assert np.allclose(a @ b, 0.0, atol=1e-14)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_stacked_matches_single(self, d):
        c = gaussian_cloud(d, 11, d)
        stacked = stacked_projections(c)
        for j in range(c.n):
            assert np.allclose(stacked[j], project_onto_plane(c, j).initial, atol=1e-14)

    def test_projection_preserves_norm_of_orthogonal_part(self):
        c = gaussian_cloud(7, 10, 3)
        for j, cache in enumerate(project_all(c)):
            u = c.points[j] / np.linalg.norm(c.points[j])
            residual = c.points - np.outer(c.points @ u, u)
            assert np.allclose(np.linalg.norm(cache.initial, axis=1),
                               np.linalg.norm(residual, axis=1), atol=1e-13)

    def test_lazy_sign_alignment(self):
        c = gaussian_cloud(8, 7, 3)
        cache = project_onto_plane(c, 0)
        assert cache.sync(0b1010101) == 0
        flipped = cache.sync(0b1010110)
        assert flipped == 0b0000011
        signs = np.where(unpack(0b1010110, 7), 1.0, -1.0)[1:]
        rows = c.points[1:] @ complement_basis(c.points[0])
        expected = rows / np.linalg.norm(rows, axis=1)[:, None] * signs[:, None]
        assert np.allclose(cache.lp_rows, expected, atol=1e-14)


class TestCodes:
    def test_triangle_code(self):
        r = np.array([0.995, 0.0995])
        code = sign_vector(cc(TRIANGLE), r / np.linalg.norm(r))
        assert str(code) == "110"

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_mirror_is_complement(self, seed):
        c = gaussian_cloud(seed, 10, 3)
        r = np.random.default_rng(seed).standard_normal(3)
        r /= np.linalg.norm(r)
        assert sign_vector(c, -r) == sign_vector(c, r).complement()

    def test_matches_dot_products(self):
        c = gaussian_cloud(11, 10, 3)
        r = np.random.default_rng(11).standard_normal(3)
        r /= np.linalg.norm(r)
        assert np.array_equal(sign_vector(c, r).bits(), c.points @ r > 0)

    def test_non_unit_direction_rejected(self):
        with pytest.raises(ValueError):
            sign_vector(cc(TRIANGLE), np.array([2.0, 0.0]))

    def test_zero_projection(self):
        with pytest.raises(ZeroProjection):
            sign_vector(cc(TRIANGLE), np.array([0.0, 1.0]))

    @given(st.integers(0, 2**40 - 1))
    def test_pack_roundtrip(self, value):
        assert pack(unpack(value, 40)) == value

    def test_code_helpers(self):
        code = ConeCode.from_bits([1, 0, 1, 1])
        assert code.value == 0b1101 and str(code) == "1011"
        assert (code.ones, code.zeros, code.halfspace_count) == (3, 1, 1)
        assert code.flip(1) == ConeCode.from_bits([1, 1, 1, 1])
        assert code[0] == 1 and code[1] == 0
        with pytest.raises(ValueError):
            ConeCode(16, 4)


class TestInitialDirection:
    def test_one_dimension(self):
        c = cc([[1.0], [-2.0], [3.0]])
        r, code = initial_direction(c, seed=0)
        assert abs(r[0]) == 1.0
        assert np.array_equal(code.bits(), c.points[:, 0] * r[0] > 0)

    def test_triangle(self):
        _, code = initial_direction(cc(TRIANGLE), seed=7)
        assert code.ones in (1, 2)

    def test_duplicates_exhaust(self):
        with pytest.raises(ExhaustedRetries):
            initial_direction(cc([[1.0, 1.0], [1.0, 1.0], [-1, 0.5]]), seed=0)

    def test_reproducible(self):
        c = gaussian_cloud(12, 10, 3)
        a, b = initial_direction(c, 3), initial_direction(c, 3)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]
