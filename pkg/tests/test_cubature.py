import math

import numpy as np
import pytest
from scipy.special import roots_legendre

import config
from sphere.cubature import band_limits, build_cubature, integrate, sup_mesh_values, top_degree
from sphere.harmonic_basis import sph_harm_values
from sphere.spectral import alm_energy, points_synthesis, resize_alm
from sphere.sphere_geometry import angles_to_xyz
from utils.errors import ResourceCapError, ValidationFailure


class TestBuildCubature:

    @pytest.mark.parametrize("j", range(0, 5))
    def test_weights_positive_and_sum_to_area(self, j):
        grid = build_cubature(2.0, j)
        assert np.all(grid.weights > 0)
        assert integrate(grid, np.ones(grid.count)) == pytest.approx(4 * math.pi, abs=1e-12)

    def test_exact_degree(self):
        for j in range(0, 5):
            grid = build_cubature(2.0, j)
            assert grid.exact_degree == 2 * (2 ** (j + 1) - 1)
            assert grid.count == 2 ** (j + 1) * (2 ** (j + 2) - 1)

    def test_count_and_weight_scaling(self):
        counts = []
        for j in range(1, 6):
            grid = build_cubature(2.0, j)
            counts.append(grid.count)
            assert grid.count <= 8 * 4 ** j
            assert grid.weights.max() * 4 ** j <= 8.0
            assert grid.weights.mean() * 4 ** j >= 1.0 / 8.0
        slope = np.polyfit(np.arange(1, 6), np.log(counts), 1)[0]
        assert slope == pytest.approx(2 * math.log(2.0), rel=0.05)

    def test_polar_weights_shrink_faster_than_the_mean(self):
        # product grid: the polar ring's weight goes like 2^{-3j}, not 4^{-j}
        scaled = [build_cubature(2.0, j).weights.min() * 4 ** j for j in range(1, 7)]
        ratios = np.array(scaled[1:]) / np.array(scaled[:-1])
        assert np.all((ratios > 0.45) & (ratios < 0.6))
        assert scaled[-1] < 0.05

    def test_non_integer_bandwidth(self):
        grid = build_cubature(1.5, 3)
        assert grid.exact_degree == 2 * top_degree(1.5, 3)
        assert integrate(grid, np.ones(grid.count)) == pytest.approx(4 * math.pi, abs=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValidationFailure):
            build_cubature(1.0, 2)
        with pytest.raises(ValidationFailure):
            build_cubature(2.0, -1)

    def test_resource_cap(self, monkeypatch):
        with pytest.raises(ResourceCapError):
            build_cubature(2.0, 5, cap=100)
        monkeypatch.setattr(config, "GRID_POINT_CAP", 50)
        with pytest.raises(ResourceCapError):
            build_cubature(2.0, 3)

    def test_ring_order_and_point_access(self):
        grid = build_cubature(2.0, 2)
        assert np.all(np.diff(grid.ring_theta) > 0)
        p = grid.point(grid.n_phi + 1)
        assert p.theta == pytest.approx(grid.ring_theta[1])
        assert p.phi == pytest.approx(2 * math.pi / grid.n_phi)
        with pytest.raises(ValidationFailure):
            grid.point(grid.count)


class TestBands:

    def test_band_limits(self):
        assert band_limits(2.0, 0) == (1, 1)
        assert band_limits(2.0, 3) == (5, 15)
        assert band_limits(3.0, 2) == (4, 26)


class TestIntegrate:

    def test_zero_and_polynomial(self):
        grid = build_cubature(2.0, 2)
        assert integrate(grid, np.zeros(grid.count)) == 0.0
        z = grid.xyz[:, 2]
        assert integrate(grid, z ** 2) == pytest.approx(4 * math.pi / 3, abs=1e-10)

    def test_linearity(self):
        grid = build_cubature(2.0, 2)
        rng = np.random.default_rng(42)
        f, g = rng.standard_normal((2, grid.count))
        assert integrate(grid, 2.5 * f - 0.7 * g) == pytest.approx(
            2.5 * integrate(grid, f) - 0.7 * integrate(grid, g), abs=1e-12)

    def test_length_mismatch(self):
        grid = build_cubature(2.0, 1)
        with pytest.raises(ValidationFailure):
            integrate(grid, np.ones(grid.count + 1))

    def test_harmonics_integrate_to_zero(self):
        grid = build_cubature(2.0, 2)
        for l in range(1, grid.exact_degree + 1):
            for m in (0, l // 2, l):
                y = sph_harm_values(l, m, grid.theta, grid.phi)
                assert abs(grid.weights @ y) < 1e-10

    def test_single_harmonic_norm(self):
        grid = build_cubature(2.0, 2)
        y = sph_harm_values(3, 2, grid.theta, grid.phi)
        assert integrate(grid, np.abs(y) ** 2) == pytest.approx(1.0, abs=1e-10)

    def test_random_inner_products(self):
        grid = build_cubature(2.0, 3)
        half = grid.exact_degree // 2
        rng = np.random.default_rng(42)
        for _ in range(200):
            l1, l2 = rng.integers(0, half + 1, size=2)
            m1 = int(rng.integers(-l1, l1 + 1))
            m2 = int(rng.integers(-l2, l2 + 1))
            y1 = sph_harm_values(int(l1), m1, grid.theta, grid.phi)
            y2 = sph_harm_values(int(l2), m2, grid.theta, grid.phi)
            expected = 1.0 if (l1, m1) == (l2, m2) else 0.0
            assert abs(grid.weights @ (y1 * np.conj(y2)) - expected) < 1e-9


class TestTransforms:

    def test_analysis_inverts_synthesis(self, random_alm):
        grid = build_cubature(2.0, 3)
        lmax = top_degree(2.0, 3)
        alm = random_alm(np.random.default_rng(42), lmax)
        back = grid.analyze(grid.synthesize(alm), lmax)
        np.testing.assert_allclose(back, alm, atol=1e-11)

    def test_parseval(self, random_alm):
        grid = build_cubature(2.0, 3)
        alm = random_alm(np.random.default_rng(7), 7)
        values = grid.synthesize(alm)
        assert integrate(grid, values ** 2) == pytest.approx(alm_energy(alm), rel=1e-12)

    def test_scattered_points_match_grid(self, random_alm):
        grid = build_cubature(2.0, 2)
        alm = random_alm(np.random.default_rng(3), 7)
        np.testing.assert_allclose(points_synthesis(alm, grid.xyz), grid.synthesize(alm), atol=1e-12)

    def test_sup_mesh_matches_pointwise_values(self, random_alm):
        grid = build_cubature(2.0, 2)
        alm = random_alm(np.random.default_rng(5), 7)
        dense = sup_mesh_values(alm, grid)
        assert dense.size == 4 * grid.count
        x, _ = roots_legendre(2 * grid.n_theta)
        theta = np.arccos(np.sort(x)[::-1])
        phis = 2 * math.pi * np.arange(2 * grid.n_phi) / (2 * grid.n_phi)
        xyz = angles_to_xyz(np.repeat(theta, phis.size), np.tile(phis, theta.size))
        np.testing.assert_allclose(dense, points_synthesis(alm, xyz), atol=1e-12)

    def test_resize_keeps_low_degrees(self, random_alm):
        alm = random_alm(np.random.default_rng(1), 6)
        big = resize_alm(alm, 10)
        np.testing.assert_array_equal(big[:7, :7], alm)
        assert not np.any(big[7:])
