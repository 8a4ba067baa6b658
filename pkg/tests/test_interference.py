"""Tests for the quasi-Monte Carlo interference integral."""

import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.airspace import LayerBox
from core.exceptions import DomainError
from core.interference import InterferenceIntegrator, ray_exit_distance

CUBE = LayerBox(-500.0, 500.0, -500.0, 500.0, 0.0, 1000.0)
CUBE_CENTER = np.array([0.0, 0.0, 500.0])


class TestRayExit:

    def test_axis_directions(self):
        directions = np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(ray_exit_distance(CUBE_CENTER, directions, CUBE), [500.0, 500.0, 500.0])

    def test_off_center_origin(self):
        origin = np.array([400.0, 0.0, 500.0])
        d = ray_exit_distance(origin, np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]), CUBE)
        np.testing.assert_allclose(d, [100.0, 900.0])

    def test_diagonal_direction(self):
        direction = np.array([[1.0, 1.0, 1.0]]) / np.sqrt(3.0)
        assert ray_exit_distance(CUBE_CENTER, direction, CUBE)[0] == pytest.approx(500.0 * np.sqrt(3.0))


class TestIntegrator:

    def test_zero_k(self):
        integrator = InterferenceIntegrator(CUBE, CUBE_CENTER, 2.0, log2_points=8)
        assert integrator.integrate(0.0) == (0.0, 0.0)

    def test_large_k_approaches_volume(self):
        integrator = InterferenceIntegrator(CUBE, CUBE_CENTER, 2.0, log2_points=12)
        estimate, _ = integrator.integrate(1e30)
        assert estimate == pytest.approx(CUBE.volume, rel=1e-2)

    def test_monotone_in_k(self):
        integrator = InterferenceIntegrator(CUBE, CUBE_CENTER, 3.0, log2_points=12)
        values = [integrator.integrate(k)[0] for k in (1e2, 1e4, 1e6, 1e8)]
        assert values == sorted(values)
        assert values[-1] <= CUBE.volume * 1.01

    def test_matches_plain_monte_carlo(self):
        k = 200.0 ** 2
        integrator = InterferenceIntegrator(CUBE, CUBE_CENTER, 2.0, log2_points=13)
        estimate, std_error = integrator.integrate(k)

        rng = np.random.default_rng(42)
        points = CUBE.sample_uniform(rng, 400000)
        r = np.linalg.norm(points - CUBE_CENTER, axis=1)
        brute = CUBE.volume * np.mean(k / (r ** 2 + k))

        assert estimate == pytest.approx(brute, rel=2e-2)
        assert std_error < 0.01 * estimate

    def test_off_center_receiver(self):
        corner_side = np.array([450.0, 450.0, 50.0])
        inner = InterferenceIntegrator(CUBE, CUBE_CENTER, 2.0, log2_points=12).integrate(1e4)[0]
        edge = InterferenceIntegrator(CUBE, corner_side, 2.0, log2_points=12).integrate(1e4)[0]
        # less of the box lies close to a receiver near a corner
        assert edge < inner

    def test_same_seed_reproducible(self):
        a = InterferenceIntegrator(CUBE, CUBE_CENTER, 2.5, log2_points=10, seed=4).integrate(1e5)
        b = InterferenceIntegrator(CUBE, CUBE_CENTER, 2.5, log2_points=10, seed=4).integrate(1e5)
        assert a == b

    def test_receiver_outside_box(self):
        with pytest.raises(DomainError):
            InterferenceIntegrator(CUBE, [0.0, 0.0, 2000.0], 2.0)

    def test_negative_k(self):
        integrator = InterferenceIntegrator(CUBE, CUBE_CENTER, 2.0, log2_points=8)
        with pytest.raises(DomainError):
            integrator.integrate(-1.0)
