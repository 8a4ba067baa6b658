"""Tests for layer geometry, PPP deployment and the nearest-neighbour law."""

import math
import os
import sys

import numpy as np
import pytest
from scipy import stats

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.airspace import (
    AirspaceConfig,
    Layer,
    LayerBox,
    count_to_intensity,
    deploy,
    link_distances,
    nn_distance_cdf,
    nn_distance_pdf,
    nn_distance_ppf,
    sample_ppp,
    write_deployment_csv,
)
from core.exceptions import ConfigurationError, DomainError


def small_airspace(count_low=20.0, count_high=0.0):
    """1 km cube layers so PPP draws stay cheap."""
    volume = 1000.0 * 1000.0 * 1000.0
    return AirspaceConfig(
        half_extent_x=500.0,
        half_extent_y=500.0,
        layer_thickness=1000.0,
        isolation_thickness=1000.0,
        central_low_height=500.0,
        central_high_height=2500.0,
        density_low=count_to_intensity(count_low, volume),
        density_high=count_to_intensity(count_high, volume),
    )


class TestGeometry:
    """Layer boxes and central-UAV placement."""

    def test_reference_layers_stack(self):
        config = AirspaceConfig()
        assert config.low_box.z_min == 0.0
        assert config.low_box.z_max == 4500.0
        assert config.high_box.z_min == 5500.0
        assert config.high_box.z_max == config.total_height == 10000.0

    def test_layer_volume(self):
        box = LayerBox(-5000, 5000, -5000, 5000, 0, 4500)
        assert box.volume == pytest.approx(10000.0 * 10000.0 * 4500.0)
        assert box.contains([[0, 0, 100], [6000, 0, 100]]).tolist() == [True, False]

    def test_central_positions_inside_layers(self):
        config = AirspaceConfig()
        assert config.low_box.contains(config.central_position('low'))[0]
        assert config.high_box.contains(config.central_position(Layer.HIGH))[0]

    def test_central_outside_layer_rejected(self):
        with pytest.raises(ConfigurationError) as excinfo:
            AirspaceConfig(central_low_height=5000.0)
        assert excinfo.value.key == 'central_low_height'

    def test_negative_density_rejected(self):
        with pytest.raises(ConfigurationError):
            AirspaceConfig(density_low=-1e-9)

    def test_unknown_layer_rejected(self):
        with pytest.raises(ConfigurationError):
            AirspaceConfig().box('middle')

    def test_service_range_defaults_to_diagonal(self):
        config = AirspaceConfig()
        assert config.service_range('low') == pytest.approx(config.low_box.diagonal)
        assert AirspaceConfig(max_service_range=3000.0).service_range('low') == 3000.0

    def test_count_to_intensity(self):
        assert count_to_intensity(20, 4.5e11) == pytest.approx(20 / 4.5e11)
        with pytest.raises(ConfigurationError):
            count_to_intensity(-1, 1.0)


class TestDeployment:
    """PPP sampling."""

    def test_zero_density_gives_empty_layer(self):
        points = sample_ppp(small_airspace(count_low=0.0), 'low', seed=3)
        assert points.shape == (0, 3)

    def test_points_inside_box(self):
        config = small_airspace(count_low=200.0)
        points = sample_ppp(config, 'low', seed=1)
        assert len(points) > 0
        assert config.low_box.contains(points).all()

    def test_same_seed_same_deployment(self):
        config = small_airspace(count_low=50.0, count_high=50.0)
        a, b = deploy(config, 9), deploy(config, 9)
        np.testing.assert_array_equal(a.low_uavs, b.low_uavs)
        np.testing.assert_array_equal(a.high_uavs, b.high_uavs)

    def test_layers_are_independent_streams(self):
        config = small_airspace(count_low=50.0, count_high=50.0)
        d = deploy(config, 9)
        assert not np.array_equal(d.low_uavs[:1, :2], d.high_uavs[:1, :2])

    def test_count_mean_and_variance(self):
        """Poisson counts: mean and variance both near the expected count."""
        expected = 20.0
        config = small_airspace(count_low=expected)
        draws = 2000
        counts = np.array([len(sample_ppp(config, 'low', seed)) for seed in range(draws)])
        assert abs(counts.mean() - expected) <= 3 * math.sqrt(expected / draws)
        variance_sd = math.sqrt((2 * expected ** 2 + expected) / draws)
        assert abs(counts.var(ddof=1) - expected) <= 3 * variance_sd

    def test_link_distances(self):
        config = small_airspace(count_low=30.0)
        d = deploy(config, 4)
        distances = link_distances(d, 'low')
        assert distances.shape == (len(d.low_uavs),)
        np.testing.assert_allclose(distances, np.linalg.norm(d.low_uavs - d.central_low, axis=1))

    def test_write_deployment_csv(self, tmp_path):
        d = deploy(small_airspace(count_low=5.0, count_high=5.0), 2)
        path = write_deployment_csv(d, tmp_path / 'deployment.csv')
        lines = path.read_text().splitlines()
        assert lines[0] == 'layer,x_m,y_m,z_m'
        assert lines[1].startswith('central_low,')
        assert lines[2].startswith('central_high,')
        assert len(lines) == 3 + len(d.low_uavs) + len(d.high_uavs)


class TestNearestNeighbourLaw:
    """CDF, density and inverse of the 3-D nearest-neighbour distance."""

    def test_cdf_edges(self):
        assert nn_distance_cdf(0.0, 1e-9) == 0.0
        assert nn_distance_cdf(1e6, 1e-9) == pytest.approx(1.0)
        assert nn_distance_cdf(100.0, 0.0) == 0.0

    def test_cdf_value(self):
        density = 1e-7
        d = 200.0
        expected = 1 - math.exp(-4.0 / 3.0 * math.pi * density * d ** 3)
        assert nn_distance_cdf(d, density) == pytest.approx(expected, rel=1e-12)

    def test_pdf_is_derivative_of_cdf(self):
        density, d, h = 1e-7, 150.0, 1e-3
        numeric = (nn_distance_cdf(d + h, density) - nn_distance_cdf(d - h, density)) / (2 * h)
        assert nn_distance_pdf(d, density) == pytest.approx(numeric, rel=1e-6)

    def test_ppf_inverts_cdf(self):
        density = 3e-8
        u = np.array([0.0, 0.1, 0.5, 0.9, 0.999])
        np.testing.assert_allclose(nn_distance_cdf(nn_distance_ppf(u, density), density), u, atol=1e-12)

    def test_negative_distance_rejected(self):
        with pytest.raises(DomainError):
            nn_distance_cdf(-1.0, 1e-9)

    def test_empirical_nearest_neighbour_matches_law(self):
        """KS distance between simulated nearest-neighbour distances and the CDF."""
        count = 5000.0
        config = small_airspace(count_low=count)
        density = config.density_low
        center = config.low_box.center
        samples = []
        for seed in range(2000):
            points = sample_ppp(config, 'low', seed)
            samples.append(np.min(np.linalg.norm(points - center, axis=1)))
        statistic, _ = stats.kstest(samples, lambda d: nn_distance_cdf(d, density))
        assert statistic < 0.05
