"""Hierarchical airspace model: stacked layer boxes, PPP deployment of
sub-UAVs, central-UAV placement and the nearest-neighbour distance law."""

import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from . import parameters
from .exceptions import ConfigurationError, DomainError
from .rng import AIRSPACE_STREAM, substream

logger = logging.getLogger(__name__)


class Layer(str, Enum):
    LOW = 'low'
    HIGH = 'high'

    @property
    def index(self) -> int:
        return 0 if self is Layer.LOW else 1


LayerLike = Union[Layer, str]


def _as_layer(layer: LayerLike) -> Layer:
    try:
        return Layer(layer)
    except ValueError:
        raise ConfigurationError(f"unknown layer {layer!r}, expected 'low' or 'high'", key='layer')


@dataclass(frozen=True)
class LayerBox:
    """Axis-aligned box [x_min, x_max] x [y_min, y_max] x [z_min, z_max] in meters."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.x_min, self.y_min, self.z_min])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.x_max, self.y_max, self.z_max])

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0

    def contains(self, points) -> np.ndarray:
        """Boolean mask of points (n, 3) inside the closed box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n i.i.d. uniform points, shape (n, 3)."""
        return rng.uniform(self.lower, self.upper, size=(int(n), 3))


@dataclass(frozen=True)
class AirspaceConfig:
    """Geometry of the two stacked airspaces.

    Densities are volumetric intensities (UAVs per cubic meter); use
    count_to_intensity() to convert an expected per-layer count.
    """

    half_extent_x: float = parameters.HALF_EXTENT_M
    half_extent_y: float = parameters.HALF_EXTENT_M
    layer_thickness: float = parameters.LAYER_THICKNESS_M
    isolation_thickness: float = parameters.ISOLATION_THICKNESS_M
    density_low: float = 0.0
    density_high: float = 0.0
    gs_position: Tuple[float, float, float] = (0.0, 0.0, parameters.GS_HEIGHT_M)
    central_low_height: float = parameters.CENTRAL_LOW_HEIGHT_M
    central_high_height: float = parameters.CENTRAL_HIGH_HEIGHT_M
    max_service_range: Optional[float] = None
    central_offset: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        values = {
            'half_extent_x': self.half_extent_x,
            'half_extent_y': self.half_extent_y,
            'layer_thickness': self.layer_thickness,
            'isolation_thickness': self.isolation_thickness,
            'density_low': self.density_low,
            'density_high': self.density_high,
            'central_low_height': self.central_low_height,
            'central_high_height': self.central_high_height,
        }
        for name in ('gs_position', 'central_offset'):
            for i, v in enumerate(getattr(self, name)):
                values[f'{name}[{i}]'] = v
        if self.max_service_range is not None:
            values['max_service_range'] = self.max_service_range

        for name, value in values.items():
            if not math.isfinite(value):
                raise ConfigurationError(f"{name} must be finite, got {value}", key=name)

        for name in ('half_extent_x', 'half_extent_y', 'layer_thickness', 'isolation_thickness'):
            if values[name] <= 0:
                raise ConfigurationError(f"{name} must be positive, got {values[name]}", key=name)
        for name in ('density_low', 'density_high'):
            if values[name] < 0:
                raise ConfigurationError(f"{name} must be non-negative, got {values[name]}", key=name)
        if self.max_service_range is not None and self.max_service_range <= 0:
            raise ConfigurationError("max_service_range must be positive", key='max_service_range')

        if not 0 <= self.central_low_height <= self.layer_thickness:
            raise ConfigurationError(
                f"central_low_height {self.central_low_height} outside low layer [0, {self.layer_thickness}]",
                key='central_low_height',
            )
        high_floor = self.layer_thickness + self.isolation_thickness
        if not high_floor <= self.central_high_height <= self.total_height:
            raise ConfigurationError(
                f"central_high_height {self.central_high_height} outside high layer "
                f"[{high_floor}, {self.total_height}]",
                key='central_high_height',
            )

    @property
    def total_height(self) -> float:
        """L_z = 2*dH + H_0."""
        return 2 * self.layer_thickness + self.isolation_thickness

    @property
    def low_box(self) -> LayerBox:
        return LayerBox(
            -self.half_extent_x, self.half_extent_x,
            -self.half_extent_y, self.half_extent_y,
            0.0, self.layer_thickness,
        )

    @property
    def high_box(self) -> LayerBox:
        return LayerBox(
            -self.half_extent_x, self.half_extent_x,
            -self.half_extent_y, self.half_extent_y,
            self.layer_thickness + self.isolation_thickness, self.total_height,
        )

    def box(self, layer: LayerLike) -> LayerBox:
        return self.low_box if _as_layer(layer) is Layer.LOW else self.high_box

    def density(self, layer: LayerLike) -> float:
        return self.density_low if _as_layer(layer) is Layer.LOW else self.density_high

    def central_position(self, layer: LayerLike) -> np.ndarray:
        height = self.central_low_height if _as_layer(layer) is Layer.LOW else self.central_high_height
        return np.array([self.central_offset[0], self.central_offset[1], height])

    def service_range(self, layer: LayerLike) -> float:
        """R*, falling back to the layer box diagonal."""
        if self.max_service_range is not None:
            return self.max_service_range
        return self.box(layer).diagonal


@dataclass
class Deployment:
    """One realisation of both layers plus their central UAVs."""

    low_uavs: np.ndarray
    high_uavs: np.ndarray
    central_low: np.ndarray
    central_high: np.ndarray
    seed: int
    config: Optional[AirspaceConfig] = field(default=None, repr=False)

    def uavs(self, layer: LayerLike) -> np.ndarray:
        return self.low_uavs if _as_layer(layer) is Layer.LOW else self.high_uavs

    def central(self, layer: LayerLike) -> np.ndarray:
        return self.central_low if _as_layer(layer) is Layer.LOW else self.central_high


def count_to_intensity(count: float, volume: float) -> float:
    """
    Convert an expected number of UAVs in a layer to a volumetric intensity.

    Args:
        count: Expected number of sub-UAVs in the layer
        volume: Layer volume in cubic meters

    Returns:
        Intensity in UAVs per cubic meter
    """
    if count < 0 or not math.isfinite(count):
        raise ConfigurationError(f"density count must be finite and non-negative, got {count}")
    if volume <= 0:
        raise ConfigurationError(f"layer volume must be positive, got {volume}")
    return count / volume


def sample_ppp(config: AirspaceConfig, layer: LayerLike, seed: int) -> np.ndarray:
    """
    Draw one homogeneous PPP realisation inside a layer box.

    Args:
        config: Airspace geometry and densities
        layer: 'low' or 'high'
        seed: Run seed; each layer draws from its own substream

    Returns:
        Array of shape (n, 3), n ~ Poisson(density * volume)
    """
    layer = _as_layer(layer)
    box = config.box(layer)
    rng = substream(seed, AIRSPACE_STREAM, layer.index)
    mean_count = config.density(layer) * box.volume
    count = rng.poisson(mean_count)
    logger.debug(f"PPP {layer.value}: mean {mean_count:.2f}, drew {count}")
    return box.sample_uniform(rng, count)


def deploy(config: AirspaceConfig, seed: int) -> Deployment:
    """Sample both layers and place the central UAVs."""
    return Deployment(
        low_uavs=sample_ppp(config, Layer.LOW, seed),
        high_uavs=sample_ppp(config, Layer.HIGH, seed),
        central_low=config.central_position(Layer.LOW),
        central_high=config.central_position(Layer.HIGH),
        seed=seed,
        config=config,
    )


def link_distances(deployment: Deployment, layer: LayerLike) -> np.ndarray:
    """Euclidean distances d_i from every sub-UAV of a layer to its central UAV."""
    points = deployment.uavs(layer)
    if len(points) == 0:
        return np.zeros(0)
    return np.linalg.norm(points - deployment.central(layer), axis=1)


def write_deployment_csv(deployment: Deployment, path: Union[str, Path]) -> Path:
    """
    Export a deployment as CSV with one row per UAV.

    Central UAVs are tagged central_low / central_high in the layer column.
    """
    path = Path(path)
    rows = [('central_low', *deployment.central_low), ('central_high', *deployment.central_high)]
    rows += [('low', *p) for p in deployment.low_uavs]
    rows += [('high', *p) for p in deployment.high_uavs]
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['layer', 'x_m', 'y_m', 'z_m'])
        for layer, x, y, z in rows:
            writer.writerow([layer, repr(float(x)), repr(float(y)), repr(float(z))])
    return path


def _check_distance_args(d, density: float) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise DomainError("distance must be non-negative")
    if density < 0:
        raise DomainError(f"density must be non-negative, got {density}")
    return d


def _scalar_or_array(result: np.ndarray):
    return float(result) if np.ndim(result) == 0 else result


def nn_distance_cdf(d, density: float):
    """
    CDF of the distance to the nearest neighbour under a 3-D PPP.

    Args:
        d: Distance(s) in meters, >= 0
        density: Intensity in UAVs per cubic meter

    Returns:
        1 - exp(-(4/3) pi density d^3), scalar or array matching d
    """
    d = _check_distance_args(d, density)
    return _scalar_or_array(-np.expm1(-(4.0 / 3.0) * np.pi * density * d ** 3))


def nn_distance_pdf(d, density: float):
    """Density of the nearest-neighbour distance: 4 pi density d^2 exp(-(4/3) pi density d^3)."""
    d = _check_distance_args(d, density)
    return _scalar_or_array(4.0 * np.pi * density * d ** 2 * np.exp(-(4.0 / 3.0) * np.pi * density * d ** 3))


def nn_distance_ppf(u, density: float):
    """Inverse CDF; density 0 maps every u to +inf."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)):
        raise DomainError("quantile must lie in [0, 1)")
    if density < 0:
        raise DomainError(f"density must be non-negative, got {density}")
    if density == 0:
        return _scalar_or_array(np.full_like(u, np.inf))
    return _scalar_or_array(np.cbrt(-np.log1p(-u) * 3.0 / (4.0 * np.pi * density)))
