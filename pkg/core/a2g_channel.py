"""Curved-earth multi-ray model of the central-UAV to ground-station link.

One line-of-sight ray plus ground-reflected rays over a spherical earth:
reflection geometry, Fresnel coefficient (vertical polarisation),
divergence factor, field summation, path loss and SNR.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from . import parameters
from .exceptions import ConfigurationError, DomainError, GeometryError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class A2GParams:
    """Radio and geometry parameters of one A2G link, all in linear SI units."""

    frequency: float
    bandwidth: float
    tx_power: float
    total_gain: float
    uav_height: float
    gs_height: float = parameters.GS_HEIGHT_M
    earth_radius: float = parameters.EARTH_RADIUS_M
    rel_permittivity: float = parameters.REL_PERMITTIVITY
    conductivity: float = parameters.CONDUCTIVITY_S_PER_M
    noise_density: float = parameters.dbm_to_watts(parameters.NOISE_DENSITY_DBM_PER_HZ)
    beamwidth: float = parameters.BEAMWIDTH_RAD
    rice_factor: float = parameters.RICE_FACTOR
    vacuum_permittivity: float = parameters.VACUUM_PERMITTIVITY

    def __post_init__(self):
        for name in ('frequency', 'bandwidth', 'tx_power', 'total_gain', 'earth_radius',
                     'noise_density', 'vacuum_permittivity'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be positive and finite, got {value}", key=name)
        if not 0 < self.gs_height < self.uav_height:
            raise ConfigurationError(
                f"need 0 < gs_height < uav_height, got {self.gs_height} and {self.uav_height}",
                key='uav_height',
            )
        if not 0 < self.beamwidth < math.pi / 2:
            raise ConfigurationError(f"beamwidth must lie in (0, pi/2), got {self.beamwidth}", key='beamwidth')
        if self.rel_permittivity < 1:
            raise ConfigurationError(f"rel_permittivity must be >= 1, got {self.rel_permittivity}",
                                     key='rel_permittivity')
        if self.conductivity < 0:
            raise ConfigurationError(f"conductivity must be >= 0, got {self.conductivity}", key='conductivity')
        if self.rice_factor < 0:
            raise ConfigurationError(f"rice_factor must be >= 0, got {self.rice_factor}", key='rice_factor')

    @property
    def wavelength(self) -> float:
        return parameters.wavelength(self.frequency)

    @property
    def noise_power(self) -> float:
        """n_0 * B in watts."""
        return self.noise_density * self.bandwidth

    @property
    def max_rays(self) -> int:
        """Upper bound floor(pi / (2 * beamwidth)) on reflected rays."""
        return int(math.floor(math.pi / (2 * self.beamwidth)))

    def at_height(self, uav_height: float) -> 'A2GParams':
        return replace(self, uav_height=uav_height)


@dataclass(frozen=True)
class A2GLinkGeometry:
    """Solved geometry of the specular reflection.

    Arcs are measured along the earth surface from the sub-UAV point (s1)
    and from the ground-station foot (s2).
    """

    los_distance: float
    arc_total: float
    arc_uav_side: float
    arc_gs_side: float
    slant_uav_side: float
    slant_gs_side: float
    grazing_angle: float
    central_angle: float
    central_angle_uav_side: float
    central_angle_gs_side: float
    path_difference: float
    phase_difference: float

    @property
    def reflected_length(self) -> float:
        """R2 = r1 + r2."""
        return self.slant_uav_side + self.slant_gs_side


@dataclass(frozen=True)
class RayContribution:
    """One reflected ray.

    reflection_coeff_magnitude and reflection_coeff_phase describe the bare
    Fresnel coefficient; the effective coefficient is divergence times it.
    """

    reflection_coeff_magnitude: float
    reflection_coeff_phase: float
    divergence: float
    phase_difference: float

    def __post_init__(self):
        if not 0 <= self.reflection_coeff_magnitude <= 1 + 1e-12:
            raise DomainError(f"|Gamma| must lie in [0, 1], got {self.reflection_coeff_magnitude}")
        if not 0 < self.divergence <= 1 + 1e-12:
            raise DomainError(f"divergence must lie in (0, 1], got {self.divergence}")

    @property
    def field_term(self) -> complex:
        """D |Gamma| exp(-j (dphi - phase))."""
        magnitude = self.divergence * self.reflection_coeff_magnitude
        return magnitude * complex(np.exp(-1j * (self.phase_difference - self.reflection_coeff_phase)))


@dataclass(frozen=True)
class LinkBudget:
    received_power: float
    path_loss_db: float
    snr_db: float

    @property
    def deep_fade(self) -> bool:
        return is_deep_fade(self.received_power)


def _slant_leg(earth_radius: float, height: float, central_angle: float) -> float:
    # (a+h)^2 + a^2 - 2a(a+h)cos(phi), rewritten to keep precision for tiny phi
    return math.sqrt(height ** 2 + 4 * earth_radius * (earth_radius + height) * math.sin(central_angle / 2) ** 2)


def _los_distance(params: A2GParams, central_angle: float) -> float:
    a, h, hg = params.earth_radius, params.uav_height, params.gs_height
    return math.sqrt((h - hg) ** 2 + 4 * (a + h) * (a + hg) * math.sin(central_angle / 2) ** 2)


def solve_geometry(params: A2GParams, ground_arc: float) -> A2GLinkGeometry:
    """
    Solve the specular reflection point and path difference of the link.

    Args:
        params: Link parameters (heights, earth radius, frequency)
        ground_arc: Great-circle arc s between the UAV and GS sub-points, meters

    Returns:
        A2GLinkGeometry

    Raises:
        GeometryError: reflection point infeasible or grazing angle <= 0
    """
    if not (math.isfinite(ground_arc) and ground_arc > 0):
        raise DomainError(f"ground_arc must be positive, got {ground_arc}")

    a = params.earth_radius
    h, hg = params.uav_height, params.gs_height
    s = ground_arc

    w1 = s ** 2 / (4 * a * (h + hg))
    w2 = (h - hg) / (h + hg)
    arg = 1.5 * w2 * math.sqrt(3 * w1 / (w1 + 1) ** 3)
    if not -1.0 <= arg <= 1.0:
        raise GeometryError(f"no specular point for arc {s:.1f} m (arccos argument {arg:.4f})")
    # cos(pi/3 + arccos(x)/3) == sin(arcsin(x)/3); the sine form keeps w3 exact when w1 -> 0
    w3 = 2 * math.sqrt((w1 + 1) / (3 * w1)) * math.sin(math.asin(arg) / 3)

    s1 = s * (1 + w3) / 2
    s2 = s - s1
    if not 0 < s1 < s:
        raise GeometryError(f"reflection point outside the link (s1={s1:.1f} m, s={s:.1f} m)")

    psi = (h + hg) * (1 - w1 * (1 + w2 ** 2)) / s
    if psi <= 0:
        raise GeometryError(f"grazing angle {psi:.3g} rad <= 0, link beyond the radio horizon")
    if psi >= math.pi / 2:
        raise GeometryError(f"grazing angle {psi:.3g} rad >= pi/2")

    phi, phi1, phi2 = s / a, s1 / a, s2 / a
    ds = 2 * s1 * s2 * psi ** 2 / s

    return A2GLinkGeometry(
        los_distance=_los_distance(params, phi),
        arc_total=s,
        arc_uav_side=s1,
        arc_gs_side=s2,
        slant_uav_side=_slant_leg(a, h, phi1),
        slant_gs_side=_slant_leg(a, hg, phi2),
        grazing_angle=psi,
        central_angle=phi,
        central_angle_uav_side=phi1,
        central_angle_gs_side=phi2,
        path_difference=ds,
        phase_difference=2 * math.pi * ds / params.wavelength,
    )


def exact_path_difference(geom: A2GLinkGeometry) -> float:
    """R2 - R1 from the solved legs, for comparison with the small-angle path difference."""
    return geom.reflected_length - geom.los_distance


def reflection_coefficient(params: A2GParams, grazing_angle: float) -> complex:
    """
    Earth reflection coefficient for vertical polarisation.

    Args:
        params: Supplies rel_permittivity, conductivity, frequency
        grazing_angle: psi in (0, pi/2]

    Returns:
        Complex Gamma, |Gamma| <= 1
    """
    if not 0 < grazing_angle <= math.pi / 2:
        raise DomainError(f"grazing angle must lie in (0, pi/2], got {grazing_angle}")
    b = params.conductivity / (2 * math.pi * params.frequency * params.vacuum_permittivity)
    eps_c = complex(params.rel_permittivity, -b)
    sin_psi = math.sin(grazing_angle)
    root = np.sqrt(eps_c - math.cos(grazing_angle))
    return complex((eps_c * sin_psi - root) / (eps_c * sin_psi + root))


def divergence_factor(geom: A2GLinkGeometry, earth_radius: float) -> float:
    """D = [1 + 2 r1 r2 / (a (r1 + r2) sin psi)]^(-1/2)."""
    r1, r2 = geom.slant_uav_side, geom.slant_gs_side
    if r1 + r2 == 0:
        return 1.0
    term = 2 * r1 * r2 / (earth_radius * (r1 + r2) * math.sin(geom.grazing_angle))
    return (1 + term) ** -0.5


def specular_ray(params: A2GParams, geom: A2GLinkGeometry) -> RayContribution:
    """Build the single specular reflected ray of a solved geometry."""
    gamma = reflection_coefficient(params, geom.grazing_angle)
    return RayContribution(
        reflection_coeff_magnitude=min(abs(gamma), 1.0),
        reflection_coeff_phase=float(np.angle(gamma)),
        divergence=divergence_factor(geom, params.earth_radius),
        phase_difference=geom.phase_difference,
    )


def multiray_contributions(
    params: A2GParams,
    ground_arc: float,
    reflection_arcs: Sequence[float],
) -> List[RayContribution]:
    """
    Rays reflected at caller-chosen points along the link.

    Each arc s1 is measured from the UAV sub-point. The grazing angle of a
    ray is the elevation of the ground station seen from its reflection
    point; path difference, coefficient and divergence then use the same
    formulas as the specular ray.
    """
    if not reflection_arcs:
        raise ConfigurationError("multiray mode needs at least one reflection arc", key='reflection_arcs')
    if len(reflection_arcs) > params.max_rays:
        raise ConfigurationError(
            f"{len(reflection_arcs)} rays requested, beamwidth {params.beamwidth} allows {params.max_rays}",
            key='reflection_arcs',
        )

    a, h, hg = params.earth_radius, params.uav_height, params.gs_height
    s = ground_arc
    rays = []
    for s1 in reflection_arcs:
        if not 0 < s1 < s:
            raise GeometryError(f"reflection arc {s1} outside (0, {s})")
        s2 = s - s1
        phi1, phi2 = s1 / a, s2 / a
        r1, r2 = _slant_leg(a, h, phi1), _slant_leg(a, hg, phi2)
        # radial component of C->B: (a+hg)cos(phi2) - a
        psi = math.asin((hg - 2 * (a + hg) * math.sin(phi2 / 2) ** 2) / r2)
        if psi <= 0:
            raise GeometryError(f"ground station below the horizon of the reflection point at {s1} m")
        ds = 2 * s1 * s2 * psi ** 2 / s
        geom = A2GLinkGeometry(
            los_distance=_los_distance(params, s / a),
            arc_total=s,
            arc_uav_side=s1,
            arc_gs_side=s2,
            slant_uav_side=r1,
            slant_gs_side=r2,
            grazing_angle=psi,
            central_angle=s / a,
            central_angle_uav_side=phi1,
            central_angle_gs_side=phi2,
            path_difference=ds,
            phase_difference=2 * math.pi * ds / params.wavelength,
        )
        rays.append(specular_ray(params, geom))
    return rays


def friis_power(params: A2GParams, distance: float) -> float:
    """Free-space received power P_c G_g lambda^2 / (4 pi R)^2."""
    return params.tx_power * params.total_gain * (params.wavelength / (4 * math.pi * distance)) ** 2


def received_power(
    params: A2GParams,
    geom: A2GLinkGeometry,
    rays: Sequence[RayContribution],
    multiray: bool = False,
) -> float:
    """
    Received power at the ground station, LoS plus reflected rays.

    Args:
        params: Link parameters
        geom: Solved geometry (supplies R1)
        rays: Reflected rays; empty means LoS only
        multiray: When set, an empty ray list is an error

    Returns:
        P_G in watts
    """
    if not rays and multiray:
        raise ConfigurationError("multiray mode requested with an empty ray list", key='reflection_arcs')
    if len(rays) > params.max_rays:
        raise ConfigurationError(f"{len(rays)} rays exceed the beamwidth bound {params.max_rays}",
                                 key='reflection_arcs')
    field = 1 + sum((ray.field_term for ray in rays), 0j)
    return friis_power(params, geom.los_distance) * abs(field) ** 2


def is_deep_fade(p_g: float) -> bool:
    return not p_g > 0


def path_loss(params: A2GParams, p_g: float) -> float:
    """PL = -10 log10(P_G / P_c) in dB; +inf on a deep fade."""
    if is_deep_fade(p_g):
        return math.inf
    return -10 * math.log10(p_g / params.tx_power)


def snr(params: A2GParams, p_g: float) -> float:
    """SNR = 10 log10(P_G) - 10 log10(n_0 B) in dB; -inf on a deep fade."""
    if is_deep_fade(p_g):
        return -math.inf
    return 10 * math.log10(p_g) - 10 * math.log10(params.noise_power)


def link_budget(params: A2GParams, p_g: float) -> LinkBudget:
    return LinkBudget(received_power=p_g, path_loss_db=path_loss(params, p_g), snr_db=snr(params, p_g))


def rician_power_gains(rice_factor: float, rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Unit-mean Rician power gains.

    |h|^2 with h Rician of factor K is a scaled non-central chi-square with
    two degrees of freedom and non-centrality 2K.
    """
    if rice_factor < 0:
        raise DomainError(f"rice factor must be >= 0, got {rice_factor}")
    if math.isinf(rice_factor):
        return np.ones(n)
    return rng.noncentral_chisquare(2, 2 * rice_factor, size=n) / (2 * (rice_factor + 1))


def apply_rician_fading(p_g: float, rice_factor: float, seed: int, trials: int) -> float:
    """
    Fade-average a received power.

    Args:
        p_g: Deterministic received power in watts
        rice_factor: K >= 0; +inf leaves p_g untouched
        seed: RNG seed
        trials: Number of fading draws (>= 1)

    Returns:
        Mean of p_g * g over the draws
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if math.isinf(rice_factor):
        return p_g
    gains = rician_power_gains(rice_factor, np.random.default_rng(seed), trials)
    return float(p_g * gains.mean())


def evaluate_link(
    params: A2GParams,
    ground_arc: float,
    reflection_arcs: Optional[Sequence[float]] = None,
):
    """Solve geometry and received power for one link; returns (geometry, rays, P_G)."""
    geom = solve_geometry(params, ground_arc)
    if reflection_arcs:
        rays = multiray_contributions(params, ground_arc, reflection_arcs)
    else:
        rays = [specular_ray(params, geom)]
    return geom, rays, received_power(params, geom, rays, multiray=bool(reflection_arcs))
