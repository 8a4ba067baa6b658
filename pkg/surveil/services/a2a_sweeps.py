"""Coverage and mean-SINR sweeps of the sub-UAV to central-UAV links."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from core.a2a_channel import (
    DensityPoint,
    coverage_analytic,
    coverage_monte_carlo,
    make_integrator,
    mean_sinr_vs_density,
)
from core.airspace import AirspaceConfig

logger = logging.getLogger(__name__)

DENSITY_HEADER = ('density_count', 'mean_sinr_db', 'mean_snr_db', 'trials')


@dataclass(frozen=True)
class CoveragePoint:
    value: float
    theta_db: float
    coverage_mc: float
    coverage_mc_stderr: float
    coverage_analytic: Optional[float] = None


def coverage_header(axis: str, analytic: bool):
    first = 'p_s_w' if axis == 'power' else 'delta'
    header = [first, 'theta_db']
    if analytic:
        header.append('coverage_analytic')
    return tuple(header + ['coverage_mc', 'coverage_mc_stderr'])


def coverage_row(point: CoveragePoint, analytic: bool):
    row = [point.value, point.theta_db]
    if analytic:
        row.append(point.coverage_analytic)
    return tuple(row + [point.coverage_mc, point.coverage_mc_stderr])


def run_coverage_sweep(
    settings,
    airspace: AirspaceConfig,
    axis: str,
    trials: int,
    seed: int,
    workers: int = 1,
) -> List[CoveragePoint]:
    """
    Coverage over (P_s or delta) x theta.

    Every point reuses the same seed, so Monte Carlo estimates share random
    numbers across the grid. Theta integrators are built once per delta.

    Args:
        settings: A2ASettings from the experiment config
        airspace: Layer geometry
        axis: 'power' sweeps settings.sub_tx_power_grid, 'pathloss' the delta grid
        trials: Monte Carlo trials per point
        seed: Run seed
        workers: Thread pool size
    """
    if axis == 'power':
        grid = [('p', value) for value in settings.sub_tx_power_grid]
    elif axis == 'pathloss':
        grid = [('d', value) for value in settings.path_loss_exponent_grid]
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")

    points = []
    for kind, value in grid:
        for theta_db in settings.threshold_grid_db:
            overrides = {'sub_tx_power': value} if kind == 'p' else {'path_loss_exponent': value}
            points.append((value, theta_db, settings.scenario(airspace, threshold_db=theta_db, **overrides)))

    service_range = airspace.service_range(settings.layer)
    integrators: Dict[float, object] = {}
    if settings.analytic:
        for _, _, scenario in points:
            delta = scenario.path_loss_exponent
            if delta not in integrators:
                integrators[delta] = make_integrator(scenario, seed=seed)

    def evaluate(item) -> CoveragePoint:
        value, theta_db, scenario = item
        mc = coverage_monte_carlo(scenario, trials, seed, settings.geometry_mode, max_distance=service_range)
        analytic = None
        if settings.analytic:
            analytic = coverage_analytic(
                scenario, integrator=integrators[scenario.path_loss_exponent], max_distance=service_range,
            ).probability
        logger.debug(f"{axis} {value:g}, theta {theta_db:g} dB: MC {mc.probability:.4f}, analytic {analytic}")
        return CoveragePoint(value, theta_db, mc.probability, mc.std_error, analytic)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(evaluate, points))

    if settings.analytic:
        worst = max(abs(p.coverage_analytic - p.coverage_mc) for p in results)
        logger.info(f"{axis} sweep: {len(results)} points, max |analytic - MC| = {worst:.4f}")
    return results


def run_density_sweep(settings, airspace: AirspaceConfig, trials: int, seed: int) -> List[DensityPoint]:
    """Mean SINR and SNR of a random sub-UAV for every density in the grid."""
    scenario = settings.scenario(airspace)
    points = mean_sinr_vs_density(scenario, settings.density_grid_count, trials, seed, settings.count_mode)
    finite = [p for p in points if not math.isnan(p.mean_sinr_db)]
    if finite:
        logger.info(
            f"density sweep: mean SINR {finite[0].mean_sinr_db:.1f} dB at {finite[0].density_count:g} "
            f"-> {finite[-1].mean_sinr_db:.1f} dB at {finite[-1].density_count:g}"
        )
    return points


def density_row(point: DensityPoint) -> Sequence:
    return (point.density_count, point.mean_sinr_db, point.mean_snr_db, point.trials)
