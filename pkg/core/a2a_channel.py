"""Stochastic air-to-air layer: SINR realisations, Monte Carlo coverage,
the analytic coverage integral and the density sweep of mean SINR."""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import parameters
from .airspace import LayerBox, nn_distance_ppf
from .exceptions import ConfigurationError, DomainError, NumericalError
from .interference import InterferenceIntegrator
from .rng import A2A_STREAM, substream

logger = logging.getLogger(__name__)

GEOMETRY_MODES = ('sphere_law', 'box')
COUNT_MODES = ('poisson', 'fixed')

MC_CHUNK = 20000
MIN_MC_TRIALS = 1000

# Laplace-term tolerance: relative error of exp(-lambda * Theta), or this absolute error
LAPLACE_RTOL = 5e-3
LAPLACE_ATOL = 1e-6

GRID_START = 25
GRID_MAX_LEVELS = 6
GRID_TOL = 1e-4


@dataclass(frozen=True)
class A2AScenario:
    """Radio parameters for one airspace layer, linear units throughout."""

    sub_tx_power: float
    total_gain: float
    noise_power: float
    path_loss_exponent: float
    threshold: float
    density: float
    box: LayerBox
    fading_shape: float = 1.0
    central_position: Optional[tuple] = None

    def __post_init__(self):
        if not self.sub_tx_power > 0:
            raise ConfigurationError(f"sub_tx_power must be positive, got {self.sub_tx_power}", key='p_s_w')
        if not self.total_gain > 0:
            raise ConfigurationError(f"total_gain must be positive, got {self.total_gain}", key='g_a_dbi')
        if not self.noise_power >= 0:
            raise ConfigurationError(f"noise_power must be >= 0, got {self.noise_power}", key='noise_dbm')
        if not parameters.DELTA_MIN <= self.path_loss_exponent <= parameters.DELTA_MAX:
            raise ConfigurationError(
                f"path loss exponent must lie in [{parameters.DELTA_MIN}, {parameters.DELTA_MAX}], "
                f"got {self.path_loss_exponent}",
                key='delta',
            )
        if not self.threshold > 0:
            raise ConfigurationError(f"threshold must be positive in linear units, got {self.threshold}",
                                     key='theta_db')
        if not self.density >= 0:
            raise ConfigurationError(f"density must be >= 0, got {self.density}", key='density_count')
        if not self.fading_shape > 0:
            raise ConfigurationError(f"fading shape must be positive, got {self.fading_shape}", key='iota')

    @property
    def receiver(self) -> np.ndarray:
        if self.central_position is None:
            return self.box.center
        return np.asarray(self.central_position, dtype=float)


@dataclass(frozen=True)
class CoverageResult:
    probability: float
    method: str
    trials: Optional[int] = None
    std_error: Optional[float] = None
    error_bound: Optional[float] = None


@dataclass(frozen=True)
class DensityPoint:
    density_count: float
    mean_sinr_db: float
    mean_snr_db: float
    trials: int


def sample_fading(rng: np.random.Generator, shape: float, size) -> np.ndarray:
    """Unit-mean Gamma(shape, 1/shape) power gains; shape 1 is Rayleigh (Exp(1))."""
    if shape == 1.0:
        return rng.exponential(1.0, size)
    return rng.gamma(shape, 1.0 / shape, size)


def sinr_samples(
    scenario: A2AScenario,
    desired_distance: float,
    interferer_distances: Sequence[float],
    seed,
    size: int,
    desired_fading: Optional[float] = None,
) -> np.ndarray:
    """
    Draw SINR values for a fixed link geometry.

    Args:
        scenario: Radio parameters
        desired_distance: d_0 in meters
        interferer_distances: Distances of the interfering sub-UAVs
        seed: Seed or Generator
        size: Number of fading realisations
        desired_fading: Fix rho_0 instead of drawing it

    Returns:
        Array of `size` linear SINR values
    """
    distances = np.asarray(interferer_distances, dtype=float).reshape(-1)
    if not desired_distance > 0 or np.any(distances <= 0):
        raise DomainError("link distances must be positive (co-located UAVs)")

    rng = np.random.default_rng(seed)
    delta = scenario.path_loss_exponent
    if desired_fading is None:
        rho0 = sample_fading(rng, scenario.fading_shape, size)
    else:
        rho0 = np.full(size, float(desired_fading))
    signal = scenario.sub_tx_power * scenario.total_gain * rho0 * desired_distance ** -delta

    if distances.size:
        rho = sample_fading(rng, scenario.fading_shape, (size, distances.size))
        interference = scenario.total_gain * np.sum(rho * distances ** -delta, axis=1)
    else:
        interference = np.zeros(size)
    with np.errstate(divide='ignore'):
        return signal / (scenario.noise_power + scenario.sub_tx_power * interference)


def sinr_realization(
    scenario: A2AScenario,
    desired_distance: float,
    interferer_distances: Sequence[float],
    seed,
    desired_fading: Optional[float] = None,
) -> float:
    """One SINR draw: P_s G_a rho_0 d_0^-delta / (N_0 + P_s sum G_a rho_h d_h^-delta)."""
    return float(sinr_samples(scenario, desired_distance, interferer_distances, seed, 1, desired_fading)[0])


def _mc_chunk_sphere_law(scenario: A2AScenario, rng, n: int, max_distance: float) -> np.ndarray:
    box, center = scenario.box, scenario.receiver
    delta, lam = scenario.path_loss_exponent, scenario.density

    d0 = nn_distance_ppf(rng.random(n), lam) if lam > 0 else np.full(n, np.inf)
    d0 = np.atleast_1d(d0)
    served = d0 <= max_distance

    counts = rng.poisson(lam * box.volume, n)
    points = box.sample_uniform(rng, counts.sum())
    dist = np.linalg.norm(points - center, axis=1)
    rho = sample_fading(rng, scenario.fading_shape, dist.size)
    trial = np.repeat(np.arange(n), counts)
    with np.errstate(divide='ignore'):
        interference = np.bincount(trial, weights=scenario.total_gain * rho * dist ** -delta, minlength=n)

    rho0 = sample_fading(rng, scenario.fading_shape, n)
    with np.errstate(divide='ignore', invalid='ignore'):
        signal = scenario.sub_tx_power * scenario.total_gain * rho0 * d0 ** -delta
        gamma = signal / (scenario.noise_power + scenario.sub_tx_power * interference)
    return served & (gamma >= scenario.threshold)


def _mc_chunk_box(scenario: A2AScenario, rng, n: int, max_distance: float) -> np.ndarray:
    box, center = scenario.box, scenario.receiver
    delta, lam = scenario.path_loss_exponent, scenario.density

    counts = rng.poisson(lam * box.volume, n)
    points = box.sample_uniform(rng, counts.sum())
    dist = np.linalg.norm(points - center, axis=1)
    rho = sample_fading(rng, scenario.fading_shape, dist.size)
    trial = np.repeat(np.arange(n), counts)

    # desired link is the sub-UAV nearest the receiver
    order = np.lexsort((dist, trial))
    dist, rho, trial = dist[order], rho[order], trial[order]
    starts = np.cumsum(counts) - counts
    valid = counts > 0
    is_desired = np.zeros(dist.size, dtype=bool)
    is_desired[starts[valid]] = True

    with np.errstate(divide='ignore'):
        power = scenario.total_gain * rho * dist ** -delta
    interference = np.bincount(trial[~is_desired], weights=power[~is_desired], minlength=n)
    signal = np.zeros(n)
    signal[valid] = scenario.sub_tx_power * power[starts[valid]]
    nearest = np.full(n, np.inf)
    nearest[valid] = dist[starts[valid]]

    with np.errstate(divide='ignore', invalid='ignore'):
        gamma = signal / (scenario.noise_power + scenario.sub_tx_power * interference)
    success = valid & (nearest <= max_distance) & (gamma >= scenario.threshold)
    # trials without any sub-UAV carry no link and are dropped
    return success[valid]


def coverage_monte_carlo(
    scenario: A2AScenario,
    trials: int,
    seed: int,
    geometry_mode: str = 'sphere_law',
    max_distance: Optional[float] = None,
) -> CoverageResult:
    """
    Estimate P(gamma >= theta) by simulation.

    In sphere_law mode the desired distance follows the nearest-neighbour
    law and interferers form a PPP over the whole layer box, which is the
    model the analytic integral evaluates. In box mode the desired link is
    the nearest sub-UAV of an actual PPP draw and the rest interfere.

    Args:
        scenario: Radio parameters
        trials: Number of trials (>= 1000)
        seed: Run seed; chunk i draws from substream (seed, A2A, i)
        geometry_mode: 'sphere_law' or 'box'
        max_distance: Desired links longer than this fail; defaults to the box diagonal

    Returns:
        CoverageResult with binomial standard error
    """
    if trials < MIN_MC_TRIALS:
        raise ConfigurationError(f"Monte Carlo needs at least {MIN_MC_TRIALS} trials, got {trials}", key='trials')
    if geometry_mode not in GEOMETRY_MODES:
        raise ConfigurationError(f"unknown geometry mode {geometry_mode!r}", key='geometry_mode')
    if max_distance is None:
        max_distance = scenario.box.diagonal
    chunk_fn = _mc_chunk_sphere_law if geometry_mode == 'sphere_law' else _mc_chunk_box

    hits = 0
    used = 0
    for index, start in enumerate(range(0, trials, MC_CHUNK)):
        n = min(MC_CHUNK, trials - start)
        outcome = chunk_fn(scenario, substream(seed, A2A_STREAM, index), n, max_distance)
        hits += int(outcome.sum())
        used += outcome.size

    if used == 0:
        logger.warning("No trial produced a sub-UAV; coverage reported as 0")
        return CoverageResult(0.0, f'monte_carlo_{geometry_mode}', trials=0, std_error=0.0)
    p = hits / used
    return CoverageResult(
        probability=p,
        method=f'monte_carlo_{geometry_mode}',
        trials=used,
        std_error=math.sqrt(p * (1 - p) / used),
    )


def _check_laplace_error(lam: float, theta: float, theta_err: float, label: str):
    value = math.exp(-lam * theta)
    rel = lam * theta_err
    if rel > LAPLACE_RTOL and value * rel > LAPLACE_ATOL:
        raise NumericalError(f"interference integral missed tolerance at {label}",
                             estimate=value, error_bound=value * rel)
    return value


def make_integrator(scenario: A2AScenario, central_position=None, seed: int = 0) -> InterferenceIntegrator:
    center = scenario.receiver if central_position is None else central_position
    return InterferenceIntegrator(scenario.box, center, scenario.path_loss_exponent, seed=seed)


def laplace_interference(
    scenario: A2AScenario,
    lambda_arg: float,
    central_position=None,
    integrator: Optional[InterferenceIntegrator] = None,
) -> float:
    """
    Laplace transform of the aggregate interference, exp(-lambda * Theta).

    Args:
        scenario: Supplies density, gain, exponent and box
        lambda_arg: Lambda = theta d^delta / G_a, >= 0
        central_position: Receiver position; defaults to the scenario receiver
        integrator: Reuse a precomputed integrator for the same box/receiver/delta

    Returns:
        Value in (0, 1]

    Raises:
        NumericalError: QMC error estimate above tolerance
    """
    if lambda_arg < 0:
        raise DomainError(f"Lambda must be non-negative, got {lambda_arg}")
    if lambda_arg == 0 or scenario.density == 0:
        return 1.0
    if integrator is None:
        integrator = make_integrator(scenario, central_position)
    theta, err = integrator.integrate(lambda_arg * scenario.total_gain)
    return _check_laplace_error(scenario.density, theta, err, f"Lambda={lambda_arg:.3g}")


def _theta_spline(scenario: A2AScenario, integrator: InterferenceIntegrator, grid: np.ndarray):
    lam, theta_lin, delta = scenario.density, scenario.threshold, scenario.path_loss_exponent
    values = np.empty(grid.size)
    for i, d in enumerate(grid):
        value, err = integrator.integrate(theta_lin * d ** delta)
        _check_laplace_error(lam, value, err, f"d={d:.1f} m")
        values[i] = max(value, np.finfo(float).tiny)
    log_d = np.log(grid)
    spline = CubicSpline(log_d, np.log(values))
    slope0 = float(spline(log_d[0], 1))

    def theta_at(d: float) -> float:
        if d <= 0:
            return 0.0
        x = math.log(d)
        if x < log_d[0]:
            return float(values[0] * math.exp(slope0 * (x - log_d[0])))
        return float(math.exp(spline(min(x, log_d[-1]))))

    return theta_at


def _outer_integral(scenario: A2AScenario, theta_at, max_distance: float):
    lam = scenario.density
    delta = scenario.path_loss_exponent
    noise_coeff = scenario.threshold * scenario.noise_power / (scenario.sub_tx_power * scenario.total_gain)

    def integrand(d: float) -> float:
        exponent = noise_coeff * d ** delta + lam * theta_at(d) + (4.0 / 3.0) * math.pi * lam * d ** 3
        return 4.0 * math.pi * lam * d * d * math.exp(-exponent)

    nn_scale = (3.0 / (4.0 * math.pi * lam)) ** (1.0 / 3.0)
    points = [nn_scale] if nn_scale < max_distance else None
    result = integrate.quad(integrand, 0.0, max_distance, points=points, limit=200,
                            epsabs=1e-9, epsrel=1e-7, full_output=1)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        raise NumericalError(f"coverage quadrature failed: {result[3]}", estimate=value, error_bound=abserr)
    return value, abserr


def coverage_analytic(
    scenario: A2AScenario,
    central_position=None,
    max_distance: Optional[float] = None,
    integrator: Optional[InterferenceIntegrator] = None,
) -> CoverageResult:
    """
    Coverage probability from the Laplace-transform integral (Rayleigh fading).

    Theta(d) is evaluated on a logarithmic grid of desired distances and
    interpolated with a log-log cubic spline; the grid is refined until two
    successive coverage values agree within GRID_TOL.

    Args:
        scenario: Radio parameters, fading_shape must be 1
        central_position: Receiver position, defaults to the scenario receiver
        max_distance: Truncation of the outer integral, defaults to the box diagonal
        integrator: Reuse a precomputed Theta integrator

    Returns:
        CoverageResult with the quadrature error bound

    Raises:
        NumericalError: quadrature or grid refinement did not converge
    """
    if scenario.fading_shape != 1.0:
        raise ConfigurationError("analytic coverage is derived for Rayleigh fading (iota = 1) only", key='iota')
    if max_distance is None:
        max_distance = scenario.box.diagonal
    if not max_distance > 0:
        raise DomainError(f"max_distance must be positive, got {max_distance}")
    if scenario.density == 0:
        return CoverageResult(0.0, 'analytic', error_bound=0.0)
    if integrator is None:
        integrator = make_integrator(scenario, central_position)

    lam = scenario.density
    # below d_lo the nearest-neighbour mass is under 1e-7
    d_lo = min((3e-7 / (4.0 * math.pi * lam)) ** (1.0 / 3.0), max_distance / 10.0)

    n = GRID_START
    previous = None
    for level in range(GRID_MAX_LEVELS):
        grid = np.geomspace(d_lo, max_distance, n)
        theta_at = _theta_spline(scenario, integrator, grid)
        value, abserr = _outer_integral(scenario, theta_at, max_distance)
        logger.debug(f"analytic coverage level {level}: {n} grid points -> {value:.6f}")
        if previous is not None and abs(value - previous) < GRID_TOL:
            return CoverageResult(min(max(value, 0.0), 1.0), 'analytic', error_bound=abserr)
        previous = value
        n = 2 * n - 1

    raise NumericalError("Theta grid refinement did not converge", estimate=previous,
                         error_bound=abs(value - previous))


def mean_sinr_vs_density(
    scenario: A2AScenario,
    density_grid: Sequence[float],
    trials: int,
    seed: int,
    count_mode: str = 'poisson',
) -> List[DensityPoint]:
    """
    Mean SINR and SNR (dB) of a randomly chosen sub-UAV versus density.

    The mean is taken over per-trial dB values, i.e. it is the dB value of
    the geometric mean of the linear SINR, not 10 log10 of its arithmetic
    mean. Under Rayleigh fading the two differ by several dB.

    Args:
        scenario: Radio parameters; its own density is replaced by the grid
        density_grid: Expected sub-UAV counts per layer
        trials: Deployments per density
        seed: Run seed; grid point i uses substream (seed, A2A, 1000 + i)
        count_mode: 'poisson' draws the count, 'fixed' uses it as is

    Returns:
        One DensityPoint per grid entry; trials without a sub-UAV are skipped
    """
    if count_mode not in COUNT_MODES:
        raise ConfigurationError(f"unknown count mode {count_mode!r}", key='count_mode')
    box, center = scenario.box, scenario.receiver
    delta = scenario.path_loss_exponent
    results = []

    for index, count in enumerate(density_grid):
        if count < 0 or not math.isfinite(count):
            raise ConfigurationError(f"density counts must be finite and non-negative, got {count}",
                                     key='density_grid_count')
        rng = substream(seed, A2A_STREAM, 1000 + index)
        if count_mode == 'poisson':
            counts = rng.poisson(count, trials)
        else:
            if count != int(count):
                raise ConfigurationError(f"fixed count mode needs integer counts, got {count}", key='density_grid_count')
            counts = np.full(trials, int(count))
        counts = counts[counts > 0]
        n = counts.size
        if n == 0:
            logger.warning(f"density {count}: no trial produced a sub-UAV")
            results.append(DensityPoint(float(count), math.nan, math.nan, 0))
            continue

        points = box.sample_uniform(rng, counts.sum())
        dist = np.linalg.norm(points - center, axis=1)
        rho = sample_fading(rng, scenario.fading_shape, dist.size)
        trial = np.repeat(np.arange(n), counts)
        starts = np.cumsum(counts) - counts
        chosen = starts + np.floor(rng.random(n) * counts).astype(int)

        with np.errstate(divide='ignore'):
            power = scenario.sub_tx_power * scenario.total_gain * rho * dist ** -delta
        mask = np.ones(dist.size, dtype=bool)
        mask[chosen] = False
        interference = np.bincount(trial[mask], weights=power[mask], minlength=n)
        signal = power[chosen]

        with np.errstate(divide='ignore'):
            sinr_db = parameters.linear_to_db(signal / (scenario.noise_power + interference))
            snr_db = parameters.linear_to_db(signal / scenario.noise_power)
        results.append(DensityPoint(float(count), float(np.mean(sinr_db)), float(np.mean(snr_db)), n))
        logger.info(f"density {count}: mean SINR {results[-1].mean_sinr_db:.2f} dB over {n} trials")

    return results
