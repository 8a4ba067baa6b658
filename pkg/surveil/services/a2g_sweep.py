"""Height sweep of the central-UAV to ground-station link."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from core.a2g_channel import A2GParams, evaluate_link, link_budget, rician_power_gains
from core.rng import A2G_STREAM, substream

logger = logging.getLogger(__name__)

CSV_HEADER = ('height_m', 'pl_db_nofade', 'pl_db_fade', 'snr_db')


@dataclass(frozen=True)
class SweepRow:
    height_m: float
    pl_db_nofade: float
    pl_db_fade: float
    snr_db: float

    @property
    def deep_fade(self) -> bool:
        return math.isinf(self.pl_db_nofade)

    def as_row(self):
        return (self.height_m, self.pl_db_nofade, self.pl_db_fade, self.snr_db)


def height_grid(low: float, high: float, step: float) -> np.ndarray:
    """Inclusive grid low, low + step, ..., high (the last step may be shorter)."""
    count = int(math.floor((high - low) / step + 1e-9)) + 1
    grid = low + step * np.arange(count)
    if grid[-1] < high - 1e-9:
        grid = np.append(grid, high)
    return grid


def sweep_point(
    params: A2GParams,
    height: float,
    ground_arc: float,
    reflection_arcs: Sequence[float],
    fade_trials: int,
    rng: np.random.Generator,
) -> SweepRow:
    """
    Path loss and SNR at one central-UAV height.

    The faded path loss is the mean over Rician draws of the per-draw path
    loss in dB; the SNR column is derived from it.
    """
    link = params.at_height(height)
    _, _, p_g = evaluate_link(link, ground_arc, reflection_arcs or None)
    budget = link_budget(link, p_g)
    if budget.deep_fade:
        return SweepRow(height, budget.path_loss_db, budget.path_loss_db, budget.snr_db)
    pl_nofade = budget.path_loss_db

    gains = rician_power_gains(link.rice_factor, rng, fade_trials)
    with np.errstate(divide='ignore'):
        pl_draws = -10.0 * np.log10(p_g * gains / link.tx_power)
    pl_fade = float(np.mean(pl_draws))
    snr_db = 10.0 * math.log10(link.tx_power) - pl_fade - 10.0 * math.log10(link.noise_power)
    return SweepRow(height, pl_nofade, pl_fade, snr_db)


def run_a2g_sweep(
    params: A2GParams,
    heights: Sequence[float],
    ground_arc: float,
    reflection_arcs: Sequence[float],
    fade_trials: int,
    seed: int,
    layer_index: int = 0,
    workers: int = 1,
) -> List[SweepRow]:
    """
    Evaluate every height of the grid.

    Point i draws its fading from substream (seed, A2G, layer_index, i),
    so the output does not depend on the number of workers.
    """
    def evaluate(item):
        index, height = item
        rng = substream(seed, A2G_STREAM, layer_index, index)
        return sweep_point(params, float(height), ground_arc, reflection_arcs, fade_trials, rng)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(evaluate, enumerate(heights)))

    fades = sum(row.deep_fade for row in rows)
    if fades:
        logger.warning(f"{fades} of {len(rows)} heights sit in a deep fade (path loss +inf)")
    logger.info(f"A2G sweep at {params.frequency / 1e6:g} MHz: {len(rows)} heights")
    return rows
