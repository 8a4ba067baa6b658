"""Quasi-Monte Carlo evaluation of the interference box integral.

Theta = integral over the layer box of k / (r^delta + k) dV, with r the
distance to the receiver and k = Lambda * G_a. Points are drawn in
spherical coordinates around the receiver: two Sobol coordinates pick a
direction, the third a fraction w of the ray length rho to the box wall,
so dV = rho^3 w^2 dw dOmega. Everything that does not depend on k is
precomputed once per (box, receiver, delta).
"""

import logging
from typing import Tuple

import numpy as np
from scipy.stats import qmc

from .airspace import LayerBox
from .exceptions import DomainError
from .rng import QMC_STREAM, substream

logger = logging.getLogger(__name__)

DEFAULT_LOG2_POINTS = 15
DEFAULT_REPLICATES = 8


def ray_exit_distance(origin: np.ndarray, directions: np.ndarray, box: LayerBox) -> np.ndarray:
    """Distance from an interior origin along unit directions (n, 3) to the box wall."""
    with np.errstate(divide='ignore', invalid='ignore'):
        to_upper = (box.upper - origin) / directions
        to_lower = (box.lower - origin) / directions
    t = np.where(directions > 0, to_upper, np.where(directions < 0, to_lower, np.inf))
    return t.min(axis=1)


class InterferenceIntegrator:
    """Reusable Theta evaluator for one receiver position and path-loss exponent."""

    def __init__(
        self,
        box: LayerBox,
        center,
        path_loss_exponent: float,
        log2_points: int = DEFAULT_LOG2_POINTS,
        replicates: int = DEFAULT_REPLICATES,
        seed: int = 0,
    ):
        center = np.asarray(center, dtype=float)
        if not box.contains(center)[0]:
            raise DomainError(f"receiver {center.tolist()} lies outside the integration box")
        if replicates < 2:
            raise DomainError("need at least two scrambled replicates for an error estimate")

        self.box = box
        self.center = center
        self.path_loss_exponent = path_loss_exponent
        self.replicates = replicates

        rng = substream(seed, QMC_STREAM)
        radii_pow = []
        weights = []
        for _ in range(replicates):
            u = qmc.Sobol(d=3, scramble=True, seed=rng).random_base2(log2_points)
            cos_t = 1.0 - 2.0 * u[:, 0]
            sin_t = np.sqrt(np.clip(1.0 - cos_t ** 2, 0.0, None))
            az = 2.0 * np.pi * u[:, 1]
            directions = np.column_stack([sin_t * np.cos(az), sin_t * np.sin(az), cos_t])
            rho = ray_exit_distance(center, directions, box)
            w = u[:, 2]
            radii_pow.append((rho * w) ** path_loss_exponent)
            weights.append(4.0 * np.pi * rho ** 3 * w ** 2)
        self._radii_pow = np.stack(radii_pow)
        self._weights = np.stack(weights)
        logger.debug(
            f"Theta integrator: {replicates} x 2^{log2_points} points, delta={path_loss_exponent}"
        )

    def integrate(self, k: float) -> Tuple[float, float]:
        """
        Evaluate Theta for k = Lambda * G_a.

        Returns:
            (estimate, standard error across replicates)
        """
        if k < 0:
            raise DomainError(f"Lambda must be non-negative, got {k}")
        if k == 0:
            return 0.0, 0.0
        with np.errstate(divide='ignore', invalid='ignore'):
            values = k / (self._radii_pow + k)
        per_replicate = np.mean(self._weights * values, axis=1)
        estimate = float(per_replicate.mean())
        std_error = float(per_replicate.std(ddof=1) / np.sqrt(self.replicates))
        return estimate, std_error
