"""Reference simulation parameters and unit conversions.

Values marked "reference" are the published simulation settings; the rest
are defaults chosen where the reference is silent.
"""

import math

import numpy as np
from scipy import constants

SPEED_OF_LIGHT = constants.c
VACUUM_PERMITTIVITY = constants.epsilon_0
FEET_TO_METERS = constants.foot

# Radio links (reference)
F_5G_HZ = 3.5e9
B_5G_HZ = 100e6
F_ADSB_HZ = 1090e6
B_ADSB_HZ = 1e6
NOISE_DENSITY_DBM_PER_HZ = -174.0

# Transmit powers and gains (reference)
P_CENTRAL_W = 20.0
P_SUB_MIN_W = 1.0
P_SUB_MAX_W = 20.0
G_GROUND_DBI = 20.0
G_AIR_DBI = 23.0

# A2A sweep ranges (reference)
THETA_MIN_DB = -14.0
THETA_MAX_DB = -7.0
DELTA_MIN = 2.0
DELTA_MAX = 4.9
DENSITY_MIN_COUNT = 1
DENSITY_MAX_COUNT = 60

# Airspace (reference)
LAYER_THICKNESS_M = 4500.0
ISOLATION_THICKNESS_M = 1000.0
GS_HEIGHT_M = 50.0

# Ground (reference)
REL_PERMITTIVITY = 15.0
CONDUCTIVITY_S_PER_M = 5e3
RICE_FACTOR = 3.0

# Defaults where the reference gives no value
EARTH_RADIUS_M = 6.371e6
HALF_EXTENT_M = 5000.0
GROUND_ARC_M = 10000.0
BEAMWIDTH_RAD = 1.0
CENTRAL_LOW_HEIGHT_M = 2250.0
CENTRAL_HIGH_HEIGHT_M = 7750.0
WINDOW_SIZE = 5
MINKOWSKI_ORDER = 2.0
DEGENERACY_THRESHOLD = 1e-9


def db_to_linear(value_db: float) -> float:
    """Convert a dB (or dBi) quantity to a linear ratio."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value):
    """Convert a linear ratio to dB; zero maps to -inf."""
    with np.errstate(divide='ignore'):
        result = 10.0 * np.log10(value)
    return float(result) if np.ndim(result) == 0 else result


def dbm_to_watts(value_dbm: float) -> float:
    """Convert dBm (or dBm/Hz) to W (or W/Hz)."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    return 10.0 * math.log10(value_w) + 30.0


def wavelength(frequency_hz: float) -> float:
    return SPEED_OF_LIGHT / frequency_hz
