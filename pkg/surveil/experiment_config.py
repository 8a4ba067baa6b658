"""
Experiment configuration files.

Plain-text INI with one section per module:

    [experiment]
    scenario = a2a_power
    seed = 7

    [a2a]
    p_s_grid_w = 1, 5, 10, 15, 20
    theta_grid_db = -14, -12, -10, -7

Dimensioned keys carry their unit in the suffix. Unknown sections or keys,
duplicates and malformed values are rejected with file:line locations.
dB-family values are converted to linear here, once; both forms are kept
for the run manifest.
"""

import configparser
import hashlib
import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from config import settings
from core import parameters
from core.a2a_channel import COUNT_MODES, GEOMETRY_MODES, A2AScenario
from core.a2g_channel import A2GParams
from core.airspace import AirspaceConfig, count_to_intensity
from core.exceptions import ConfigParseError, ConfigurationError
from core.onboard import MecConfig

logger = logging.getLogger(__name__)

SCENARIOS = ('a2g_sweep', 'a2a_density', 'a2a_power', 'a2a_pathloss', 'trajectory')
A2G_LAYERS = ('low', 'high', 'both')
A2A_LAYERS = ('low', 'high')

REQUIRED_KEYS = (('experiment', 'scenario'), ('experiment', 'seed'))


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------

def _number(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def _integer(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _text(text: str) -> str:
    if not text:
        raise ValueError("empty value")
    return text


def _boolean(text: str) -> bool:
    lowered = text.lower()
    if lowered in ('true', 'yes', 'on', '1'):
        return True
    if lowered in ('false', 'no', 'off', '0'):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _number_list(text: str) -> Tuple[float, ...]:
    items = [item.strip() for item in text.split(',') if item.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(_number(item) for item in items)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return parse


def _positive(value) -> Optional[str]:
    values = value if isinstance(value, tuple) else (value,)
    return None if all(v > 0 for v in values) else "must be positive"


def _non_negative(value) -> Optional[str]:
    values = value if isinstance(value, tuple) else (value,)
    return None if all(v >= 0 for v in values) else "must be non-negative"


def _at_least(bound: float) -> Callable[[Any], Optional[str]]:
    def check(value) -> Optional[str]:
        values = value if isinstance(value, tuple) else (value,)
        return None if all(v >= bound for v in values) else f"must be >= {bound}"
    return check


def _within(low: float, high: float) -> Callable[[Any], Optional[str]]:
    def check(value) -> Optional[str]:
        values = value if isinstance(value, tuple) else (value,)
        return None if all(low <= v <= high for v in values) else f"must lie in [{low}, {high}]"
    return check


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any = None
    check: Optional[Callable[[Any], Optional[str]]] = None
    # dB-family keys resolve to a linear value via this function
    linear: Optional[Callable[[float], float]] = None


SCHEMA: Dict[str, Dict[str, Key]] = {
    'experiment': {
        'scenario': Key(_choice(*SCENARIOS)),
        'seed': Key(_integer, check=_non_negative),
        'output_dir': Key(_text, str(settings.OUTPUT_DIR)),
        'trials': Key(_integer, settings.DEFAULT_TRIALS, _at_least(1)),
        'workers': Key(_integer, settings.WORKERS, _at_least(1)),
    },
    'airspace': {
        'half_extent_x_m': Key(_number, parameters.HALF_EXTENT_M, _positive),
        'half_extent_y_m': Key(_number, parameters.HALF_EXTENT_M, _positive),
        'layer_thickness_m': Key(_number, parameters.LAYER_THICKNESS_M, _positive),
        'isolation_thickness_m': Key(_number, parameters.ISOLATION_THICKNESS_M, _positive),
        'gs_height_m': Key(_number, parameters.GS_HEIGHT_M, _positive),
        'central_low_height_m': Key(_number, parameters.CENTRAL_LOW_HEIGHT_M, _non_negative),
        'central_high_height_m': Key(_number, parameters.CENTRAL_HIGH_HEIGHT_M, _positive),
        'central_offset_x_m': Key(_number, 0.0),
        'central_offset_y_m': Key(_number, 0.0),
        'max_service_range_m': Key(_number, None, _positive),
        'density_low_count': Key(_number, 20.0, _non_negative),
        'density_high_count': Key(_number, 20.0, _non_negative),
    },
    'a2g': {
        'layer': Key(_choice(*A2G_LAYERS), 'low'),
        'f_low_hz': Key(_number, parameters.F_5G_HZ, _positive),
        'b_low_hz': Key(_number, parameters.B_5G_HZ, _positive),
        'f_high_hz': Key(_number, parameters.F_ADSB_HZ, _positive),
        'b_high_hz': Key(_number, parameters.B_ADSB_HZ, _positive),
        'p_c_w': Key(_number, parameters.P_CENTRAL_W, _positive),
        'g_g_dbi': Key(_number, parameters.G_GROUND_DBI, linear=parameters.db_to_linear),
        'eps_r': Key(_number, parameters.REL_PERMITTIVITY, _at_least(1.0)),
        'sigma_s_per_m': Key(_number, parameters.CONDUCTIVITY_S_PER_M, _non_negative),
        'n0_dbm_per_hz': Key(_number, parameters.NOISE_DENSITY_DBM_PER_HZ, linear=parameters.dbm_to_watts),
        'beamwidth_rad': Key(_number, parameters.BEAMWIDTH_RAD, _within(1e-6, math.pi / 2 - 1e-6)),
        'rice_k': Key(_number, parameters.RICE_FACTOR, _non_negative),
        'earth_radius_m': Key(_number, parameters.EARTH_RADIUS_M, _positive),
        'ground_arc_m': Key(_number, parameters.GROUND_ARC_M, _positive),
        'h_low_min_m': Key(_number, 500.0, _positive),
        'h_low_max_m': Key(_number, parameters.LAYER_THICKNESS_M, _positive),
        'h_high_min_m': Key(_number, 5500.0, _positive),
        'h_high_max_m': Key(_number, 10000.0, _positive),
        'h_step_m': Key(_number, 10.0, _positive),
        'fade_trials': Key(_integer, settings.DEFAULT_FADE_TRIALS, _at_least(1)),
        'reflection_arcs_m': Key(_number_list, (), _positive),
    },
    'a2a': {
        'layer': Key(_choice(*A2A_LAYERS), 'low'),
        'p_s_w': Key(_number, parameters.P_SUB_MAX_W, _positive),
        'p_s_grid_w': Key(_number_list, (1.0, 5.0, 10.0, 15.0, 17.0, 20.0), _positive),
        'g_a_dbi': Key(_number, parameters.G_AIR_DBI, linear=parameters.db_to_linear),
        'b_hz': Key(_number, None, _positive),
        'n0_dbm_per_hz': Key(_number, parameters.NOISE_DENSITY_DBM_PER_HZ, linear=parameters.dbm_to_watts),
        'noise_dbm': Key(_number, None, linear=parameters.dbm_to_watts),
        'delta': Key(_number, 2.0, _within(parameters.DELTA_MIN, parameters.DELTA_MAX)),
        'delta_grid': Key(_number_list, (2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 4.9),
                          _within(parameters.DELTA_MIN, parameters.DELTA_MAX)),
        'theta_db': Key(_number, parameters.THETA_MIN_DB, linear=parameters.db_to_linear),
        'theta_grid_db': Key(_number_list, (-14.0, -12.0, -10.0, -8.0, -7.0)),
        'iota': Key(_number, 1.0, _positive),
        'density_count': Key(_number, 20.0, _non_negative),
        'density_grid_count': Key(_number_list, tuple(float(n) for n in range(1, 61)), _non_negative),
        'geometry_mode': Key(_choice(*GEOMETRY_MODES), 'sphere_law'),
        'count_mode': Key(_choice(*COUNT_MODES), 'poisson'),
        'analytic': Key(_boolean, True),
    },
    'mec': {
        'input_sbs': Key(_text),
        'window_size': Key(_integer, parameters.WINDOW_SIZE, _at_least(2)),
        'minkowski_order': Key(_number, parameters.MINKOWSKI_ORDER, _at_least(1.0)),
        'degeneracy_threshold': Key(_number, parameters.DEGENERACY_THRESHOLD, _positive),
        'metric_normalization': Key(_boolean, False),
    },
}


# ---------------------------------------------------------------------------
# Parsed configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class A2GSettings:
    layer: str
    frequency: Dict[str, float]
    bandwidth: Dict[str, float]
    tx_power: float
    total_gain: float
    noise_density: float
    rel_permittivity: float
    conductivity: float
    beamwidth: float
    rice_factor: float
    earth_radius: float
    gs_height: float
    ground_arc: float
    height_range: Dict[str, Tuple[float, float]]
    height_step: float
    fade_trials: int
    reflection_arcs: Tuple[float, ...]

    @property
    def layers(self) -> List[str]:
        return ['low', 'high'] if self.layer == 'both' else [self.layer]

    def params(self, layer: str, uav_height: Optional[float] = None) -> A2GParams:
        if uav_height is None:
            uav_height = self.height_range[layer][0]
        return A2GParams(
            frequency=self.frequency[layer],
            bandwidth=self.bandwidth[layer],
            tx_power=self.tx_power,
            total_gain=self.total_gain,
            uav_height=uav_height,
            gs_height=self.gs_height,
            earth_radius=self.earth_radius,
            rel_permittivity=self.rel_permittivity,
            conductivity=self.conductivity,
            noise_density=self.noise_density,
            beamwidth=self.beamwidth,
            rice_factor=self.rice_factor,
        )


@dataclass(frozen=True)
class A2ASettings:
    layer: str
    sub_tx_power: float
    sub_tx_power_grid: Tuple[float, ...]
    total_gain: float
    noise_power: float
    path_loss_exponent: float
    path_loss_exponent_grid: Tuple[float, ...]
    threshold_db: float
    threshold_grid_db: Tuple[float, ...]
    fading_shape: float
    density_count: float
    density_grid_count: Tuple[float, ...]
    geometry_mode: str
    count_mode: str
    analytic: bool

    def scenario(
        self,
        airspace: AirspaceConfig,
        sub_tx_power: Optional[float] = None,
        path_loss_exponent: Optional[float] = None,
        threshold_db: Optional[float] = None,
        density_count: Optional[float] = None,
    ) -> A2AScenario:
        """Build the core scenario, optionally overriding one swept parameter."""
        box = airspace.box(self.layer)
        count = self.density_count if density_count is None else density_count
        theta_db = self.threshold_db if threshold_db is None else threshold_db
        return A2AScenario(
            sub_tx_power=self.sub_tx_power if sub_tx_power is None else sub_tx_power,
            total_gain=self.total_gain,
            noise_power=self.noise_power,
            path_loss_exponent=self.path_loss_exponent if path_loss_exponent is None else path_loss_exponent,
            threshold=parameters.db_to_linear(theta_db),
            density=count_to_intensity(count, box.volume),
            box=box,
            fading_shape=self.fading_shape,
            central_position=tuple(airspace.central_position(self.layer)),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment: scenario, seed, module parameters and provenance."""

    scenario: str
    seed: int
    output_dir: Path
    trials: int
    workers: int
    airspace: AirspaceConfig
    a2g: A2GSettings
    a2a: A2ASettings
    mec: MecConfig
    input_sbs: Optional[Path]
    source: str
    text_sha256: str
    values: Dict[str, Dict[str, Any]] = field(repr=False)
    resolved: Dict[str, Tuple[float, float]] = field(repr=False)

    @property
    def stochastic(self) -> bool:
        return self.scenario != 'trajectory'


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_SECTION_LINE = re.compile(r'^\s*\[([^\]]+)\]')
_KEY_LINE = re.compile(r'^([^\s#;=:][^=:]*?)\s*[=:]')


def _key_lines(text: str) -> Dict[Tuple[str, str], int]:
    """First line number of every section header and key in the raw text."""
    lines: Dict[Tuple[str, str], int] = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_LINE.match(line)
        if header:
            section = header.group(1).strip()
            lines.setdefault((section, ''), number)
            continue
        key = _KEY_LINE.match(line)
        if key and section is not None:
            lines.setdefault((section, key.group(1).strip().lower()), number)
    return lines


class _Locator:
    def __init__(self, source: str, lines: Dict[Tuple[str, str], int]):
        self.source = source
        self.lines = lines

    def __call__(self, section: str, key: str = '') -> str:
        number = self.lines.get((section, key))
        return f"{self.source}:{number}" if number else self.source

    def find(self, key: str) -> str:
        """Best-effort location of a core-level parameter name."""
        for (section, name), number in self.lines.items():
            if name and (name == key or name.startswith(f"{key}_")):
                return f"{self.source}:{number}"
        return self.source


def _read_ini(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(strict=True, interpolation=None, default_section='__defaults__')
    try:
        parser.read_string(text, source=source)
    except configparser.DuplicateSectionError as e:
        raise ConfigParseError(f"duplicate section [{e.section}]", location=f"{source}:{e.lineno}")
    except configparser.DuplicateOptionError as e:
        raise ConfigParseError(f"duplicate key {e.option!r} in [{e.section}]", key=e.option,
                               location=f"{source}:{e.lineno}")
    except configparser.MissingSectionHeaderError as e:
        raise ConfigParseError("key outside of any [section]", location=f"{source}:{e.lineno}")
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise ConfigParseError("malformed line", location=f"{source}:{lineno}" if lineno else source)
    return parser


def _collect_values(parser: configparser.ConfigParser, locate: _Locator) -> Dict[str, Dict[str, Any]]:
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigParseError(
                f"unknown section [{section}]; expected one of {', '.join(SCHEMA)}",
                location=locate(section),
            )
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigParseError(f"unknown key {key!r} in [{section}]", key=key,
                                       location=locate(section, key))

    missing = [f"{s}.{k}" for s, k in REQUIRED_KEYS if not parser.has_option(s, k)]
    if missing:
        raise ConfigParseError(f"missing required keys: {', '.join(missing)}", missing=missing)

    values: Dict[str, Dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, entry in keys.items():
            if parser.has_option(section, key):
                raw = parser.get(section, key).strip()
                try:
                    value = entry.parse(raw)
                except ValueError as e:
                    raise ConfigParseError(f"{section}.{key}: {e}", key=key, location=locate(section, key))
                if entry.check is not None:
                    problem = entry.check(value)
                    if problem:
                        raise ConfigParseError(f"{section}.{key} = {raw} {problem}", key=key,
                                               location=locate(section, key))
            else:
                value = entry.default
            values[section][key] = value
    return values


def _resolve_db(values: Dict[str, Dict[str, Any]]) -> Dict[str, Tuple[float, float]]:
    resolved = {}
    for section, keys in SCHEMA.items():
        for key, entry in keys.items():
            value = values[section][key]
            if entry.linear is not None and value is not None:
                resolved[f"{section}.{key}"] = (value, entry.linear(value))
    for theta_db in values['a2a']['theta_grid_db']:
        resolved[f"a2a.theta_grid_db[{theta_db:g}]"] = (theta_db, parameters.db_to_linear(theta_db))
    return resolved


def _build(values, resolved, locate: _Locator, source: str, digest: str, base_dir: Optional[Path],
           check_files: bool) -> ExperimentConfig:
    exp, air, a2g, a2a, mec = (values[s] for s in ('experiment', 'airspace', 'a2g', 'a2a', 'mec'))
    layer_volume = 4.0 * air['half_extent_x_m'] * air['half_extent_y_m'] * air['layer_thickness_m']

    airspace = AirspaceConfig(
        half_extent_x=air['half_extent_x_m'],
        half_extent_y=air['half_extent_y_m'],
        layer_thickness=air['layer_thickness_m'],
        isolation_thickness=air['isolation_thickness_m'],
        gs_position=(0.0, 0.0, air['gs_height_m']),
        central_low_height=air['central_low_height_m'],
        central_high_height=air['central_high_height_m'],
        max_service_range=air['max_service_range_m'],
        central_offset=(air['central_offset_x_m'], air['central_offset_y_m']),
        density_low=count_to_intensity(air['density_low_count'], layer_volume),
        density_high=count_to_intensity(air['density_high_count'], layer_volume),
    )

    for layer in ('low', 'high'):
        lo, hi = a2g[f'h_{layer}_min_m'], a2g[f'h_{layer}_max_m']
        if lo > hi:
            raise ConfigParseError(f"a2g.h_{layer}_min_m exceeds h_{layer}_max_m", key=f'h_{layer}_min_m',
                                   location=locate('a2g', f'h_{layer}_min_m'))
        if lo <= air['gs_height_m']:
            raise ConfigParseError(f"a2g.h_{layer}_min_m must exceed the ground-station height",
                                   key=f'h_{layer}_min_m', location=locate('a2g', f'h_{layer}_min_m'))

    a2g_settings = A2GSettings(
        layer=a2g['layer'],
        frequency={'low': a2g['f_low_hz'], 'high': a2g['f_high_hz']},
        bandwidth={'low': a2g['b_low_hz'], 'high': a2g['b_high_hz']},
        tx_power=a2g['p_c_w'],
        total_gain=resolved['a2g.g_g_dbi'][1],
        noise_density=resolved['a2g.n0_dbm_per_hz'][1],
        rel_permittivity=a2g['eps_r'],
        conductivity=a2g['sigma_s_per_m'],
        beamwidth=a2g['beamwidth_rad'],
        rice_factor=a2g['rice_k'],
        earth_radius=a2g['earth_radius_m'],
        gs_height=air['gs_height_m'],
        ground_arc=a2g['ground_arc_m'],
        height_range={
            'low': (a2g['h_low_min_m'], a2g['h_low_max_m']),
            'high': (a2g['h_high_min_m'], a2g['h_high_max_m']),
        },
        height_step=a2g['h_step_m'],
        fade_trials=a2g['fade_trials'],
        reflection_arcs=tuple(a2g['reflection_arcs_m']),
    )
    # build the core objects once so their validation errors surface at parse time
    for layer in a2g_settings.layers:
        a2g_settings.params(layer)

    if a2a['noise_dbm'] is not None:
        noise_power = resolved['a2a.noise_dbm'][1]
    else:
        default_bandwidth = parameters.B_5G_HZ if a2a['layer'] == 'low' else parameters.B_ADSB_HZ
        bandwidth = a2a['b_hz'] if a2a['b_hz'] is not None else default_bandwidth
        noise_power = resolved['a2a.n0_dbm_per_hz'][1] * bandwidth
    resolved['a2a.noise_power_dbm'] = (parameters.watts_to_dbm(noise_power), noise_power)

    if a2a['analytic'] and a2a['iota'] != 1.0 and exp['scenario'] in ('a2a_power', 'a2a_pathloss'):
        raise ConfigParseError("analytic coverage needs iota = 1; set analytic = false for other fading shapes",
                               key='iota', location=locate('a2a', 'iota'))

    a2a_settings = A2ASettings(
        layer=a2a['layer'],
        sub_tx_power=a2a['p_s_w'],
        sub_tx_power_grid=tuple(a2a['p_s_grid_w']),
        total_gain=resolved['a2a.g_a_dbi'][1],
        noise_power=noise_power,
        path_loss_exponent=a2a['delta'],
        path_loss_exponent_grid=tuple(a2a['delta_grid']),
        threshold_db=a2a['theta_db'],
        threshold_grid_db=tuple(a2a['theta_grid_db']),
        fading_shape=a2a['iota'],
        density_count=a2a['density_count'],
        density_grid_count=tuple(a2a['density_grid_count']),
        geometry_mode=a2a['geometry_mode'],
        count_mode=a2a['count_mode'],
        analytic=a2a['analytic'],
    )
    a2a_settings.scenario(airspace)

    if exp['scenario'] in ('a2a_power', 'a2a_pathloss') and exp['trials'] < 1000:
        raise ConfigParseError("Monte Carlo coverage needs trials >= 1000", key='trials',
                               location=locate('experiment', 'trials'))

    mec_config = MecConfig(
        window_size=mec['window_size'],
        minkowski_order=mec['minkowski_order'],
        degeneracy_threshold=mec['degeneracy_threshold'],
        metric_normalization=mec['metric_normalization'],
    )
    mec_config.new_window()

    input_sbs = None
    if mec['input_sbs'] is not None:
        input_sbs = Path(mec['input_sbs'])
        if not input_sbs.is_absolute() and base_dir is not None:
            input_sbs = base_dir / input_sbs
    if exp['scenario'] == 'trajectory':
        if input_sbs is None:
            raise ConfigParseError("trajectory scenario needs mec.input_sbs", key='input_sbs',
                                   missing=['mec.input_sbs'])
        if check_files and not input_sbs.is_file():
            raise ConfigParseError(f"input file not found: {input_sbs}", key='input_sbs',
                                   location=locate('mec', 'input_sbs'))

    return ExperimentConfig(
        scenario=exp['scenario'],
        seed=exp['seed'],
        output_dir=Path(exp['output_dir']),
        trials=exp['trials'],
        workers=exp['workers'],
        airspace=airspace,
        a2g=a2g_settings,
        a2a=a2a_settings,
        mec=mec_config,
        input_sbs=input_sbs,
        source=source,
        text_sha256=digest,
        values=values,
        resolved=resolved,
    )


def parse_config(
    text: str,
    source: str = '<config>',
    base_dir: Optional[Path] = None,
    check_files: bool = True,
) -> ExperimentConfig:
    """
    Parse and validate an experiment configuration.

    Args:
        text: INI text
        source: Name used in error locations (usually the file path)
        base_dir: Directory relative input paths are resolved against
        check_files: Verify that referenced input files exist

    Returns:
        ExperimentConfig with dB values already converted

    Raises:
        ConfigParseError: syntax, unknown or missing keys, bad values; the
            message starts with "file:line" when the line is known
    """
    locate = _Locator(source, _key_lines(text))
    parser = _read_ini(text, source)
    values = _collect_values(parser, locate)
    resolved = _resolve_db(values)
    digest = hashlib.sha256(text.encode('utf-8')).hexdigest()

    try:
        config = _build(values, resolved, locate, source, digest, base_dir, check_files)
    except ConfigParseError:
        raise
    except ConfigurationError as e:
        location = locate.find(e.key) if e.key else source
        raise ConfigParseError(str(e), key=e.key, location=location)

    logger.debug(f"parsed {source}: scenario {config.scenario}, seed {config.seed}")
    return config


def load_config(path, check_files: bool = True) -> ExperimentConfig:
    """Read a configuration file; OSError propagates for the caller to report."""
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    return parse_config(text, source=str(path), base_dir=path.parent, check_files=check_files)


def with_overrides(config: ExperimentConfig, seed: Optional[int] = None,
                   trials: Optional[int] = None) -> ExperimentConfig:
    """Apply command-line overrides, keeping the recorded values in step."""
    if seed is None and trials is None:
        return config
    values = {section: dict(keys) for section, keys in config.values.items()}
    changes = {}
    if seed is not None:
        if seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {seed}", key='seed')
        values['experiment']['seed'] = changes['seed'] = seed
    if trials is not None:
        if trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {trials}", key='trials')
        values['experiment']['trials'] = changes['trials'] = trials
    return replace(config, values=values, **changes)
