"""
On-board position-packet processing for a central UAV.

Each aircraft gets a sliding window of the last N Minkowski distances
between consecutive accepted position vectors. A packet closer to its
predecessor than every window entry is redundant and abandoned; a packet
at least as far as every entry marks a gap, and a supplement point is
synthesised on the sphere through the last four positions (or at the
midpoint when that sphere is degenerate).
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Deque, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import parameters
from .exceptions import ConfigurationError, DegeneracyError, DomainError, WindowStateError
from .sbs_codec import PositionReport

logger = logging.getLogger(__name__)

HISTORY_LENGTH = 4
TIME_FORMATS = ('%H:%M:%S.%f', '%H:%M:%S')


@dataclass(frozen=True)
class PositionVector:
    """[Lon, Lat, Alt] of one packet plus its stream identity."""

    lon: float
    lat: float
    alt: float
    source_id: str = ''
    sequence: int = 0
    synthetic: bool = False
    report: Optional[PositionReport] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.lon, self.lat, self.alt)):
            raise DomainError(f"position components must be finite: {(self.lon, self.lat, self.alt)}")

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.lon, self.lat, self.alt], dtype=float)

    @classmethod
    def from_report(cls, report: PositionReport, sequence: int) -> 'PositionVector':
        return cls(
            lon=report.longitude,
            lat=report.latitude,
            alt=float(report.altitude),
            source_id=report.hex_ident,
            sequence=sequence,
            report=report,
        )


PointLike = Union[PositionVector, Sequence[float], np.ndarray]


class Action(str, Enum):
    RELAY = 'relay'
    ABANDON = 'abandon'
    RELAY_WITH_SUPPLEMENT = 'relay_with_supplement'


class Fallback(str, Enum):
    SPHERE = 'sphere'
    LINEAR = 'linear'
    NONE = 'none'


@dataclass(frozen=True)
class ProcessDecision:
    """Outcome of one packet; center/radius are set when the sphere supplement was used."""

    action: Action
    incoming: PositionVector
    distance: float
    supplement: Optional[PositionVector] = None
    fallback_used: Fallback = Fallback.NONE
    center: Optional[np.ndarray] = field(default=None, compare=False)
    radius: Optional[float] = None

    def __post_init__(self):
        if (self.supplement is not None) != (self.action is Action.RELAY_WITH_SUPPLEMENT):
            raise DomainError("a supplement accompanies relay_with_supplement and nothing else")


@dataclass(frozen=True)
class LocalMetricFrame:
    """
    Equirectangular east/north/up metres around a reference point.

    Longitude and latitude differences are scaled by the mean Earth radius
    (longitude also by cos of the reference latitude); altitude is
    converted from feet unless altitude_in_feet is False.
    """

    lon0: float
    lat0: float
    altitude_in_feet: bool = True
    earth_radius: float = parameters.EARTH_RADIUS_M

    @property
    def _alt_scale(self) -> float:
        return parameters.FEET_TO_METERS if self.altitude_in_feet else 1.0

    def to_local(self, coords) -> np.ndarray:
        lon, lat, alt = np.asarray(coords, dtype=float)
        k = self.earth_radius * math.pi / 180.0
        return np.array([
            (lon - self.lon0) * k * math.cos(math.radians(self.lat0)),
            (lat - self.lat0) * k,
            alt * self._alt_scale,
        ])

    def to_geodetic(self, local) -> np.ndarray:
        x, y, z = np.asarray(local, dtype=float)
        k = self.earth_radius * math.pi / 180.0
        return np.array([
            self.lon0 + x / (k * math.cos(math.radians(self.lat0))),
            self.lat0 + y / k,
            z / self._alt_scale,
        ])


@dataclass
class MinkowskiWindow:
    """Per-aircraft state: distance window, last accepted positions, last sequence seen."""

    capacity: int = parameters.WINDOW_SIZE
    order: float = parameters.MINKOWSKI_ORDER
    degeneracy_threshold: float = parameters.DEGENERACY_THRESHOLD
    metric_normalization: bool = False
    distances: List[float] = field(default_factory=list)
    history: Deque[PositionVector] = field(default_factory=lambda: deque(maxlen=HISTORY_LENGTH))
    last_sequence: Optional[int] = None
    frame: Optional[LocalMetricFrame] = None

    def __post_init__(self):
        if isinstance(self.capacity, bool) or int(self.capacity) != self.capacity or self.capacity < 2:
            raise ConfigurationError(f"window size must be an integer >= 2, got {self.capacity}", key='window_size')
        if not self.order >= 1:
            raise ConfigurationError(f"Minkowski order must be >= 1, got {self.order}", key='minkowski_order')
        if not self.degeneracy_threshold > 0:
            raise ConfigurationError("degeneracy threshold must be positive", key='degeneracy_threshold')

    @property
    def warmed(self) -> bool:
        return len(self.distances) == self.capacity

    def local(self, point: PositionVector) -> np.ndarray:
        return self.frame.to_local(point.coords) if self.frame else point.coords


def minkowski_distance(a: PointLike, b: PointLike, p: float = parameters.MINKOWSKI_ORDER) -> float:
    """
    Minkowski distance of order p between two position vectors.

    Args:
        a: First position ([lon, lat, alt] or PositionVector)
        b: Second position
        p: Order, >= 1; math.inf gives the max-component distance

    Returns:
        (|dlon|^p + |dlat|^p + |dalt|^p)^(1/p)
    """
    if not p >= 1:
        raise DomainError(f"Minkowski order must be >= 1, got {p}")
    diff = np.abs(_coords(a) - _coords(b))
    largest = float(diff.max())
    if largest == 0.0 or math.isinf(p):
        return largest
    return largest * float(np.sum((diff / largest) ** p)) ** (1.0 / p)


def _coords(point: PointLike) -> np.ndarray:
    if isinstance(point, PositionVector):
        return point.coords
    return np.asarray(point, dtype=float).reshape(3)


def warm_up(window: MinkowskiWindow, first_reports: Sequence[PositionVector]) -> MinkowskiWindow:
    """
    Fill the window from the first N+1 reports of an aircraft.

    Args:
        window: Empty window
        first_reports: Exactly N+1 reports in sequence order

    Returns:
        The same window, now holding N adjacent-pair distances
    """
    needed = window.capacity + 1
    if len(first_reports) != needed:
        raise WindowStateError(f"warm-up needs {needed} reports, got {len(first_reports)}")
    sequences = [r.sequence for r in first_reports]
    if any(b <= a for a, b in zip(sequences, sequences[1:])):
        raise WindowStateError(f"warm-up reports out of order: {sequences}")

    if window.metric_normalization and window.frame is None:
        first = first_reports[0]
        window.frame = LocalMetricFrame(first.lon, first.lat)

    local = [window.local(r) for r in first_reports]
    window.distances = [minkowski_distance(a, b, window.order) for a, b in zip(local, local[1:])]
    window.history.clear()
    window.history.extend(first_reports[-HISTORY_LENGTH:])
    window.last_sequence = sequences[-1]
    logger.debug(f"window warmed for {first_reports[0].source_id!r}: {window.distances}")
    return window


def circumsphere(
    p1: PointLike,
    p2: PointLike,
    p3: PointLike,
    p4: PointLike,
    degeneracy_threshold: float = parameters.DEGENERACY_THRESHOLD,
) -> Tuple[np.ndarray, float]:
    """
    Sphere through four points by Cramer's rule.

    The points are taken as P_k, P_{k-1}, P_{k-2}, P_{k-3}. Subtracting the
    sphere equations pairwise gives the linear system with rows
    P_k - P_{k-1}, P_{k-2} - P_{k-3}, P_{k-1} - P_{k-2} and right-hand side
    half the differences of squared norms.

    Returns:
        (center, radius)

    Raises:
        DegeneracyError: |X| <= threshold * scale^3 (coplanar or coincident points)
    """
    points = np.array([_coords(p) for p in (p1, p2, p3, p4)])
    origin = points.mean(axis=0)
    q = points - origin

    scale = max(np.linalg.norm(q[i] - q[j]) for i in range(4) for j in range(i + 1, 4))
    rows = np.array([q[0] - q[1], q[2] - q[3], q[1] - q[2]])
    sq = np.sum(q ** 2, axis=1)
    beta = 0.5 * np.array([sq[0] - sq[1], sq[2] - sq[3], sq[1] - sq[2]])

    det_x = np.linalg.det(rows)
    if scale == 0.0 or abs(det_x) <= degeneracy_threshold * scale ** 3:
        raise DegeneracyError(f"points are coplanar (|X| = {abs(det_x):.3g}, scale {scale:.3g})")

    center = np.empty(3)
    for j in range(3):
        replaced = rows.copy()
        replaced[:, j] = beta
        center[j] = np.linalg.det(replaced) / det_x
    radius = float(np.linalg.norm(q[0] - center))
    return center + origin, radius


def _sphere_point(history: Sequence[PointLike], k: np.ndarray, k_minus_1: np.ndarray,
                  degeneracy_threshold: float) -> Tuple[np.ndarray, np.ndarray, float]:
    center, radius = circumsphere(*history, degeneracy_threshold=degeneracy_threshold)
    midpoint = 0.5 * (k + k_minus_1)
    u = midpoint - center
    norm = float(np.linalg.norm(u))
    if norm <= degeneracy_threshold * max(radius, 1.0):
        raise DegeneracyError("segment midpoint coincides with the sphere center")
    return center + radius * u / norm, center, radius


def _as_supplement(coords: np.ndarray, k: PointLike, k_minus_1: PointLike):
    if isinstance(k, PositionVector):
        report = _supplement_report(coords, k, k_minus_1)
        return PositionVector(
            lon=float(coords[0]), lat=float(coords[1]), alt=float(coords[2]),
            source_id=k.source_id, sequence=k.sequence, synthetic=True, report=report,
        )
    return coords


def supplement_point(history: Sequence[PointLike], k: PointLike, k_minus_1: PointLike,
                     degeneracy_threshold: float = parameters.DEGENERACY_THRESHOLD):
    """
    Intersection of the circumsphere of `history` with the line through its
    center and the midpoint M of (k, k_minus_1), on the side of M.

    Args:
        history: Four positions defining the sphere
        k: Newly received position
        k_minus_1: Previous accepted position
        degeneracy_threshold: Relative threshold for the sphere determinant

    Returns:
        PositionVector (synthetic) when k is a PositionVector, else an array

    Raises:
        DegeneracyError: sphere undefined or M at its center
    """
    if len(history) != HISTORY_LENGTH:
        raise DomainError(f"sphere supplement needs {HISTORY_LENGTH} points, got {len(history)}")
    point, _, _ = _sphere_point(history, _coords(k), _coords(k_minus_1), degeneracy_threshold)
    return _as_supplement(point, k, k_minus_1)


def linear_supplement(k: PointLike, k_minus_1: PointLike):
    """Component-wise mean of two positions."""
    return _as_supplement(0.5 * (_coords(k) + _coords(k_minus_1)), k, k_minus_1)


def _parse_time(text: str) -> Optional[Tuple[datetime, bool]]:
    for fmt in TIME_FORMATS:
        try:
            return datetime.strptime(text, fmt), '.' in fmt
        except ValueError:
            continue
    return None


def _midpoint_time(earlier: str, later: str) -> str:
    a, b = _parse_time(earlier), _parse_time(later)
    if a is None or b is None:
        return later
    seconds = [t.hour * 3600 + t.minute * 60 + t.second + t.microsecond / 1e6 for t, _ in (a, b)]
    if seconds[1] < seconds[0]:
        seconds[1] += 86400.0
    mid = (sum(seconds) / 2.0) % 86400.0
    hours, rest = divmod(mid, 3600.0)
    minutes, secs = divmod(rest, 60.0)
    if a[1] or b[1]:
        millis = int(round(secs * 1000.0))
        if millis >= 60000:
            millis = 59999
        return f'{int(hours):02d}:{int(minutes):02d}:{millis // 1000:02d}.{millis % 1000:03d}'
    return f'{int(hours):02d}:{int(minutes):02d}:{int(secs):02d}'


def _supplement_report(coords: np.ndarray, k: PositionVector, k_minus_1: PointLike) -> Optional[PositionReport]:
    if k.report is None:
        return None
    earlier = k_minus_1.report if isinstance(k_minus_1, PositionVector) else None
    generated_time, logged_time = k.report.generated_time, k.report.logged_time
    if earlier is not None:
        generated_time = _midpoint_time(earlier.generated_time, generated_time)
        logged_time = _midpoint_time(earlier.logged_time, logged_time)
    return replace(
        k.report,
        longitude=float(coords[0]),
        latitude=float(coords[1]),
        altitude=int(round(coords[2])),
        generated_time=generated_time,
        logged_time=logged_time,
    )


def _to_vector(window: MinkowskiWindow, local: np.ndarray, k: PositionVector, k_minus_1: PositionVector):
    coords = window.frame.to_geodetic(local) if window.frame else local
    return _as_supplement(coords, k, k_minus_1)


def process_packet(window: MinkowskiWindow, incoming: PositionVector) -> Tuple[MinkowskiWindow, ProcessDecision]:
    """
    Decide what to do with one packet and update the window.

    m < min(window): abandon, replace the largest entry with m.
    m == 0: an exact repeat of the last accepted position, always abandoned.
    m >= max(window): relay with a supplement, replace the smallest entry with m.
    Otherwise relay and leave the window alone.

    Args:
        window: Warmed window for incoming.source_id
        incoming: Newly received position

    Returns:
        (window, decision); the window is updated in place
    """
    if not window.warmed:
        raise WindowStateError("window has not been warmed up")
    if incoming.sequence <= window.last_sequence:
        raise WindowStateError(
            f"packet {incoming.sequence} arrived after {window.last_sequence} for {incoming.source_id!r}"
        )

    previous = window.history[-1]
    new_local = window.local(incoming)
    prev_local = window.local(previous)
    m = minkowski_distance(new_local, prev_local, window.order)
    window.last_sequence = incoming.sequence

    lowest, highest = min(window.distances), max(window.distances)
    if m == 0.0 or m < lowest:
        # repeats never reach the supplement branch
        if m < lowest:
            window.distances[int(np.argmax(window.distances))] = m
        return window, ProcessDecision(Action.ABANDON, incoming, m)

    if m >= highest:
        window.distances[int(np.argmin(window.distances))] = m
        sphere_points = [new_local] + [window.local(h) for h in list(window.history)[-1:-4:-1]]
        center, radius = None, None
        try:
            local, center, radius = _sphere_point(sphere_points, new_local, prev_local, window.degeneracy_threshold)
            fallback = Fallback.SPHERE
        except DegeneracyError as e:
            logger.debug(f"sphere supplement unavailable at packet {incoming.sequence}: {e}")
            local = 0.5 * (new_local + prev_local)
            fallback = Fallback.LINEAR
        supplement = _to_vector(window, local, incoming, previous)
        window.history.append(incoming)
        return window, ProcessDecision(
            Action.RELAY_WITH_SUPPLEMENT, incoming, m, supplement, fallback, center, radius,
        )

    window.history.append(incoming)
    return window, ProcessDecision(Action.RELAY, incoming, m)


@dataclass
class TrajectoryStats:
    """Counts for one aircraft stream; relayed includes relays with supplement."""

    input_count: int = 0
    warmup_count: int = 0
    relayed_count: int = 0
    abandoned_count: int = 0
    supplemented_count: int = 0
    sphere_count: int = 0
    linear_count: int = 0
    decisions: List[ProcessDecision] = field(default_factory=list, repr=False)

    @property
    def abandoned_fraction(self) -> float:
        return self.abandoned_count / self.input_count if self.input_count else 0.0

    @property
    def supplemented_fraction(self) -> float:
        processed = self.input_count - self.warmup_count
        return self.supplemented_count / processed if processed else 0.0

    def record(self, decision: ProcessDecision):
        self.decisions.append(decision)
        if decision.action is Action.ABANDON:
            self.abandoned_count += 1
            return
        self.relayed_count += 1
        if decision.action is Action.RELAY_WITH_SUPPLEMENT:
            self.supplemented_count += 1
            if decision.fallback_used is Fallback.SPHERE:
                self.sphere_count += 1
            else:
                self.linear_count += 1

    def as_dict(self) -> Dict[str, float]:
        return {
            'input_count': self.input_count,
            'warmup_count': self.warmup_count,
            'relayed_count': self.relayed_count,
            'abandoned_count': self.abandoned_count,
            'supplemented_count': self.supplemented_count,
            'sphere_supplements': self.sphere_count,
            'linear_supplements': self.linear_count,
            'abandoned_fraction': self.abandoned_fraction,
            'supplemented_fraction': self.supplemented_fraction,
        }


@dataclass(frozen=True)
class MecConfig:
    window_size: int = parameters.WINDOW_SIZE
    minkowski_order: float = parameters.MINKOWSKI_ORDER
    degeneracy_threshold: float = parameters.DEGENERACY_THRESHOLD
    metric_normalization: bool = False

    def new_window(self) -> MinkowskiWindow:
        return MinkowskiWindow(
            capacity=self.window_size,
            order=self.minkowski_order,
            degeneracy_threshold=self.degeneracy_threshold,
            metric_normalization=self.metric_normalization,
        )


class OnboardProcessor:
    """
    Drives one MinkowskiWindow per aircraft over a mixed packet stream.

    Warm-up packets are relayed unchanged; once an aircraft has N+1
    packets its window is filled and every later packet goes through
    process_packet.
    """

    def __init__(self, config: Optional[MecConfig] = None):
        self.config = config or MecConfig()
        # fail on bad window settings before any packet arrives
        self.config.new_window()
        self.windows: Dict[str, MinkowskiWindow] = {}
        self.stats: Dict[str, TrajectoryStats] = {}
        self._pending: Dict[str, List[PositionVector]] = {}

    def feed(self, packet: PositionVector) -> List[PositionVector]:
        """
        Process one packet.

        Returns:
            Packets to forward, in order (supplement first, then the packet)
        """
        source = packet.source_id
        stats = self.stats.setdefault(source, TrajectoryStats())
        stats.input_count += 1

        window = self.windows.get(source)
        if window is None:
            pending = self._pending.setdefault(source, [])
            if pending and packet.sequence <= pending[-1].sequence:
                raise WindowStateError(f"packet {packet.sequence} out of order for {source!r}")
            pending.append(packet)
            stats.warmup_count += 1
            if len(pending) == self.config.window_size + 1:
                self.windows[source] = warm_up(self.config.new_window(), pending)
                del self._pending[source]
            return [packet]

        _, decision = process_packet(window, packet)
        stats.record(decision)
        if decision.action is Action.ABANDON:
            return []
        if decision.supplement is not None:
            return [decision.supplement, packet]
        return [packet]

    def run(self, packets: Iterable[PositionVector]) -> List[PositionVector]:
        output = []
        for packet in packets:
            output.extend(self.feed(packet))
        return output


def run_trajectory(
    reports: Sequence[PositionVector],
    config: Optional[MecConfig] = None,
) -> Tuple[List[PositionVector], TrajectoryStats]:
    """
    Stream one aircraft's reports through warm-up and process_packet.

    Args:
        reports: Ordered reports of a single aircraft
        config: Window size, order and degeneracy threshold

    Returns:
        (optimized reports with supplements interleaved, statistics)
    """
    config = config or MecConfig()
    minimum = config.window_size + 2
    if len(reports) < minimum:
        raise ConfigurationError(
            f"trajectory has {len(reports)} reports, at least {minimum} are needed for window size "
            f"{config.window_size}",
            key='window_size',
        )
    sources = {r.source_id for r in reports}
    if len(sources) > 1:
        raise ConfigurationError(f"run_trajectory takes one aircraft, got {len(sources)}; use OnboardProcessor")

    processor = OnboardProcessor(config)
    optimized = processor.run(reports)
    stats = processor.stats[reports[0].source_id]
    logger.info(
        f"trajectory {reports[0].source_id!r}: {stats.abandoned_count} abandoned, "
        f"{stats.supplemented_count} supplemented of {stats.input_count}"
    )
    return optimized, stats
