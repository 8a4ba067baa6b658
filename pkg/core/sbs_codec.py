"""
SBS (BaseStation) airborne position lines.

    MSG,3,<session>,<aircraft>,<hex>,<flight>,<gen_date>,<gen_time>,
    <log_date>,<log_time>,,<altitude>,,,<lat>,<lon>,,,0,0,0,0

22 comma-separated fields; empty fields are written as nothing between
delimiters. Date and time fields are carried as text.
"""

import logging
import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .exceptions import EncodingError, SbsParseError

logger = logging.getLogger(__name__)

FIELD_COUNT = 22
MESSAGE_TYPE = 'MSG'
TRANSMISSION_TYPE = '3'
TRAILING_FLAGS = ('0', '0', '0', '0')

HEX_IDENT = re.compile(r'[0-9A-Fa-f]{6}')

# Field positions
SESSION, AIRCRAFT, HEX, FLIGHT = 2, 3, 4, 5
GEN_DATE, GEN_TIME, LOG_DATE, LOG_TIME = 6, 7, 8, 9
ALTITUDE, LATITUDE, LONGITUDE = 11, 14, 15
TEXT_FIELDS = (
    (GEN_DATE, 'generated_date'),
    (GEN_TIME, 'generated_time'),
    (LOG_DATE, 'logged_date'),
    (LOG_TIME, 'logged_time'),
)


@dataclass(frozen=True)
class PositionReport:
    session_id: int
    aircraft_id: int
    hex_ident: str
    flight_id: int
    generated_date: str
    generated_time: str
    logged_date: str
    logged_time: str
    altitude: int
    latitude: float
    longitude: float


def _check_text(value: str, name: str):
    if not isinstance(value, str) or not value or any(c in value for c in ',\r\n'):
        raise EncodingError(f"must be non-empty text without delimiters, got {value!r}", field=name)


def encode_sbs(report: PositionReport) -> str:
    """
    Serialise a report as one SBS MSG,3 line (no line terminator).

    Raises:
        EncodingError: out-of-range coordinates, bad hex ident or text fields
    """
    lat, lon = float(report.latitude), float(report.longitude)
    if not math.isfinite(lat) or not -90.0 <= lat <= 90.0:
        raise EncodingError(f"latitude out of range: {report.latitude}", field='latitude')
    if not math.isfinite(lon) or not -180.0 <= lon <= 180.0:
        raise EncodingError(f"longitude out of range: {report.longitude}", field='longitude')
    if not isinstance(report.hex_ident, str) or not HEX_IDENT.fullmatch(report.hex_ident):
        raise EncodingError(f"expected 6 hex digits, got {report.hex_ident!r}", field='hex_ident')
    for _, name in TEXT_FIELDS:
        _check_text(getattr(report, name), name)

    fields = [''] * FIELD_COUNT
    fields[0] = MESSAGE_TYPE
    fields[1] = TRANSMISSION_TYPE
    fields[SESSION] = str(int(report.session_id))
    fields[AIRCRAFT] = str(int(report.aircraft_id))
    fields[HEX] = report.hex_ident.upper()
    fields[FLIGHT] = str(int(report.flight_id))
    for index, name in TEXT_FIELDS:
        fields[index] = getattr(report, name)
    fields[ALTITUDE] = str(int(report.altitude))
    fields[LATITUDE] = repr(lat)
    fields[LONGITUDE] = repr(lon)
    fields[-4:] = TRAILING_FLAGS
    return ','.join(fields)


def _parse_int(fields, index: int, name: str) -> int:
    try:
        return int(fields[index])
    except ValueError:
        raise SbsParseError(f"{name} is not an integer: {fields[index]!r}", index)


def _parse_float(fields, index: int, name: str, limit: float) -> float:
    try:
        value = float(fields[index])
    except ValueError:
        raise SbsParseError(f"{name} is not a number: {fields[index]!r}", index)
    if not math.isfinite(value) or abs(value) > limit:
        raise SbsParseError(f"{name} out of range: {value}", index)
    return value


def decode_sbs(line: str) -> PositionReport:
    """
    Parse one SBS MSG,3 line.

    Surrounding whitespace of every field is ignored. The callsign and
    empty fields are not interpreted; the four trailing flags must be "0"
    or empty.

    Raises:
        SbsParseError: wrong field count, wrong literals or bad numeric fields;
            field_index points at the offending field
    """
    fields = [f.strip() for f in line.strip().split(',')]
    if len(fields) != FIELD_COUNT:
        raise SbsParseError(f"expected {FIELD_COUNT} fields, got {len(fields)}", min(len(fields), FIELD_COUNT))
    if fields[0] != MESSAGE_TYPE:
        raise SbsParseError(f"message type must be {MESSAGE_TYPE}, got {fields[0]!r}", 0)
    if fields[1] != TRANSMISSION_TYPE:
        raise SbsParseError(f"transmission type must be {TRANSMISSION_TYPE}, got {fields[1]!r}", 1)
    if not HEX_IDENT.fullmatch(fields[HEX]):
        raise SbsParseError(f"hex ident must be 6 hex digits, got {fields[HEX]!r}", HEX)
    for index, name in TEXT_FIELDS:
        if not fields[index]:
            raise SbsParseError(f"{name} is empty", index)
    for index in range(FIELD_COUNT - len(TRAILING_FLAGS), FIELD_COUNT):
        if fields[index] not in ('', '0'):
            raise SbsParseError(f"trailing flag must be 0 or empty, got {fields[index]!r}", index)

    return PositionReport(
        session_id=_parse_int(fields, SESSION, 'session_id'),
        aircraft_id=_parse_int(fields, AIRCRAFT, 'aircraft_id'),
        hex_ident=fields[HEX].upper(),
        flight_id=_parse_int(fields, FLIGHT, 'flight_id'),
        generated_date=fields[GEN_DATE],
        generated_time=fields[GEN_TIME],
        logged_date=fields[LOG_DATE],
        logged_time=fields[LOG_TIME],
        altitude=_parse_int(fields, ALTITUDE, 'altitude'),
        latitude=_parse_float(fields, LATITUDE, 'latitude', 90.0),
        longitude=_parse_float(fields, LONGITUDE, 'longitude', 180.0),
    )


def iter_sbs_lines(lines: Iterable[str], strict: bool = True) -> Iterator[PositionReport]:
    """
    Decode a stream of SBS lines, skipping blank ones.

    Args:
        lines: Text lines (e.g. an open file)
        strict: Raise on the first bad line; otherwise log and skip it
    """
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield decode_sbs(line)
        except SbsParseError as e:
            if strict:
                raise SbsParseError(f"line {number}: {e.reason}", e.field_index)
            logger.warning(f"Skipping SBS line {number}: {e}")
