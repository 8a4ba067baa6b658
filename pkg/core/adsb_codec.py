"""
112-bit ADS-B extended squitter frames.

Layout, MSB first: DF (5) | CA/CF (3) | ICAO address (24) | ME (56) | PI (24).
PI is the Mode S CRC-24 of the first 88 bits, generator 0x1FFF409. The ME
payload is carried as an opaque 56-bit integer.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

import bitstruct
import crcmod

from .exceptions import EncodingError, FramingError, IntegrityError

logger = logging.getLogger(__name__)

FRAME_BYTES = 14
DATA_BYTES = 11
EXTENDED_SQUITTER_FORMATS = (17, 18)

# 8-bit constant written ahead of the block for raw captures
PREAMBLE = 0xA1

FRAME_FORMAT = 'u5u3u24u56u24'
FIELD_WIDTHS = (
    ('downlink_format', 5),
    ('capability', 3),
    ('icao_address', 24),
    ('message', 56),
)

_frame_codec = bitstruct.compile(FRAME_FORMAT)
modes_crc24 = crcmod.mkCrcFun(0x1FFF409, initCrc=0, rev=False, xorOut=0)


@dataclass(frozen=True)
class AdsbFrame:
    """One decoded (or to-be-encoded) extended squitter."""

    downlink_format: int
    capability: int
    icao_address: int
    message: int
    parity: Optional[int] = None

    @property
    def capability_kind(self) -> str:
        """'CA' (transponder capability) for DF17, 'CF' (code format) for DF18."""
        return 'CA' if self.downlink_format == 17 else 'CF'

    @property
    def icao_hex(self) -> str:
        return f'{self.icao_address:06X}'


def _check_fields(frame: AdsbFrame):
    for name, width in FIELD_WIDTHS:
        value = getattr(frame, name)
        if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < (1 << width):
            raise EncodingError(f"{name} does not fit in {width} bits: {value!r}", field=name)
    if frame.downlink_format not in EXTENDED_SQUITTER_FORMATS:
        raise EncodingError(
            f"downlink format {frame.downlink_format} is not an extended squitter (17 or 18)",
            field='downlink_format',
        )


def encode_frame(frame: AdsbFrame, preamble: bool = False) -> bytes:
    """
    Pack a frame into 14 octets, recomputing the parity field.

    Args:
        frame: Frame to encode; frame.parity is ignored
        preamble: Prepend the constant preamble octet

    Returns:
        14 (or 15 with preamble) bytes
    """
    _check_fields(frame)
    head = _frame_codec.pack(frame.downlink_format, frame.capability, frame.icao_address, frame.message, 0)
    parity = modes_crc24(head[:DATA_BYTES])
    data = head[:DATA_BYTES] + parity.to_bytes(3, 'big')
    if preamble:
        return bytes([PREAMBLE]) + data
    return data


def decode_frame(data: bytes, preamble: bool = False) -> AdsbFrame:
    """
    Split 14 octets into frame fields and verify the CRC.

    Args:
        data: Raw frame bytes
        preamble: Expect and strip a leading preamble octet

    Returns:
        AdsbFrame with the received parity

    Raises:
        FramingError: wrong length, bad preamble or non-ADS-B downlink format
        IntegrityError: CRC mismatch; carries the 24-bit syndrome
    """
    data = bytes(data)
    if preamble:
        if not data or data[0] != PREAMBLE:
            raise FramingError(f"missing preamble octet 0x{PREAMBLE:02X}")
        data = data[1:]
    if len(data) != FRAME_BYTES:
        raise FramingError(f"frame must be {FRAME_BYTES} octets, got {len(data)}")

    syndrome = modes_crc24(data)
    if syndrome:
        raise IntegrityError(syndrome)

    df, cap, icao, message, parity = _frame_codec.unpack(data)
    if df not in EXTENDED_SQUITTER_FORMATS:
        raise FramingError(f"downlink format {df} is not an extended squitter")
    return AdsbFrame(df, cap, icao, message, parity)


def frames_to_hex(frames: Iterable[bytes]) -> str:
    """One upper-case hex frame per line."""
    return ''.join(f'{bytes(frame).hex().upper()}\n' for frame in frames)


def frames_from_hex(text: str) -> List[bytes]:
    """
    Read hex frames one per line.

    Blank lines and '#' comments are skipped; the '*...;' wrapping used by
    raw receiver feeds is accepted.
    """
    frames = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if line.startswith('*') and line.endswith(';'):
            line = line[1:-1]
        try:
            frames.append(bytes.fromhex(line))
        except ValueError:
            raise FramingError(f"line {number}: not a hex frame: {line!r}")
    logger.debug(f"read {len(frames)} hex frames")
    return frames
