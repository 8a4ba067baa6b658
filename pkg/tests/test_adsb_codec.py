"""Tests for 112-bit extended squitter framing and CRC-24."""

import os
import sys

import bitstruct
import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from core.adsb_codec import (
    PREAMBLE,
    AdsbFrame,
    decode_frame,
    encode_frame,
    frames_from_hex,
    frames_to_hex,
    modes_crc24,
)
from core.exceptions import EncodingError, FramingError, IntegrityError

# Airborne position and identification squitters captured off the air
GOLDEN_FRAMES = [
    ('8D406B902015A678D4D220AA4BDA', 0x406B90),
    ('8D4840D6202CC371C32CE0576098', 0x4840D6),
]


class TestGoldenFrames:

    @pytest.mark.parametrize("hex_frame,icao", GOLDEN_FRAMES)
    def test_decode(self, hex_frame, icao):
        frame = decode_frame(bytes.fromhex(hex_frame))
        assert frame.downlink_format == 17
        assert frame.capability == 5
        assert frame.capability_kind == 'CA'
        assert frame.icao_address == icao
        assert frame.parity == int(hex_frame[-6:], 16)

    @pytest.mark.parametrize("hex_frame,icao", GOLDEN_FRAMES)
    def test_reencode_is_identical(self, hex_frame, icao):
        frame = decode_frame(bytes.fromhex(hex_frame))
        assert encode_frame(frame).hex().upper() == hex_frame

    def test_parity_is_crc_of_data(self):
        data = bytes.fromhex(GOLDEN_FRAMES[0][0])
        assert modes_crc24(data[:11]) == int.from_bytes(data[11:], 'big')
        assert modes_crc24(data) == 0

    def test_icao_hex(self):
        frame = decode_frame(bytes.fromhex(GOLDEN_FRAMES[1][0]))
        assert frame.icao_hex == '4840D6'


class TestIntegrity:

    def test_every_single_bit_flip_detected(self):
        data = bytearray.fromhex(GOLDEN_FRAMES[0][0])
        detected = 0
        for bit in range(112):
            corrupted = bytearray(data)
            corrupted[bit // 8] ^= 0x80 >> (bit % 8)
            with pytest.raises(IntegrityError) as excinfo:
                decode_frame(bytes(corrupted))
            assert excinfo.value.syndrome != 0
            detected += 1
        assert detected == 112

    def test_every_double_bit_flip_detected(self):
        data = bytearray.fromhex(GOLDEN_FRAMES[1][0])
        missed = []
        for first in range(112):
            for second in range(first + 1, 112):
                corrupted = bytearray(data)
                corrupted[first // 8] ^= 0x80 >> (first % 8)
                corrupted[second // 8] ^= 0x80 >> (second % 8)
                if modes_crc24(bytes(corrupted)) == 0:
                    missed.append((first, second))
        assert missed == []

    def test_double_flip_raises(self):
        data = bytearray.fromhex(GOLDEN_FRAMES[0][0])
        data[0] ^= 0x01
        data[13] ^= 0x80
        with pytest.raises(IntegrityError):
            decode_frame(bytes(data))

    def test_syndrome_in_message(self):
        data = bytearray.fromhex(GOLDEN_FRAMES[0][0])
        data[-1] ^= 0x01
        with pytest.raises(IntegrityError, match="syndrome FFF409"):
            decode_frame(bytes(data))


class TestEncoding:

    def test_random_round_trip(self):
        rng = np.random.default_rng(17)
        for _ in range(2000):
            frame = AdsbFrame(
                downlink_format=int(rng.choice([17, 18])),
                capability=int(rng.integers(0, 8)),
                icao_address=int(rng.integers(0, 1 << 24)),
                message=int(rng.integers(0, 1 << 56, dtype=np.uint64)),
            )
            decoded = decode_frame(encode_frame(frame))
            assert (decoded.downlink_format, decoded.capability, decoded.icao_address, decoded.message) == (
                frame.downlink_format, frame.capability, frame.icao_address, frame.message)

    def test_df18_uses_code_format(self):
        frame = decode_frame(encode_frame(AdsbFrame(18, 2, 0xABCDEF, 0)))
        assert frame.capability_kind == 'CF'

    def test_non_squitter_format_rejected(self):
        with pytest.raises(EncodingError) as excinfo:
            encode_frame(AdsbFrame(11, 5, 0x406B90, 0))
        assert excinfo.value.field == 'downlink_format'

    @pytest.mark.parametrize("field,kwargs", [
        ('icao_address', dict(icao_address=1 << 24)),
        ('capability', dict(capability=8)),
        ('message', dict(message=-1)),
    ])
    def test_field_overflow(self, field, kwargs):
        values = dict(downlink_format=17, capability=5, icao_address=0x406B90, message=0)
        values.update(kwargs)
        with pytest.raises(EncodingError) as excinfo:
            encode_frame(AdsbFrame(**values))
        assert excinfo.value.field == field

    def test_preamble(self):
        frame = AdsbFrame(17, 5, 0x406B90, 0x2015A678D4D220)
        raw = encode_frame(frame, preamble=True)
        assert len(raw) == 15
        assert raw[0] == PREAMBLE
        assert decode_frame(raw, preamble=True).icao_address == 0x406B90
        with pytest.raises(FramingError):
            decode_frame(raw[1:], preamble=True)


class TestFraming:

    def test_wrong_length(self):
        with pytest.raises(FramingError):
            decode_frame(bytes.fromhex(GOLDEN_FRAMES[0][0])[:13])

    def test_valid_crc_but_short_format(self):
        head = bitstruct.pack('u5u3u24u56', 11, 5, 0x406B90, 0)
        data = head + modes_crc24(head).to_bytes(3, 'big')
        with pytest.raises(FramingError):
            decode_frame(data)

    def test_hex_file_round_trip(self):
        frames = [bytes.fromhex(h) for h, _ in GOLDEN_FRAMES]
        assert frames_from_hex(frames_to_hex(frames)) == frames

    def test_hex_reader_skips_comments_and_unwraps(self):
        text = "# capture\n\n*8D406B902015A678D4D220AA4BDA;\n8d4840d6202cc371c32ce0576098\n"
        frames = frames_from_hex(text)
        assert [decode_frame(f).icao_hex for f in frames] == ['406B90', '4840D6']

    def test_hex_reader_bad_line(self):
        with pytest.raises(FramingError, match="line 2"):
            frames_from_hex("8D406B902015A678D4D220AA4BDA\nnot-hex\n")
