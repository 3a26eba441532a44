import struct

import pytest
from hypothesis import given, strategies as st

from dronehijack.captureio import (
    CaptureFormatError,
    CaptureRecord,
    UnorderedRecords,
    decode_capture,
    encode_capture,
    export_pcap,
    read_capture,
    read_observations,
    read_pcap,
    write_capture,
    write_observations,
)
from dronehijack.simworld import ObservationEvent

records_st = st.lists(
    st.tuples(st.integers(0, 2**40), st.integers(0, 255), st.binary(max_size=120), st.integers(0, 255)),
    max_size=30,
).map(lambda rows: [CaptureRecord(ts, ch, fr, fl) for ts, ch, fr, fl in sorted(rows, key=lambda r: r[0])])


@given(records_st)
def test_roundtrip(records):
    assert decode_capture(encode_capture(records)) == records


def test_layout_is_little_endian(tmp_path):
    path = tmp_path / "a.dwcp"
    assert write_capture(path, []) == 0
    assert path.read_bytes() == b"DWCP\x01\x00\x00\x00"
    write_capture(path, [CaptureRecord(0x0102, 149, b"\xaa\xbb", 1)])
    assert path.read_bytes()[8:] == struct.pack("<QBBH", 0x0102, 149, 1, 2) + b"\xaa\xbb"
    assert read_capture(path)[0].decrypted


def test_unordered_rejected(tmp_path):
    recs = [CaptureRecord(5, 1, b""), CaptureRecord(4, 1, b"")]
    with pytest.raises(UnorderedRecords):
        write_capture(tmp_path / "x", recs)
    assert not (tmp_path / "x").exists()
    assert not list(tmp_path.iterdir())


def test_format_errors():
    with pytest.raises(CaptureFormatError):
        decode_capture(b"DWC")
    with pytest.raises(CaptureFormatError):
        decode_capture(b"XXXX\x01\x00\x00\x00")
    with pytest.raises(CaptureFormatError):
        decode_capture(b"DWCP\x02\x00\x00\x00")
    blob = encode_capture([CaptureRecord(1, 1, b"abcd")])
    with pytest.raises(CaptureFormatError):
        decode_capture(blob[:-1])
    with pytest.raises(CaptureFormatError):
        decode_capture(blob[:12])


def test_record_validation():
    with pytest.raises(ValueError):
        CaptureRecord(-1, 0, b"")
    with pytest.raises(ValueError):
        CaptureRecord(0, 256, b"")


def test_pcap_export(tmp_path):
    recs = [CaptureRecord(1_500_000, 149, b"\x80\x00" + bytes(22)), CaptureRecord(2_000_001, 149, b"\xd4\x00")]
    path = tmp_path / "a.pcap"
    assert export_pcap(recs, path) == 2
    raw = path.read_bytes()
    assert struct.unpack_from("<IHHiIII", raw) == (0xA1B2C3D4, 2, 4, 0, 0, 65535, 105)
    assert struct.unpack_from("<IIII", raw, 24) == (1, 500_000, 24, 24)
    assert read_pcap(path, channel=149) == recs


def test_pcap_empty(tmp_path):
    path = tmp_path / "e.pcap"
    assert export_pcap([], path) == 0
    assert len(path.read_bytes()) == 24
    assert read_pcap(path) == []


def test_observation_log(tmp_path):
    obs = [ObservationEvent(1.02, "PropellerOn"), ObservationEvent(3.0000004, "TakeOff")]
    path = tmp_path / "o.jsonl"
    assert write_observations(path, obs) == 2
    lines = path.read_text().splitlines()
    assert lines[0] == '{"t": 1.02, "maneuver": "PropellerOn"}'
    back = read_observations(path)
    assert [(o.t, o.maneuver) for o in back] == [(1.02, "PropellerOn"), (3.0, "TakeOff")]
