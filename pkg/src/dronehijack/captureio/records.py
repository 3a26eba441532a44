"""On-disk formats.

Capture file (all little-endian)::

    header  "DWCP" | u16 version (=1) | u16 reserved (=0)
    record  u64 ts_us | u8 channel | u8 flags | u16 len | frame[len]

Flags bit 0 marks a record whose frame body was decrypted in place by the
attacker (the 802.11 protected bit is cleared and the body holds plaintext).
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List

MAGIC = b"DWCP"
VERSION = 1
FLAG_DECRYPTED = 0x01

_HEADER = struct.Struct("<4sHH")
_RECORD = struct.Struct("<QBBH")

PCAP_MAGIC = 0xA1B2C3D4
LINKTYPE_IEEE802_11 = 105
_PCAP_HEADER = struct.Struct("<IHHiIII")
_PCAP_RECORD = struct.Struct("<IIII")


class CaptureFormatError(ValueError):
    pass


class UnorderedRecords(ValueError):
    pass


@dataclass(frozen=True)
class CaptureRecord:
    ts_us: int
    channel: int
    frame: bytes
    flags: int = 0

    def __post_init__(self):
        if not 0 <= self.ts_us < 1 << 64:
            raise ValueError("timestamp out of range")
        if not 0 <= self.channel <= 0xFF or not 0 <= self.flags <= 0xFF:
            raise ValueError("channel and flags are single bytes")
        if len(self.frame) > 0xFFFF:
            raise ValueError("frame longer than 65535 bytes")

    @property
    def length(self) -> int:
        return len(self.frame)

    @property
    def t(self) -> float:
        return self.ts_us / 1e6

    @property
    def decrypted(self) -> bool:
        return bool(self.flags & FLAG_DECRYPTED)


def _atomic_write(path, chunks: Iterable[bytes]) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            for chunk in chunks:
                fh.write(chunk)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_capture(records: Iterable[CaptureRecord]) -> bytes:
    out = [_HEADER.pack(MAGIC, VERSION, 0)]
    last = 0
    for rec in records:
        if rec.ts_us < last:
            raise UnorderedRecords(f"timestamp {rec.ts_us} after {last}")
        last = rec.ts_us
        out.append(_RECORD.pack(rec.ts_us, rec.channel, rec.flags, len(rec.frame)))
        out.append(bytes(rec.frame))
    return b"".join(out)


def decode_capture(data: bytes) -> List[CaptureRecord]:
    if len(data) < _HEADER.size:
        raise CaptureFormatError("file shorter than the header")
    magic, version, _ = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CaptureFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CaptureFormatError(f"unsupported capture version {version}")
    records = []
    pos = _HEADER.size
    while pos < len(data):
        if pos + _RECORD.size > len(data):
            raise CaptureFormatError("truncated record header")
        ts, channel, flags, length = _RECORD.unpack_from(data, pos)
        pos += _RECORD.size
        if pos + length > len(data):
            raise CaptureFormatError("truncated record body")
        records.append(CaptureRecord(ts, channel, bytes(data[pos : pos + length]), flags))
        pos += length
    return records


def write_capture(path, records: Iterable[CaptureRecord]) -> int:
    """Write ``records`` atomically; returns the number written."""
    records = list(records)
    blob = encode_capture(records)
    _atomic_write(path, [blob])
    return len(records)


def read_capture(path) -> List[CaptureRecord]:
    return decode_capture(Path(path).read_bytes())


def export_pcap(records: Iterable[CaptureRecord], path) -> int:
    """Classic pcap, 802.11 link type without FCS, microsecond timestamps."""
    records = list(records)
    chunks = [_PCAP_HEADER.pack(PCAP_MAGIC, 2, 4, 0, 0, 65535, LINKTYPE_IEEE802_11)]
    for rec in records:
        sec, usec = divmod(rec.ts_us, 1_000_000)
        chunks.append(_PCAP_RECORD.pack(sec, usec, len(rec.frame), len(rec.frame)))
        chunks.append(bytes(rec.frame))
    _atomic_write(path, chunks)
    return len(records)


def read_pcap(path, channel: int = 0) -> List[CaptureRecord]:
    data = Path(path).read_bytes()
    if len(data) < _PCAP_HEADER.size:
        raise CaptureFormatError("pcap shorter than its global header")
    magic, _, _, _, _, _, linktype = _PCAP_HEADER.unpack_from(data)
    if magic != PCAP_MAGIC or linktype != LINKTYPE_IEEE802_11:
        raise CaptureFormatError("not a little-endian 802.11 pcap")
    pos = _PCAP_HEADER.size
    out = []
    while pos + _PCAP_RECORD.size <= len(data):
        sec, usec, incl, _ = _PCAP_RECORD.unpack_from(data, pos)
        pos += _PCAP_RECORD.size
        out.append(CaptureRecord(sec * 1_000_000 + usec, channel, bytes(data[pos : pos + incl])))
        pos += incl
    return out


def write_observations(path, observations) -> int:
    """Observation log as JSON lines ``{"t": seconds, "maneuver": label}``."""
    lines = [json.dumps({"t": round(o.t, 6), "maneuver": o.maneuver}) + "\n" for o in observations]
    _atomic_write(path, [line.encode() for line in lines])
    return len(lines)


def iter_observation_lines(text: str) -> Iterator[dict]:
    for line in text.splitlines():
        if line.strip():
            yield json.loads(line)


def read_observations(path) -> list:
    from ..simworld.observe import ObservationEvent

    return [ObservationEvent(float(d["t"]), d["maneuver"]) for d in iter_observation_lines(Path(path).read_text())]
