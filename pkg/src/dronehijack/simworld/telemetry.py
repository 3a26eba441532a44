"""Drone status downlink: an 86-byte DUML frame carrying the body state."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

from ..framing import DEFAULT_CRC, CrcConfig, FramingError, decode_duml, encode_duml
from .kinematics import DroneBody

TELEMETRY_LENGTH = 0x56
_BODY = struct.Struct("<BQ8dB")
_BODY_LENGTH = TELEMETRY_LENGTH - 4
_KIND = 0x7E


@dataclass(frozen=True)
class Telemetry:
    ts_us: int
    body: DroneBody


def encode_telemetry(ts_us: int, body: DroneBody, cfg: CrcConfig = DEFAULT_CRC) -> bytes:
    flags = int(body.propellers) | int(body.airborne) << 1
    packed = _BODY.pack(
        _KIND, ts_us, body.x, body.y, body.z, body.heading, body.vx, body.vy, body.vz, body.yaw_rate, flags
    )
    return encode_duml(packed.ljust(_BODY_LENGTH, b"\0"), cfg)


def decode_telemetry(payload: bytes, cfg: CrcConfig = DEFAULT_CRC) -> Optional[Telemetry]:
    """Parse a telemetry payload; None when it is anything else."""
    if len(payload) != TELEMETRY_LENGTH:
        return None
    try:
        frame = decode_duml(payload, cfg)
    except FramingError:
        return None
    if frame.body[0] != _KIND:
        return None
    _, ts, x, y, z, heading, vx, vy, vz, yaw, flags = _BODY.unpack_from(frame.body)
    body = DroneBody(x, y, z, heading, vx, vy, vz, yaw, bool(flags & 1), bool(flags & 2))
    return Telemetry(ts, body)
