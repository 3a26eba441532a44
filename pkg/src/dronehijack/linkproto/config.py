from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from ..framing import DEFAULT_CRC, CrcConfig
from ..wepcrypt.wep import WepKey
from .dot11 import ip_to_bytes, mac_from_str

CHANNELS_5GHZ = (149, 153, 157, 161, 165)
MAX_PEERS = 8


@dataclass(frozen=True)
class LinkConfig:
    wep_key: WepKey
    channel: int = 149
    width_mhz: int = 5
    drone_ip: str = "192.168.2.1"
    rc_ip: str = "192.168.2.2"
    beacon_interval_ms: int = 100
    peer_timeout_ms: int = 1000
    ssid_hidden: bool = True
    drone_mac: str = "60:60:1f:d0:00:01"
    rc_mac: str = "60:60:1f:c0:00:02"
    control_rate_hz: int = 50
    arp_retry_ms: int = 200
    heartbeat_ms: int = 500
    crc: CrcConfig = field(default=DEFAULT_CRC)

    def __post_init__(self):
        if self.beacon_interval_ms >= self.peer_timeout_ms:
            raise ValueError("beacon_interval must be shorter than peer_timeout")
        if self.drone_ip == self.rc_ip:
            raise ValueError("drone and RC must have distinct IPs")

    @property
    def drone_ip_bytes(self) -> bytes:
        return ip_to_bytes(self.drone_ip)

    @property
    def rc_ip_bytes(self) -> bytes:
        return ip_to_bytes(self.rc_ip)

    @property
    def drone_mac_bytes(self) -> bytes:
        return mac_from_str(self.drone_mac)

    @property
    def rc_mac_bytes(self) -> bytes:
        return mac_from_str(self.rc_mac)

    @property
    def beacon_interval_us(self) -> int:
        return self.beacon_interval_ms * 1000

    @property
    def peer_timeout_us(self) -> int:
        return self.peer_timeout_ms * 1000

    @property
    def control_period_us(self) -> int:
        return 1_000_000 // self.control_rate_hz


@dataclass(frozen=True)
class SessionConstants:
    """Opaque DUML bytes the RC firmware sends unchanged every session."""

    control_prefix: bytes
    control_unknown: bytes
    connection_initiator: bytes
    heartbeat_body: bytes


@lru_cache(maxsize=1)
def reference_constants() -> SessionConstants:
    doc = json.loads(resources.files("dronehijack.data").joinpath("reference_session.json").read_text())
    return SessionConstants(
        control_prefix=bytes.fromhex(doc["control_prefix"]),
        control_unknown=bytes.fromhex(doc["control_unknown"]),
        connection_initiator=bytes.fromhex(doc["connection_initiator"]),
        heartbeat_body=bytes.fromhex(doc["heartbeat_body"]),
    )


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def iv_for(salt: int, counter: int) -> bytes:
    """Uniformly scattered 24-bit IV for the ``counter``-th frame of a sender."""
    return (splitmix64(salt * 0x100000001 + counter) & 0xFFFFFF).to_bytes(3, "big")
