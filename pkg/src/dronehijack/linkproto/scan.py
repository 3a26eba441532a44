"""Channel sweep for the drone's beacon."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

from . import dot11
from .config import CHANNELS_5GHZ


class NotFound(LookupError):
    pass


# scanner(channel, dwell_us) -> frames heard on that channel during the dwell
Scanner = Callable[[int, int], Iterable]


def _raw(item) -> bytes:
    return getattr(item, "frame", item)


def is_drone_beacon(raw: bytes) -> bool:
    try:
        frame = dot11.parse_dot11(raw)
    except dot11.MalformedFrame:
        return False
    return frame.is_beacon and dot11.beacon_role(frame) == dot11.ROLE_DRONE


def detect_beacon_channel(
    scanner: Scanner,
    channels: Sequence[int] = CHANNELS_5GHZ,
    dwell_ms: int = 250,
    beacon_interval_ms: int = 100,
) -> int:
    """Return the first channel on which a drone beacon is heard."""
    if dwell_ms < 2 * beacon_interval_ms:
        raise ValueError("dwell must cover at least two beacon intervals")
    for channel in channels:
        if any(is_drone_beacon(_raw(item)) for item in scanner(channel, dwell_ms * 1000)):
            return channel
    raise NotFound(f"no drone beacon on channels {list(channels)}")
