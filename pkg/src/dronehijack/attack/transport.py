"""How the attacker's radio is reached: in-process or over the TCP relay.

A transport is clocked by its user: ``sync()`` lets one simulator tick pass
and returns the frames the attacker radio heard during it; ``send()``
transmits a raw frame at the current instant.
"""

from __future__ import annotations

from typing import List

from ..linkproto.config import CHANNELS_5GHZ


class DirectTransport:
    def __init__(self, world, name: str = "attacker", channel: int = None) -> None:
        self.world = world
        self.station = world.add_station(name, "attacker", channel)
        self.injected = 0

    @property
    def tick_us(self) -> int:
        return self.world.tick_us

    @property
    def channel(self) -> int:
        return self.station.channel

    def sync(self) -> List[bytes]:
        self.world.step()
        return [raw for _, raw in self.station.drain()]

    def send(self, raw: bytes) -> None:
        self.world.medium.transmit(self.station, raw)
        self.injected += 1

    def tune(self, channel: int) -> None:
        self.world.medium.tune(self.station, channel)
        self.station.drain()

    def close(self) -> None:
        pass


def transport_scanner(transport):
    """Adapter for :func:`detect_beacon_channel`: dwell on a channel, return what was heard."""

    def scan(channel: int, dwell_us: int) -> List[bytes]:
        transport.tune(channel)
        heard = []
        for _ in range(max(1, -(-dwell_us // transport.tick_us))):
            heard.extend(transport.sync())
        return heard

    return scan


__all__ = ["CHANNELS_5GHZ", "DirectTransport", "transport_scanner"]
