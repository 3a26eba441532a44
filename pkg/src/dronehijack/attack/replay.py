"""Verbatim frame replay with the recorded spacing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional

from ..captureio import CaptureRecord
from ..linkproto import dot11


@dataclass(frozen=True)
class ReplayResult:
    injected: int
    ticks: int
    channel: int

    def to_json(self) -> dict:
        return {"injected": self.injected, "ticks": self.ticks, "channel": self.channel}


def handshake_segment(
    capture: Iterable[CaptureRecord], sender: bytes, duration: float = 2.0
) -> List[CaptureRecord]:
    """Frames sent by ``sender`` from its first ARP request onwards, for ``duration`` seconds."""
    out: List[CaptureRecord] = []
    start: Optional[int] = None
    for rec in capture:
        try:
            link = dot11.classify(rec.frame, rec.channel)
        except dot11.MalformedFrame:
            continue
        if link.src_mac != sender:
            continue
        if start is None:
            if link.kind is not dot11.FrameKind.ArpRequest:
                continue
            start = rec.ts_us
        if rec.ts_us - start > duration * 1e6:
            break
        out.append(rec)
    return out


def replay(segment: Iterable[CaptureRecord], transport, channel: Optional[int] = None) -> ReplayResult:
    """Re-emit ``segment`` unchanged, keeping inter-frame spacing at tick resolution."""
    segment = list(segment)
    if not segment:
        raise ValueError("nothing to replay")
    channel = segment[0].channel if channel is None else channel
    transport.tune(channel)
    t0 = segment[0].ts_us
    tick = transport.tick_us
    pos = 0
    ticks = 0
    while pos < len(segment):
        due = t0 + ticks * tick
        while pos < len(segment) and segment[pos].ts_us <= due:
            transport.send(segment[pos].frame)
            pos += 1
        transport.sync()
        ticks += 1
    return ReplayResult(len(segment), ticks, channel)
