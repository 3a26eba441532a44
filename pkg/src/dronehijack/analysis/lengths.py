"""Data-frame length census used to spot the control stream."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

from ..captureio import CaptureRecord
from ..linkproto import dot11


class EmptyHistogram(ValueError):
    pass


def udp_length(rec: CaptureRecord) -> Optional[int]:
    """UDP payload length of a data frame, works on encrypted and decrypted records."""
    try:
        frame = dot11.parse_dot11(rec.frame)
    except dot11.MalformedFrame:
        return None
    return dot11.udp_payload_length(frame)


@dataclass(frozen=True)
class FrameLengthHistogram:
    counts: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def ranked(self) -> list:
        """(length, count) pairs, most frequent first, ties by smaller length."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def to_json(self) -> dict:
        return {
            "counts": {str(length): count for length, count in sorted(self.counts.items())},
            "ranked": [{"length": length, "hex": f"0x{length:02X}", "count": count} for length, count in self.ranked()],
            "total": self.total,
        }


def length_histogram(capture: Iterable[CaptureRecord]) -> FrameLengthHistogram:
    """Counts of UDP payload lengths over data frames; ARP and management frames are skipped."""
    counts = Counter()
    for rec in capture:
        length = udp_length(rec)
        if length is not None:
            counts[length] += 1
    return FrameLengthHistogram(dict(counts))


def dominant_length(hist: FrameLengthHistogram) -> int:
    if not hist.counts:
        raise EmptyHistogram("histogram is empty")
    return hist.ranked()[0][0]
