"""Command-table derivation from correlated payloads."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from ..framing import MovementField, altered_bits
from .correlation import MANEUVER_COMMAND, CorrelationReport


class MissingIdleBaseline(LookupError):
    pass


@dataclass(frozen=True)
class BitDiffEntry:
    payload: bytes
    changed: frozenset
    active_low: frozenset

    def to_json(self) -> dict:
        return {
            "payload": self.payload.hex(),
            "changed": sorted(self.changed, reverse=True),
            "active_low": sorted(self.active_low, reverse=True),
        }


@dataclass(frozen=True)
class BitDiffReport:
    baseline: bytes
    entries: Dict[str, BitDiffEntry]
    conflicts: Tuple[str, ...] = ()

    @property
    def active_low_union(self) -> frozenset:
        out = frozenset()
        for entry in self.entries.values():
            out |= entry.active_low
        return out

    def to_json(self) -> dict:
        return {
            "baseline": self.baseline.hex(),
            "commands": {name: self.entries[name].to_json() for name in sorted(self.entries)},
            "active_low_union": sorted(self.active_low_union, reverse=True),
            "conflicts": list(self.conflicts),
        }


def derive_bit_table(report: CorrelationReport, idle_payload: Optional[bytes] = None) -> BitDiffReport:
    idle_payload = idle_payload or report.idle_payload
    if not idle_payload:
        raise MissingIdleBaseline("no idle payload to diff against")
    baseline = MovementField.from_bytes(idle_payload)
    entries: Dict[str, BitDiffEntry] = {}
    conflicts = []
    for assoc in report.associations:
        cmd = MANEUVER_COMMAND.get(assoc.maneuver)
        if cmd is None:
            continue
        changed, active_low = altered_bits(MovementField.from_bytes(assoc.payload), baseline)
        entry = BitDiffEntry(assoc.payload, changed, active_low)
        name = cmd.name
        if name in entries and entries[name].payload != assoc.payload:
            conflicts.append(name)
            continue
        entries[name] = entry
    return BitDiffReport(idle_payload, entries, tuple(conflicts))
