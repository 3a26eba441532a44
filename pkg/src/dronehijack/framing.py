"""DUML envelope, Kermit CRC and the 60-byte control packet.

Control packet layout (all offsets inclusive)::

    0..45   prefix   opaque, starts with the 0x55 DUML delimiter
    46..51  movement 48-bit stick field, bit 47 is the MSB of byte 46
    52..57  unknown  opaque
    58..59  crc      CRC-16/KERMIT over bytes 0..57, little-endian

The prefix begins with ``0x55`` and a body-length byte, so a well-formed
control packet is also a :class:`DumlFrame` whose body is bytes 2..57.
"""

from __future__ import annotations

import csv
import enum
import struct
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Optional

DUML_DELIMITER = 0x55
CONTROL_LENGTH = 0x3C
PREFIX_LENGTH = 46
MOVEMENT_LENGTH = 6
UNKNOWN_LENGTH = 6
MOVEMENT_OFFSET = PREFIX_LENGTH
UNKNOWN_OFFSET = MOVEMENT_OFFSET + MOVEMENT_LENGTH
CRC_OFFSET = UNKNOWN_OFFSET + UNKNOWN_LENGTH

KERMIT_POLY = 0x8408  # 0x1021 bit-reversed
DEFAULT_SEED = 0x3692

# Columns printed bold in the command table: never set by any command.
STATIC_ZERO_BITS = frozenset({41, 40, 36, 35, 31, 30, 10, 9, 7, 6, 5, 4})


class FramingError(ValueError):
    pass


class BadLength(FramingError):
    pass


class BadDelimiter(FramingError):
    pass


class CrcMismatch(FramingError):
    pass


@dataclass(frozen=True)
class CrcConfig:
    poly: int = KERMIT_POLY
    seed: int = DEFAULT_SEED


DEFAULT_CRC = CrcConfig()


@lru_cache(maxsize=8)
def _crc_table(poly: int) -> tuple:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = (crc >> 1) ^ poly if crc & 1 else crc >> 1
        table.append(crc)
    return tuple(table)


def crc16_kermit(data: bytes, cfg: CrcConfig = DEFAULT_CRC) -> int:
    """Reflected CRC-16 (Kermit family) of ``data`` starting from ``cfg.seed``."""
    table = _crc_table(cfg.poly)
    crc = cfg.seed & 0xFFFF
    for byte in data:
        crc = (crc >> 8) ^ table[(crc ^ byte) & 0xFF]
    return crc


# ---------------------------------------------------------------- DUML envelope


@dataclass(frozen=True)
class DumlFrame:
    body: bytes
    crc16: int

    @property
    def delimiter(self) -> int:
        return DUML_DELIMITER

    @property
    def length(self) -> int:
        return len(self.body)


def encode_duml(body: bytes, cfg: CrcConfig = DEFAULT_CRC) -> bytes:
    if len(body) > 0xFF:
        raise BadLength(f"DUML body too long: {len(body)}")
    head = bytes((DUML_DELIMITER, len(body))) + bytes(body)
    return head + struct.pack("<H", crc16_kermit(head, cfg))


def decode_duml(data: bytes, cfg: CrcConfig = DEFAULT_CRC) -> DumlFrame:
    if len(data) < 4:
        raise BadLength(f"DUML frame too short: {len(data)}")
    if data[0] != DUML_DELIMITER:
        raise BadDelimiter(f"expected 0x55, got 0x{data[0]:02x}")
    if data[1] != len(data) - 4:
        raise BadLength(f"length byte {data[1]} does not match body size {len(data) - 4}")
    (crc,) = struct.unpack_from("<H", data, len(data) - 2)
    if crc16_kermit(data[:-2], cfg) != crc:
        raise CrcMismatch("DUML CRC mismatch")
    return DumlFrame(body=bytes(data[2:-2]), crc16=crc)


# ------------------------------------------------------------ movement field


class CommandId(enum.Enum):
    Idle = "I"
    FullRotateRight = "FRR"
    FullRotateLeft = "FRL"
    FullDown = "FD"
    FullUp = "FU"
    FullForward = "FFW"
    FullBackward = "FB"
    FullFlyRight = "FFR"
    FullFlyLeft = "FFL"
    Ready = "RDY"

    @classmethod
    def parse(cls, text: str) -> "CommandId":
        for cmd in cls:
            if text in (cmd.name, cmd.value):
                return cmd
        raise ValueError(f"unknown command {text!r}")


@dataclass(frozen=True)
class MovementField:
    """48 stick bits; ``value`` bit 47 corresponds to the MSB of packet byte 46."""

    value: int = 0

    def __post_init__(self):
        if not 0 <= self.value < 1 << 48:
            raise ValueError("movement field is 48 bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "MovementField":
        value = 0
        for bit in bits:
            if not 0 <= bit < 48:
                raise ValueError(f"bit index {bit} out of range")
            value |= 1 << bit
        return cls(value)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "MovementField":
        if len(raw) != MOVEMENT_LENGTH:
            raise BadLength(f"movement field is 6 bytes, got {len(raw)}")
        return cls(int.from_bytes(raw, "big"))

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(MOVEMENT_LENGTH, "big")

    def bit(self, index: int) -> int:
        return (self.value >> index) & 1

    @property
    def set_bits(self) -> frozenset:
        return frozenset(i for i in range(48) if self.value >> i & 1)

    def bitstring(self) -> str:
        """Bits 47 down to 0, the column order of the command table."""
        return format(self.value, "048b")


@lru_cache(maxsize=1)
def command_table() -> dict:
    """CommandId -> MovementField, loaded from the bundled CSV fixture."""
    table = {}
    text = resources.files("dronehijack.data").joinpath("movement_table.csv").read_text()
    reader = csv.reader(text.splitlines())
    header = next(reader)
    columns = [int(name[3:]) for name in header[1:]]
    for row in reader:
        bits = [col for col, flag in zip(columns, row[1:]) if flag.strip() == "1"]
        table[CommandId[row[0]]] = MovementField.from_bits(bits)
    return table


def movement_for(cmd: CommandId) -> MovementField:
    return command_table()[cmd]


def classify_movement(m: MovementField) -> Optional[CommandId]:
    """Exact-match lookup; returns None for anything not in the table."""
    for cmd, pattern in command_table().items():
        if pattern == m:
            return cmd
    return None


def altered_bits(m: MovementField, baseline: MovementField) -> tuple:
    """Return ``(changed, active_low)`` bit-index sets of ``m`` relative to ``baseline``.

    ``active_low`` holds the changed bits that are set in the baseline and
    cleared in ``m``.
    """
    changed = frozenset(i for i in range(48) if (m.value ^ baseline.value) >> i & 1)
    active_low = frozenset(i for i in changed if baseline.bit(i) and not m.bit(i))
    return changed, active_low


# ------------------------------------------------------------ control packet


@dataclass(frozen=True)
class ControlPacket:
    prefix: bytes
    movement: MovementField
    unknown: bytes
    crc: int

    def to_bytes(self) -> bytes:
        return self.prefix + self.movement.to_bytes() + self.unknown + struct.pack("<H", self.crc)


def encode_control(
    m: MovementField, prefix: bytes, unknown: bytes, cfg: CrcConfig = DEFAULT_CRC
) -> bytes:
    if len(prefix) != PREFIX_LENGTH:
        raise BadLength(f"prefix must be {PREFIX_LENGTH} bytes, got {len(prefix)}")
    if len(unknown) != UNKNOWN_LENGTH:
        raise BadLength(f"unknown region must be {UNKNOWN_LENGTH} bytes, got {len(unknown)}")
    head = bytes(prefix) + m.to_bytes() + bytes(unknown)
    return head + struct.pack("<H", crc16_kermit(head, cfg))


def decode_control(pkt: bytes, cfg: CrcConfig = DEFAULT_CRC) -> ControlPacket:
    if len(pkt) != CONTROL_LENGTH:
        raise BadLength(f"control packet must be {CONTROL_LENGTH} bytes, got {len(pkt)}")
    (crc,) = struct.unpack_from("<H", pkt, CRC_OFFSET)
    if crc16_kermit(pkt[:CRC_OFFSET], cfg) != crc:
        raise CrcMismatch("control packet CRC mismatch")
    return ControlPacket(
        prefix=bytes(pkt[:MOVEMENT_OFFSET]),
        movement=MovementField.from_bytes(pkt[MOVEMENT_OFFSET:UNKNOWN_OFFSET]),
        unknown=bytes(pkt[UNKNOWN_OFFSET:CRC_OFFSET]),
        crc=crc,
    )


def movement_bytes(pkt: bytes) -> bytes:
    """Raw bytes 46..51 of a control packet, no integrity check."""
    return bytes(pkt[MOVEMENT_OFFSET:UNKNOWN_OFFSET])
