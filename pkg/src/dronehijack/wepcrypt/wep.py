"""WEP frame protection: per-frame RC4 seed ``iv || key`` and a CRC-32 ICV."""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

from .rc4 import rc4_keystream, xor_bytes

ICV_LENGTH = 4
IV_LENGTH = 3


class IcvMismatch(ValueError):
    pass


@dataclass(frozen=True)
class WepKey:
    key: bytes

    def __post_init__(self):
        if len(self.key) not in (5, 13):
            raise ValueError(f"WEP key must be 5 or 13 bytes, got {len(self.key)}")

    @classmethod
    def from_hex(cls, text: str) -> "WepKey":
        return cls(bytes.fromhex(text.replace(":", "").strip()))

    def hex(self) -> str:
        return self.key.hex()

    @property
    def bits(self) -> int:
        return len(self.key) * 8

    def __str__(self) -> str:
        return self.hex()


@dataclass(frozen=True)
class WepFrame:
    """The protected part of an 802.11 data frame body."""

    iv: bytes
    ciphertext: bytes
    key_index: int = 0

    def __post_init__(self):
        if len(self.iv) != IV_LENGTH:
            raise ValueError("IV must be 3 bytes")
        if len(self.ciphertext) < ICV_LENGTH:
            raise ValueError("ciphertext shorter than the ICV")
        if not 0 <= self.key_index <= 3:
            raise ValueError("key index is 2 bits")

    def to_bytes(self) -> bytes:
        return self.iv + bytes((self.key_index << 6,)) + self.ciphertext

    @classmethod
    def from_bytes(cls, body: bytes) -> "WepFrame":
        if len(body) < IV_LENGTH + 1 + ICV_LENGTH:
            raise ValueError(f"WEP body too short: {len(body)}")
        return cls(iv=bytes(body[:3]), ciphertext=bytes(body[4:]), key_index=body[3] >> 6)


def icv(plaintext: bytes) -> bytes:
    return struct.pack("<I", zlib.crc32(plaintext) & 0xFFFFFFFF)


def keystream(key: WepKey, iv: bytes, n: int) -> bytes:
    return rc4_keystream(bytes(iv) + key.key, n)


def wep_encrypt(key: WepKey, iv: bytes, plaintext: bytes) -> WepFrame:
    sealed = bytes(plaintext) + icv(plaintext)
    return WepFrame(iv=bytes(iv), ciphertext=xor_bytes(sealed, keystream(key, iv, len(sealed))))


def wep_decrypt(key: WepKey, frame: WepFrame) -> bytes:
    sealed = xor_bytes(frame.ciphertext, keystream(key, frame.iv, len(frame.ciphertext)))
    plaintext, check = sealed[:-ICV_LENGTH], sealed[-ICV_LENGTH:]
    if icv(plaintext) != check:
        raise IcvMismatch("ICV check failed")
    return plaintext


def recover_keystream(frame: WepFrame, known_plaintext: bytes) -> bytes:
    if len(known_plaintext) > len(frame.ciphertext):
        raise ValueError("known plaintext longer than the ciphertext")
    return xor_bytes(frame.ciphertext, known_plaintext)
