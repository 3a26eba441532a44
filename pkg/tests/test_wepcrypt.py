import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dronehijack.captureio import CaptureRecord
from dronehijack.linkproto import dot11
from dronehijack.wepcrypt import (
    IcvMismatch,
    InsufficientSamples,
    KeyVoteTable,
    NoArpTemplateMatch,
    NotFoundWithinBudget,
    WepFrame,
    WepKey,
    arp_samples,
    crack_session,
    decrypt_capture,
    icv,
    ptw_crack,
    recover_keystream,
    rc4_keystream,
    verify_key,
    wep_decrypt,
    wep_encrypt,
)
from dronehijack.wepcrypt.rc4 import _rc4_python
from oracles import crc32_bitwise, rc4

KEY = WepKey.from_hex("a1b2c3d4e5")


def test_rc4_published_vectors():
    assert rc4_keystream(b"Key", 9) == bytes(a ^ b for a, b in zip(b"Plaintext", bytes.fromhex("bbf316e8d940af0ad3")))
    assert bytes(a ^ b for a, b in zip(rc4_keystream(b"Wiki", 5), b"pedia")) == bytes.fromhex("1021bf0420")
    assert bytes(a ^ b for a, b in zip(rc4_keystream(b"Secret", 21), b"Attack at dawn")) == bytes.fromhex(
        "45a01f645fc35b383552544b9bf5"
    )


@given(st.binary(min_size=1, max_size=40), st.integers(0, 64))
def test_rc4_matches_oracle(seed, n):
    assert rc4_keystream(seed, n) == rc4(seed, n)
    assert _rc4_python(seed, n) == rc4(seed, n)


def test_icv_is_crc32_little_endian():
    for text in (b"", b"123456789", bytes(range(256))):
        assert icv(text) == crc32_bitwise(text).to_bytes(4, "little")


@given(st.binary(min_size=3, max_size=3), st.binary(max_size=300))
def test_wep_roundtrip(iv, plain):
    frame = wep_encrypt(KEY, iv, plain)
    assert len(frame.ciphertext) == len(plain) + 4
    assert WepFrame.from_bytes(frame.to_bytes()) == frame
    assert wep_decrypt(KEY, frame) == plain


def test_wep_seed_is_iv_then_key():
    iv = b"\x01\x02\x03"
    frame = wep_encrypt(KEY, iv, b"hello")
    ks = rc4(iv + KEY.key, 9)
    assert frame.ciphertext == bytes(a ^ b for a, b in zip(b"hello" + icv(b"hello"), ks))


def test_wrong_key_and_tamper_detected():
    frame = wep_encrypt(KEY, b"abc", b"payload")
    with pytest.raises(IcvMismatch):
        wep_decrypt(WepKey.from_hex("0000000000"), frame)
    tampered = WepFrame(frame.iv, bytes((frame.ciphertext[0] ^ 1,)) + frame.ciphertext[1:])
    with pytest.raises(IcvMismatch):
        wep_decrypt(KEY, tampered)


def test_key_validation():
    assert WepKey.from_hex("A1B2C3D4E5").bits == 40
    assert WepKey(bytes(13)).bits == 104
    with pytest.raises(ValueError):
        WepKey(bytes(6))


def test_recover_keystream():
    frame = wep_encrypt(KEY, b"xyz", b"known text")
    assert recover_keystream(frame, b"known") == rc4(b"xyz" + KEY.key, 5)


def _samples(key: bytes, n: int, seed: int, width: int = 16):
    rng = random.Random(seed)
    ivs = rng.sample(range(1 << 24), n)
    return [(iv.to_bytes(3, "big"), rc4(iv.to_bytes(3, "big") + key, width)) for iv in ivs]


@pytest.fixture(scope="module")
def samples40():
    return _samples(KEY.key, 20000, 11)


def test_ptw_recovers_40_bit(samples40):
    assert ptw_crack(samples40, 5) == [KEY]


def test_ptw_sample_order_irrelevant(samples40):
    shuffled = list(samples40)
    random.Random(1).shuffle(shuffled)
    assert ptw_crack(shuffled, 5) == ptw_crack(samples40, 5)


def test_vote_tables_merge(samples40):
    a = KeyVoteTable.from_samples(samples40[:7000], 5)
    b = KeyVoteTable.from_samples(samples40[7000:], 5)
    whole = KeyVoteTable.from_samples(samples40, 5)
    assert np.array_equal((a + b).votes, whole.votes)
    assert whole.samples == len(samples40)
    with pytest.raises(ValueError):
        a.merge(KeyVoteTable(13))


def test_verify_key(samples40):
    assert verify_key(samples40, KEY.key)
    assert not verify_key(samples40, bytes(5))


def test_ptw_errors():
    with pytest.raises(InsufficientSamples):
        ptw_crack([], 5)
    with pytest.raises(InsufficientSamples):
        ptw_crack([(b"abc", b"\x00" * 4)], 5)
    with pytest.raises(ValueError):
        ptw_crack([(b"abc", b"\x00" * 16)], 7)
    few = _samples(KEY.key, 200, 3)
    with pytest.raises(NotFoundWithinBudget):
        ptw_crack(few, 5, budget=50)


def _arp_capture(n: int, seed: int):
    """Drone ARP replies, as a monitor would record them."""
    drone = bytes.fromhex("60601fd00001")
    rc = bytes.fromhex("60601fc00002")
    plain = dot11.build_arp(dot11.ARP_REPLY, drone, bytes([192, 168, 2, 1]), rc, bytes([192, 168, 2, 2]))
    rng = random.Random(seed)
    out = []
    for k, iv in enumerate(rng.sample(range(1 << 24), n)):
        body = wep_encrypt(KEY, iv.to_bytes(3, "big"), plain).to_bytes()
        out.append(CaptureRecord(k * 1000, 149, dot11.build_data(drone, rc, drone, body, seq=k & 0xFFF)))
    return out


def test_arp_samples_dedup_and_keystream():
    cap = _arp_capture(50, 2)
    samples = arp_samples(cap + cap)
    assert len(samples) == 50
    iv, ks = samples[0]
    assert ks == rc4(iv + KEY.key, len(ks))


def test_crack_session_end_to_end():
    cap = _arp_capture(20000, 4)
    assert crack_session(cap, key_lengths=(5,)) == KEY


def test_crack_session_errors():
    with pytest.raises(InsufficientSamples):
        crack_session([])
    udp = dot11.build_udp(bytes(4), bytes(4), 1, 2, b"x" * 100)
    body = wep_encrypt(KEY, b"abc", udp).to_bytes()
    rec = CaptureRecord(0, 149, dot11.build_data(b"\x02" * 6, b"\x04" * 6, b"\x02" * 6, body))
    with pytest.raises(NoArpTemplateMatch):
        crack_session([rec])


def test_decrypt_capture_flags_and_leaves_input():
    cap = _arp_capture(3, 1)
    dec = decrypt_capture(cap, KEY)
    assert all(r.decrypted for r in dec) and not any(r.decrypted for r in cap)
    frame = dot11.parse_dot11(dec[0].frame)
    assert not frame.protected
    assert isinstance(dot11.parse_plaintext(frame.body), dot11.ArpPacket)
    # wrong key: records pass through unchanged
    assert decrypt_capture(cap, WepKey(bytes(5))) == cap
