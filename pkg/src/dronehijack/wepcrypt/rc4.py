"""RC4 keystream generation.

Seeds whose length OpenSSL accepts (every WEP seed does) go through the
``cryptography`` ARC4 binding; any other length falls back to a plain
KSA/PRGA loop.
"""

from __future__ import annotations

from functools import lru_cache

from cryptography.hazmat.decrepit.ciphers.algorithms import ARC4
from cryptography.hazmat.primitives.ciphers import Cipher

_NATIVE_SEED_SIZES = frozenset(size // 8 for size in ARC4.key_sizes)


class BadSeedLength(ValueError):
    pass


def _rc4_python(seed: bytes, n: int) -> bytes:
    S = list(range(256))
    j = 0
    klen = len(seed)
    for i in range(256):
        j = (j + S[i] + seed[i % klen]) & 0xFF
        S[i], S[j] = S[j], S[i]
    out = bytearray(n)
    i = j = 0
    for k in range(n):
        i = (i + 1) & 0xFF
        j = (j + S[i]) & 0xFF
        S[i], S[j] = S[j], S[i]
        out[k] = S[(S[i] + S[j]) & 0xFF]
    return bytes(out)


@lru_cache(maxsize=4096)
def rc4_keystream(seed: bytes, n: int) -> bytes:
    if not 1 <= len(seed) <= 256:
        raise BadSeedLength(f"RC4 seed must be 1..256 bytes, got {len(seed)}")
    if n < 0:
        raise ValueError("keystream length must be non-negative")
    seed = bytes(seed)
    if len(seed) in _NATIVE_SEED_SIZES:
        return Cipher(ARC4(seed), mode=None).encryptor().update(bytes(n))
    return _rc4_python(seed, n)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    n = min(len(a), len(b))
    return (int.from_bytes(a[:n], "big") ^ int.from_bytes(b[:n], "big")).to_bytes(n, "big")
