"""Seeded trial runners shared by the acceptance checks."""

import random
import time

from dronehijack.simworld import ScenarioScript, run_scenario
from dronehijack.wepcrypt import NotFoundWithinBudget, WepKey, arp_samples, ptw_crack


def trial_key(bits: int, seed: int) -> WepKey:
    rng = random.Random(f"key:{bits}:{seed}")
    return WepKey(bytes(rng.randrange(256) for _ in range(bits // 8)))


def crack_trial(bits: int, seed: int, frames: int):
    """Simulate ``frames`` ARP-driven data frames and run the statistical crack.

    Returns ``(recovered, samples_used, seconds)``; ``seconds`` covers the crack only.
    """
    key = trial_key(bits, seed)
    script = ScenarioScript.from_dict(
        {
            "seed": seed,
            "wep_key": key.hex(),
            "timeline": [],
            "end": 1.0 + frames / 2000 + 0.5,
            "arp_replay": {"start": 1.0, "count": frames, "rate_hz": 2000},
        }
    )
    capture = run_scenario(script).capture
    samples = arp_samples(capture)[:frames]
    t0 = time.perf_counter()
    try:
        found = ptw_crack(samples, bits // 8)
    except NotFoundWithinBudget:
        found = []
    return bool(found) and found[0] == key, len(samples), time.perf_counter() - t0


# criterion number -> summary line, filled by the acceptance tests
ACCEPTANCE = {}
