"""Ready-made worlds for exercising the active attacks."""

from __future__ import annotations

from typing import Optional

from ..linkproto.config import LinkConfig
from ..simworld.world import World
from ..wepcrypt.wep import WepKey
from .hijack import TakeoverMode

DEFAULT_KEY = WepKey.from_hex("a1b2c3d4e5")


def hijack_world(
    mode: TakeoverMode,
    seed: int = 0,
    *,
    loss: Optional[dict] = None,
    cfg: Optional[LinkConfig] = None,
    monitor: bool = False,
) -> World:
    """A drone whose controller has connected; in AfterRcDisconnect mode the controller
    is then switched off and the drone has dropped it."""
    cfg = cfg or LinkConfig(wep_key=DEFAULT_KEY)
    world = World(cfg, seed=seed, loss=loss, monitor=monitor)
    world.run_for(1.0)
    if mode is TakeoverMode.AfterRcDisconnect:
        world.power_off_rc()
        world.run_for(cfg.peer_timeout_ms / 1000 + 0.2)
    return world
