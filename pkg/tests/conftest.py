import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dronehijack import data  # noqa: E402
from dronehijack.simworld import run_scenario  # noqa: E402
from dronehijack.wepcrypt import WepKey, decrypt_capture  # noqa: E402

KEY = WepKey.from_hex("a1b2c3d4e5")

# all nine maneuvers plus idle, loss free, no ARP replay
LABELED_SCRIPT = {
    "seed": 5,
    "wep_key": "a1b2c3d4e5",
    "timeline": [
        {"t": 1, "command": "Ready", "duration": 1},
        {"t": 3, "command": "FullUp", "duration": 2},
        {"t": 6, "command": "FullForward", "duration": 1},
        {"t": 8, "command": "FullBackward", "duration": 1},
        {"t": 10, "command": "FullFlyRight", "duration": 1},
        {"t": 12, "command": "FullFlyLeft", "duration": 1},
        {"t": 14, "command": "FullRotateRight", "duration": 1},
        {"t": 16, "command": "FullRotateLeft", "duration": 1},
        {"t": 19, "command": "FullDown", "duration": 3},
    ],
}


@pytest.fixture(scope="session")
def labeled_run():
    from dronehijack.simworld import ScenarioScript

    return run_scenario(ScenarioScript.from_dict(LABELED_SCRIPT))


@pytest.fixture(scope="session")
def labeled_decrypted(labeled_run):
    return decrypt_capture(labeled_run.capture, KEY)


@pytest.fixture(scope="session")
def reference_run():
    return run_scenario(data.reference_scenario())


def pytest_terminal_summary(terminalreporter):
    from harness import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
