"""Bundled fixtures: command table, session constants, reference scenario and plan."""

from importlib import resources


def path(name: str):
    """Filesystem path of a bundled data file."""
    return resources.files(__name__).joinpath(name)


def reference_scenario():
    from ..simworld.scenario import ScenarioScript

    return ScenarioScript.load(path("reference_scenario.json"))


def all10_plan():
    from ..attack.hijack import HijackPlan

    return HijackPlan.load(path("all10_plan.json"))
