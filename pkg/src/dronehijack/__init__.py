"""Drone link simulator and attacker toolkit."""

__version__ = "0.1.0"
