"""Transition-time fingerprinting, CUSUM detection and watermark checks.

Thin wrapper over the compiled ``_core`` module; see ``help(tcfp._core)``.
"""

from ._core import *  # noqa: F401,F403
from ._core import TcfpError, simulate, default_scenario_json

__all__ = [name for name in dir() if not name.startswith("_")]


def simulate_default(duration_s: float = 3600.0, seed: int = 1):
    """Run the built-in plant; returns (reported, truth, ground_truth_json)."""
    return simulate(default_scenario_json(), duration_s, seed)
