"""Python access to the towerlab core."""
import json

from ._towerlab import Tower, build_tower, green, hole_criterion, psi_value, solve_mu
from ._towerlab import run as _run


def run(command, config=None):
    """Run a subcommand and return the summary as a dict."""
    return json.loads(_run(command, json.dumps(config or {})))


__all__ = ["Tower", "build_tower", "green", "hole_criterion", "psi_value", "run", "solve_mu"]
