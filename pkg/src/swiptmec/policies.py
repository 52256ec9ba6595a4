"""Reference flight policies.

These are scripted baselines, not learners. Each policy maps the
current situation to one slot action. The seeker reads terminal
batteries straight from the environment, a privilege a learning agent
does not get.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .environment import Action, SwiptMecEnv

# Cruise speed for the seeker, close to the propulsion sweet spot.
SEEKER_CRUISE = 10.0

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PolicyDecision:
    """An action plus a short human-readable note on why."""

    action: Action
    annotation: str = ""


class HoverPolicy:
    """Never moves."""

    name = "hover"

    def reset(self, env: SwiptMecEnv) -> None:
        pass

    def decide(self, env: SwiptMecEnv) -> PolicyDecision:
        return PolicyDecision(Action(0.0, 0.0), "hold")


class RandomPolicy:
    """Uniform speed and heading, deterministic under its seed."""

    name = "random"

    def __init__(self, seed: int = 0):
        self._seed = seed
        self._rng = np.random.default_rng(seed)

    def reset(self, env: SwiptMecEnv) -> None:
        self._rng = np.random.default_rng(self._seed)

    def decide(self, env: SwiptMecEnv) -> PolicyDecision:
        v = float(self._rng.uniform(0.0, env.cfg.v_max))
        theta = float(self._rng.uniform(0.0, _TWO_PI))
        if theta >= _TWO_PI:  # guard the open interval edge
            theta = 0.0
        return PolicyDecision(Action(v, theta), "random")


class SeekerPolicy:
    """Flies toward the terminal with the lowest battery.

    Cruises at the lesser of SEEKER_CRUISE and the speed that lands
    exactly on the target this slot, so it stops on top rather than
    overshooting and then holds there while the target stays lowest.
    """

    name = "seeker"

    def reset(self, env: SwiptMecEnv) -> None:
        pass

    def decide(self, env: SwiptMecEnv) -> PolicyDecision:
        target = min(env.terminals, key=lambda t: (t.battery, t.id))
        dx = target.position[0] - env.position[0]
        dy = target.position[1] - env.position[1]
        distance = math.hypot(dx, dy)
        if distance == 0.0:
            return PolicyDecision(Action(0.0, 0.0), f"hold on terminal {target.id}")
        v = min(SEEKER_CRUISE, distance / env.cfg.tau)
        theta = math.atan2(dy, dx) % _TWO_PI
        return PolicyDecision(Action(v, theta), f"seek terminal {target.id}")


POLICY_NAMES = ("hover", "random", "seeker")


def make_policy(name: str, seed: int = 0):
    """Instantiate a reference policy by name."""
    if name == "hover":
        return HoverPolicy()
    if name == "random":
        return RandomPolicy(seed)
    if name == "seeker":
        return SeekerPolicy()
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
