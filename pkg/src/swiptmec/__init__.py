"""Simulator of a UAV that wirelessly powers and edge-computes for
ground IoT terminals, with scripted baselines, an experiment runner,
and a line-JSON environment service."""

__version__ = "0.1.0"

from .environment import Action, EpisodeTrace, SlotReport, SwiptMecEnv, jain_index
from .scenario import (
    ConfigError,
    PlacementError,
    PropulsionParams,
    ScenarioConfig,
    Task,
    Terminal,
    config_from_dict,
    load_config,
    place_terminals,
)

__all__ = [
    "Action",
    "ConfigError",
    "EpisodeTrace",
    "PlacementError",
    "PropulsionParams",
    "ScenarioConfig",
    "SlotReport",
    "SwiptMecEnv",
    "Task",
    "Terminal",
    "config_from_dict",
    "jain_index",
    "load_config",
    "place_terminals",
    "__version__",
]
