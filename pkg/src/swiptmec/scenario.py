"""Scenario configuration and terminal placement.

A scenario is a square service area centered on the origin, a set of
ground terminals placed by minimum-separation dart throwing, and the
full parameter set for the channel, harvesting, computation, battery
and reward models. All distances are meters, times are seconds,
frequencies are Hz. UAV-side energies are joules; terminal batteries
and terminal-side energies are microjoules.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields, asdict
from typing import List, Optional, Tuple

import numpy as np


class ConfigError(ValueError):
    """Raised when a configuration file or value is invalid."""


class PlacementError(RuntimeError):
    """Raised when dart throwing cannot fit the requested terminals."""


# Attempt budget for minimum-separation dart throwing.
PLACEMENT_ATTEMPTS = 10_000


@dataclass
class PropulsionParams:
    """Rotary-wing propulsion constants.

    P0_blade and P_ind are the hover blade-profile and induced powers
    in watts. U_tip is the rotor tip speed (m/s), v0_rotor the mean
    rotor induced velocity in hover (m/s), d0_drag the fuselage drag
    ratio, rho_air the air density (kg/m^3), s_solidity the rotor
    solidity, and A_disc the rotor disc area (m^2).
    """

    P0_blade: float = 79.86
    P_ind: float = 88.63
    U_tip: float = 120.0
    v0_rotor: float = 4.03
    d0_drag: float = 0.6
    rho_air: float = 1.225
    s_solidity: float = 0.05
    A_disc: float = 0.503

    def validate(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ConfigError(f"propulsion.{f.name} must be a positive finite number, got {v!r}")


@dataclass
class ScenarioConfig:
    """Full parameter set for one scenario.

    Field names double as the JSON config schema. Unknown keys in a
    config file are rejected rather than ignored.
    """

    # Geometry and episode shape
    area_half_width: float = 20.0   # service square spans [-w, w] on each axis
    I: int = 5                      # terminal count
    T: int = 30                     # slots per episode
    tau: float = 1.0                # slot length, s
    H: float = 5.0                  # UAV altitude, m
    v_max: float = 30.0             # UAV speed ceiling, m/s

    # Carrier and link
    f_c: float = 2.4e9              # carrier frequency, Hz
    c: float = 3e8                  # propagation speed, m/s
    B: float = 1e6                  # bandwidth, Hz
    noise_psd: float = -174.0       # noise power spectral density, dBm/Hz
    a1: float = 4.88                # LoS-probability environment constant
    b1: float = 0.43                # LoS-probability environment constant
    eta_los: float = 0.1            # LoS excess loss, dB
    eta_nlos: float = 21.0          # NLoS excess loss, dB
    beta: float = math.pi / 4       # antenna half-beamwidth, rad

    # Power transfer and uplink
    eta_ps: float = 0.8             # power-splitting ratio routed to harvesting
    P_tran: float = 40.0            # UAV transmit power, W
    P_i: float = 0.1                # terminal uplink transmit power, W
    a2: float = 150.0               # harvester steepness, 1/W
    b2: float = 0.014               # harvester turning point, W
    P_eh_max: float = 0.024         # harvester saturation power, W

    # Computation
    k_cap: float = 1e-28            # effective capacitance coefficient
    nu: float = 3.0                 # CPU power exponent
    f_u: float = 5e9                # UAV CPU frequency, Hz
    f_i: float = 1e9                # terminal CPU frequency, Hz
    D_p: float = 1e3                # task size, bits
    C_i: float = 100.0              # CPU cycles per bit
    p_arrival: float = 0.5          # per-slot task arrival probability
    D_r: float = 1e3                # downlink payload, bits
    delta_up: float = 0.0           # uplink protocol overhead, bits
    delta_down: float = 0.0         # downlink protocol overhead, bits

    # Terminal battery, microjoules
    E_max: float = 5000.0
    E_min: float = 800.0
    delta_e: float = 50.0           # reserve margin above E_min for spending
    dE1: float = 50.0               # standing drain, microwatts
    E_init: Optional[float] = None  # defaults to E_max / 2

    # Service requirements and reward
    R_min: float = 22e6             # minimum acceptable link rate, bit/s
    rho1: float = 0.3               # weight on UAV-side energy spent (J)
    rho2: float = 1.0               # weight on fairness-weighted retained energy (uJ)
    rho3: float = 0.5               # weight on the service bias reward
    C_char: float = 300.0           # bonus for charging the lowest terminal
    R_bar: float = 800.0            # boundary violation penalty
    R_b: float = 50.0               # service bias scale

    propulsion: PropulsionParams = field(default_factory=PropulsionParams)
    seed: int = 1                   # default episode seed

    # Behavior switches
    battery_includes_task_energy: bool = True   # task energy drawn from terminal batteries
    serve_without_task: bool = True             # charge a task-less in-cone terminal
    oob_penalty_conditional: bool = True        # penalty only on violating slots
    bias_served_terminal_only: bool = True      # bias reward for the served terminal only

    def __post_init__(self) -> None:
        if self.E_init is None:
            self.E_init = self.E_max / 2.0
        self.validate()

    def validate(self) -> None:
        def positive(name: str) -> None:
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be positive and finite, got {v!r}")

        def non_negative(name: str) -> None:
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"{name} must be non-negative and finite, got {v!r}")

        for name in ("area_half_width", "tau", "H", "v_max", "f_c", "c", "B",
                     "a1", "b1", "eta_ps", "P_tran", "P_i", "a2", "b2",
                     "P_eh_max", "k_cap", "f_u", "f_i", "D_p", "C_i",
                     "E_max", "R_min"):
            positive(name)
        for name in ("eta_los", "eta_nlos", "D_r", "delta_up", "delta_down",
                     "E_min", "delta_e", "dE1", "rho1", "rho2", "rho3",
                     "C_char", "R_bar", "R_b"):
            non_negative(name)
        if not isinstance(self.I, int) or self.I < 1:
            raise ConfigError(f"I must be a positive integer, got {self.I!r}")
        if not isinstance(self.T, int) or self.T < 0:
            raise ConfigError(f"T must be a non-negative integer, got {self.T!r}")
        if self.nu < 1:
            raise ConfigError(f"nu must be >= 1, got {self.nu!r}")
        if not 0.0 < self.eta_ps <= 1.0:
            raise ConfigError(f"eta_ps must lie in (0, 1], got {self.eta_ps!r}")
        if not 0.0 <= self.p_arrival <= 1.0:
            raise ConfigError(f"p_arrival must lie in [0, 1], got {self.p_arrival!r}")
        if not 0.0 < self.beta < math.pi / 2:
            raise ConfigError(f"beta must lie in (0, pi/2), got {self.beta!r}")
        if self.E_min >= self.E_max:
            raise ConfigError(f"E_min ({self.E_min!r}) must be below E_max ({self.E_max!r})")
        if not self.E_min <= self.E_init <= self.E_max:
            raise ConfigError(f"E_init ({self.E_init!r}) must lie in [E_min, E_max]")
        # A task must be locally computable within one slot.
        if self.C_i * self.D_p > self.tau * self.f_i:
            raise ConfigError(
                f"C_i * D_p ({self.C_i * self.D_p!r} cycles) exceeds tau * f_i "
                f"({self.tau * self.f_i!r}); tasks would not fit a slot")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        self.propulsion.validate()

    # -- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Stable content hash of the configuration."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("ascii")).hexdigest()

    @property
    def cone_radius(self) -> float:
        """Ground radius of the antenna cone."""
        return self.H * math.tan(self.beta)


_CONFIG_FIELDS = {f.name for f in fields(ScenarioConfig)}
_PROP_FIELDS = {f.name for f in fields(PropulsionParams)}
_BOOL_FIELDS = {"battery_includes_task_energy", "serve_without_task",
                "oob_penalty_conditional", "bias_served_terminal_only"}
_INT_FIELDS = {"I", "T", "seed"}


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a validated config from a plain dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be an object, got {type(data).__name__}")
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(data)
    if "propulsion" in kwargs:
        p = kwargs["propulsion"]
        if not isinstance(p, dict):
            raise ConfigError("propulsion must be an object of propulsion parameters")
        bad = set(p) - _PROP_FIELDS
        if bad:
            raise ConfigError(f"unknown propulsion keys: {sorted(bad)}")
        kwargs["propulsion"] = PropulsionParams(**{k: float(v) for k, v in p.items()})
    for key, value in list(kwargs.items()):
        if key == "propulsion":
            continue
        if key in _BOOL_FIELDS:
            if not isinstance(value, bool):
                raise ConfigError(f"{key} must be a boolean, got {value!r}")
        elif key in _INT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key} must be an integer, got {value!r}")
        elif value is not None:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number, got {value!r}")
            kwargs[key] = float(value)
    return ScenarioConfig(**kwargs)


def load_config(path: str) -> ScenarioConfig:
    """Read a JSON config file. Absent fields take defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


@dataclass
class Task:
    """One computation task held by a terminal for the current slot."""

    size_bits: float
    gen_slot: int
    density: float  # CPU cycles per bit

    def cycles(self) -> float:
        return self.size_bits * self.density


@dataclass
class Terminal:
    """A ground IoT terminal with a finite battery."""

    id: int
    position: Tuple[float, float]
    battery: float          # microjoules
    weight: float = 0.0     # service bias weight, set from start distances
    pending_task: Optional[Task] = None


def min_separation(cfg: ScenarioConfig) -> float:
    """Minimum pairwise terminal distance used by the placer."""
    return cfg.area_half_width / 2.0 * math.sqrt(2.0 / cfg.I)


def place_terminals(cfg: ScenarioConfig, seed: int) -> List[Terminal]:
    """Scatter terminals by dart throwing with a minimum separation.

    Deterministic for a fixed (cfg, seed). Raises PlacementError when
    the attempt budget runs out before all terminals fit.
    """
    rng = np.random.default_rng(seed)
    r_min = min_separation(cfg)
    w = cfg.area_half_width
    placed: List[Tuple[float, float]] = []
    attempts = 0
    while len(placed) < cfg.I:
        if attempts >= PLACEMENT_ATTEMPTS:
            raise PlacementError(
                f"could not place {cfg.I} terminals with separation {r_min:.3f} m "
                f"in a {2 * w:.1f} m square after {PLACEMENT_ATTEMPTS} attempts")
        attempts += 1
        x = float(rng.uniform(-w, w))
        y = float(rng.uniform(-w, w))
        if all(math.hypot(x - px, y - py) >= r_min for px, py in placed):
            placed.append((x, y))
    terminals = [Terminal(id=i, position=pos, battery=float(cfg.E_init))
                 for i, pos in enumerate(placed)]
    assign_weights(terminals, (0.0, 0.0))
    return terminals


def assign_weights(terminals: List[Terminal], uav_start: Tuple[float, float]) -> None:
    """Set service bias weights from distances to the UAV start point.

    The farthest terminal gets weight 1; the rest scale linearly with
    distance. All terminals on the start point degenerate to weight 0.
    """
    dists = [math.hypot(t.position[0] - uav_start[0], t.position[1] - uav_start[1])
             for t in terminals]
    top = max(dists) if dists else 0.0
    for t, d in zip(terminals, dists):
        t.weight = d / top if top > 0.0 else 0.0
