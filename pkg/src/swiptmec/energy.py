"""Energy models: harvesting, computation, propulsion, batteries.

Unit conventions. UAV-side energies (propulsion, downlink transmission,
onboard computation) are joules. Terminal-side energies (batteries,
local computation, uplink transmission, harvested energy, standing
drain) are microjoules. Powers are watts unless a name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

from .channel import LinkBudget
from .scenario import PropulsionParams, ScenarioConfig, Task

J_PER_UJ = 1e-6
UJ_PER_J = 1e6


@dataclass
class SlotEnergyFlows:
    """Every energy quantity moved during one slot.

    UAV fields are scalars in joules. Terminal fields are per-terminal
    lists in microjoules, indexed by terminal id. For any terminal, at
    most one of e_term_comp / e_term_tran is positive in a slot: a task
    is either computed locally or shipped up, never both.
    """

    e_uav_move: float = 0.0
    e_uav_tran: float = 0.0
    e_uav_comp: float = 0.0
    e_term_comp: List[float] = field(default_factory=list)
    e_term_tran: List[float] = field(default_factory=list)
    e_harvested: List[float] = field(default_factory=list)
    e_daily_drain: List[float] = field(default_factory=list)

    @classmethod
    def zeros(cls, n_terminals: int) -> "SlotEnergyFlows":
        return cls(
            e_term_comp=[0.0] * n_terminals,
            e_term_tran=[0.0] * n_terminals,
            e_harvested=[0.0] * n_terminals,
            e_daily_drain=[0.0] * n_terminals,
        )

    def uav_total(self) -> float:
        """UAV-side energy spent this slot, joules."""
        return self.e_uav_move + self.e_uav_tran + self.e_uav_comp

    def terminal_total_uj(self) -> float:
        """Terminal-side energy spent this slot, microjoules."""
        return sum(self.e_term_comp) + sum(self.e_term_tran)

    def system_total(self) -> float:
        """Total consumed energy this slot, joules. Harvest and the
        standing drain are battery bookkeeping, not consumption."""
        return self.uav_total() + self.terminal_total_uj() * J_PER_UJ


def eh_logistic(p_in: float, a2: float, b2: float, p_max: float) -> float:
    """Non-linear harvested power for a given RF input power.

    Logistic response rescaled so that zero input harvests exactly
    zero and large input saturates at p_max.
    """
    if p_in < 0.0:
        raise ValueError(f"input power must be non-negative, got {p_in!r}")
    zero_level = 1.0 / (1.0 + math.exp(a2 * b2))
    raw = 1.0 / (1.0 + math.exp(-a2 * (p_in - b2)))
    return p_max * (raw - zero_level) / (1.0 - zero_level)


def eh_rate(budget: LinkBudget, cfg: ScenarioConfig) -> float:
    """Harvest rate in watts for a terminal under the current link.

    The harvester sees the power-splitting share of the received
    downlink signal. Zero outside the antenna cone.
    """
    p_in = cfg.eta_ps * cfg.P_tran * budget.channel_gain * budget.antenna_gain
    return eh_logistic(p_in, cfg.a2, cfg.b2, cfg.P_eh_max)


def local_compute_energy(task: Task, cfg: ScenarioConfig) -> float:
    """Energy for a terminal to compute its own task, microjoules."""
    cpu_power = cfg.k_cap * cfg.f_i ** cfg.nu
    duration = task.cycles() / cfg.f_i
    return cpu_power * duration * UJ_PER_J


def local_compute_time(task: Task, cfg: ScenarioConfig) -> float:
    """Seconds a terminal needs to compute its own task."""
    return task.cycles() / cfg.f_i


def uav_compute_energy(task: Task, cfg: ScenarioConfig) -> float:
    """Energy for the UAV to compute an offloaded task, joules."""
    cpu_power = cfg.k_cap * cfg.f_u ** cfg.nu
    duration = task.cycles() / cfg.f_u
    return cpu_power * duration


def uav_compute_time(task: Task, cfg: ScenarioConfig) -> float:
    """Seconds the UAV needs to compute an offloaded task."""
    return task.cycles() / cfg.f_u


def propulsion_power(v: float, p: PropulsionParams) -> float:
    """Rotary-wing propulsion power at level speed v, watts.

    Blade profile power grows quadratically with speed, induced power
    falls off with speed, and parasite power grows cubically.
    """
    if v < 0.0:
        raise ValueError(f"speed must be non-negative, got {v!r}")
    v2 = v * v
    blade = p.P0_blade * (1.0 + 3.0 * v2 / (p.U_tip * p.U_tip))
    v0_2 = p.v0_rotor * p.v0_rotor
    inner = math.sqrt(1.0 + v2 * v2 / (4.0 * v0_2 * v0_2)) - v2 / (2.0 * v0_2)
    induced = p.P_ind * math.sqrt(inner)
    parasite = 0.5 * p.d0_drag * p.rho_air * p.s_solidity * p.A_disc * v2 * v
    return blade + induced + parasite


def harvest_time(battery: float, rate_w: float, window: float, cfg: ScenarioConfig) -> float:
    """Seconds of charging a terminal accepts within a window.

    Charging stops when the battery would reach capacity, so the
    duration is the remaining headroom divided by the harvest rate,
    capped by the available window.
    """
    if rate_w <= 0.0:
        return 0.0
    headroom_j = (cfg.E_max - battery) * J_PER_UJ
    if headroom_j <= 0.0:
        return 0.0
    return min(headroom_j / rate_w, window)


def swipt_transmit_energy(t_id: float, t_eh: float, cfg: ScenarioConfig) -> float:
    """UAV downlink energy for one served slot, joules.

    The downlink stays on for the longer of the information delivery
    and the accepted charging window.
    """
    return cfg.P_tran * max(t_id, t_eh)


def battery_update(battery: float, drain: float, e_comp: float, e_tran: float,
                   e_harvest: float, cfg: ScenarioConfig) -> float:
    """Advance one terminal battery by a slot's flows, microjoules.

    The result is clipped into [E_min, E_max]. Task energies are
    ignored when the scenario says batteries exclude them.
    """
    spent = drain
    if cfg.battery_includes_task_energy:
        spent += e_comp + e_tran
    level = battery - spent + e_harvest
    if level < cfg.E_min:
        return cfg.E_min
    if level > cfg.E_max:
        return cfg.E_max
    return level
