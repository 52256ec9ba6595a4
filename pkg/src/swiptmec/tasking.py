"""Task arrivals, service target selection, and slot scheduling.

Each slot every terminal may generate one task. The UAV serves at most
one terminal per slot: the nearest in-cone terminal holding a task,
falling back to the nearest in-cone terminal without one when the
scenario allows charging-only service. The served terminal's task is
offloaded when the link and its battery support it, otherwise it is
computed locally when the battery supports that, otherwise dropped.
Unserved terminals always try to compute their tasks locally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .channel import LinkBudget, in_cone
from .energy import (
    eh_rate,
    harvest_time,
    local_compute_energy,
    uav_compute_energy,
    uav_compute_time,
)
from .scenario import ScenarioConfig, Task, Terminal


@dataclass
class SlotSchedule:
    """Timing and mode of one slot's service, if any.

    Durations are seconds within the slot. A slot with no served
    terminal is all zeros. tau_s covers whatever runs after the uplink:
    onboard computation, charging, and the downlink payload overlap.
    """

    served_terminal: Optional[int] = None
    offload: bool = False
    tau_up: float = 0.0
    tau_s: float = 0.0
    t_id: float = 0.0        # downlink information time
    t_eh: float = 0.0        # accepted charging time
    t_uav_comp: float = 0.0  # onboard computation time
    eh_rate_w: float = 0.0   # harvest rate seen by the served terminal

    def total_time(self) -> float:
        return self.tau_up + self.tau_s


def generate_tasks(terminals: List[Terminal], cfg: ScenarioConfig,
                   rng: np.random.Generator, slot: int) -> None:
    """Draw this slot's task arrivals, one Bernoulli trial per terminal.

    Terminals are visited in id order; any task left from an earlier
    slot has already been resolved, so arrivals overwrite cleanly.
    """
    for t in terminals:
        if float(rng.random()) < cfg.p_arrival:
            t.pending_task = Task(size_bits=cfg.D_p, gen_slot=slot, density=cfg.C_i)
        else:
            t.pending_task = None


def select_target(uav_pos: Tuple[float, float], terminals: List[Terminal],
                  cfg: ScenarioConfig) -> Optional[Terminal]:
    """Pick the terminal to serve this slot, or None.

    Preference order: nearest in-cone terminal with a pending task,
    then nearest in-cone terminal without one (when enabled). Distance
    ties break toward the lowest id, which the id-ordered scan gives
    for free with a strict comparison.
    """
    best_task: Optional[Tuple[float, Terminal]] = None
    best_idle: Optional[Tuple[float, Terminal]] = None
    for t in terminals:
        d = math.hypot(t.position[0] - uav_pos[0], t.position[1] - uav_pos[1])
        if not in_cone(d, cfg.H, cfg.beta):
            continue
        if t.pending_task is not None:
            if best_task is None or d < best_task[0]:
                best_task = (d, t)
        else:
            if best_idle is None or d < best_idle[0]:
                best_idle = (d, t)
    if best_task is not None:
        return best_task[1]
    if cfg.serve_without_task and best_idle is not None:
        return best_idle[1]
    return None


def spend_allowed(battery: float, cost: float, cfg: ScenarioConfig) -> bool:
    """True when a terminal may spend cost without breaching its floor."""
    return cost < battery - (cfg.E_min + cfg.delta_e)


def build_schedule(target: Optional[Terminal], budget: Optional[LinkBudget],
                   cfg: ScenarioConfig) -> Tuple[SlotSchedule, bool]:
    """Lay out one slot of service for the chosen terminal.

    Returns the schedule and a flag telling the caller whether the
    served terminal's task still needs local handling (True when the
    task was not offloaded). The offload route needs, in order: both
    link directions at an acceptable rate, the whole exchange fitting
    the slot, and the uplink cost leaving the battery above its
    reserve. The downlink (information plus charging) runs whenever a
    terminal is served, task or not.
    """
    if target is None or budget is None or not budget.in_cone:
        return SlotSchedule(), False

    rate = eh_rate(budget, cfg)
    t_id = (cfg.D_r + cfg.delta_down) / budget.rate_down
    task = target.pending_task

    if task is not None:
        tau_up = (cfg.D_p + cfg.delta_up) / budget.rate_up
        uplink_cost = cfg.P_i * tau_up * 1e6  # microjoules
        t_comp = uav_compute_time(task, cfg)
        fits_slot = tau_up + max(t_comp, t_id) <= cfg.tau
        rate_ok = min(budget.rate_up, budget.rate_down) >= cfg.R_min
        battery_ok = spend_allowed(target.battery, uplink_cost, cfg)
        if rate_ok and fits_slot and battery_ok:
            t_eh = harvest_time(target.battery, rate, cfg.tau - tau_up, cfg)
            return SlotSchedule(
                served_terminal=target.id,
                offload=True,
                tau_up=tau_up,
                tau_s=max(t_comp, t_eh, t_id),
                t_id=t_id,
                t_eh=t_eh,
                t_uav_comp=t_comp,
                eh_rate_w=rate,
            ), False

    # Charging-and-downlink service; any task stays on the terminal.
    t_eh = harvest_time(target.battery, rate, cfg.tau, cfg)
    schedule = SlotSchedule(
        served_terminal=target.id,
        offload=False,
        tau_up=0.0,
        tau_s=max(t_eh, t_id),
        t_id=t_id,
        t_eh=t_eh,
        t_uav_comp=0.0,
        eh_rate_w=rate,
    )
    return schedule, task is not None


def resolve_local(task: Task, battery: float, cfg: ScenarioConfig) -> Tuple[float, bool]:
    """Try to run a task on its own terminal.

    Returns (energy spent in microjoules, dropped flag). The task runs
    only when its energy leaves the battery above the reserve floor.
    """
    cost = local_compute_energy(task, cfg)
    if spend_allowed(battery, cost, cfg):
        return cost, False
    return 0.0, True


def offload_energy_terms(task: Task, schedule: SlotSchedule,
                         cfg: ScenarioConfig) -> Tuple[float, float]:
    """Terminal uplink energy (microjoules) and UAV compute energy
    (joules) for an offloaded task."""
    uplink = cfg.P_i * schedule.tau_up * 1e6
    onboard = uav_compute_energy(task, cfg)
    return uplink, onboard
