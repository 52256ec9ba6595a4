"""Slot-based decision process over the physical models.

One episode is T slots. Each slot the UAV flies one commanded leg,
task arrivals land, at most one terminal is served (uplink, onboard
compute, downlink with simultaneous charging), every battery advances,
and a scalar reward is assembled from energy spent, fairness-weighted
retained energy, boundary violations, a service bias, and a charging
bonus.

Slot arithmetic runs on plain Python floats in a fixed evaluation
order, so identical (config, seed, actions) reproduce traces
bit-for-bit. The documented orderings the reproducibility contract
relies on:

* task arrivals draw one uniform per terminal in id order per slot,
  from ``numpy.random.default_rng([seed, 1])``;
* terminal sums (battery totals, fairness, flow totals) accumulate in
  id order;
* the reward is the left-to-right sum of its five parts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .channel import LinkBudget, LinkGeometry, link_budget
from .energy import (
    J_PER_UJ,
    UJ_PER_J,
    SlotEnergyFlows,
    battery_update,
    propulsion_power,
    swipt_transmit_energy,
)
from .scenario import ScenarioConfig, Terminal, place_terminals
from .tasking import (
    SlotSchedule,
    build_schedule,
    generate_tasks,
    offload_energy_terms,
    resolve_local,
    select_target,
)

# Second entropy word of the per-episode task arrival stream.
TASK_STREAM_TAG = 1

_TWO_PI = 2.0 * math.pi
# Largest double below 2*pi, the top of the heading domain.
_THETA_MAX = math.nextafter(_TWO_PI, 0.0)


@dataclass(frozen=True)
class Action:
    """One slot command: speed in m/s and heading in radians."""

    v: float
    theta: float


def jain_index(values: Sequence[float]) -> float:
    """Jain fairness of a set of non-negative values.

    Equals 1 for identical values and 1/n when a single value holds
    everything. All-zero input degenerates to 1 (perfectly fair).
    """
    n = len(values)
    if n == 0:
        raise ValueError("jain_index needs at least one value")
    total = 0.0
    square_sum = 0.0
    for v in values:
        total += v
        square_sum += v * v
    if square_sum == 0.0:
        return 1.0
    return (total * total) / (n * square_sum)


@dataclass
class SlotReport:
    """Everything that happened in one slot."""

    slot: int
    position: Tuple[float, float]
    action: Action
    action_clamped: bool
    out_of_bounds: bool
    schedule: SlotSchedule
    flows: SlotEnergyFlows
    dropped_tasks: int
    reward: float
    reward_parts: Dict[str, float]
    batteries_after: List[float]
    jain: float
    f_energy: float          # fairness-weighted mean retained energy, uJ
    mean_battery: float

    def to_json_dict(self) -> dict:
        return {
            "slot": self.slot,
            "position": [self.position[0], self.position[1]],
            "action": {"v": self.action.v, "theta": self.action.theta},
            "action_clamped": self.action_clamped,
            "out_of_bounds": self.out_of_bounds,
            "served_terminal": self.schedule.served_terminal,
            "offload": self.schedule.offload,
            "dropped_tasks": self.dropped_tasks,
            "schedule": {
                "tau_up": self.schedule.tau_up,
                "tau_s": self.schedule.tau_s,
                "t_id": self.schedule.t_id,
                "t_eh": self.schedule.t_eh,
                "t_uav_comp": self.schedule.t_uav_comp,
            },
            "flows": {
                "e_uav_move_J": self.flows.e_uav_move,
                "e_uav_tran_J": self.flows.e_uav_tran,
                "e_uav_comp_J": self.flows.e_uav_comp,
                "e_term_comp_uJ": list(self.flows.e_term_comp),
                "e_term_tran_uJ": list(self.flows.e_term_tran),
                "e_harvested_uJ": list(self.flows.e_harvested),
                "e_daily_drain_uJ": list(self.flows.e_daily_drain),
            },
            "reward": self.reward,
            "reward_parts": dict(self.reward_parts),
            "batteries_after_uJ": list(self.batteries_after),
            "jain": self.jain,
            "f_energy_uJ": self.f_energy,
            "mean_battery_uJ": self.mean_battery,
        }

    def info_dict(self) -> dict:
        """Compact per-step summary for the wire protocol."""
        return {
            "reward_parts": dict(self.reward_parts),
            "jain": self.jain,
            "batteries": list(self.batteries_after),
            "out_of_bounds": self.out_of_bounds,
            "position": [self.position[0], self.position[1]],
            "served_terminal": self.schedule.served_terminal,
            "dropped_tasks": self.dropped_tasks,
        }


CSV_COLUMNS = [
    "slot", "x", "y", "v", "theta", "action_clamped", "out_of_bounds",
    "served_terminal", "offload", "dropped_tasks",
    "tau_up", "tau_s", "t_id", "t_eh", "t_uav_comp",
    "e_uav_move_J", "e_uav_tran_J", "e_uav_comp_J",
    "e_term_comp_uJ", "e_term_tran_uJ", "e_harvested_uJ", "e_daily_drain_uJ",
    "reward", "obj_energy", "obj_fair", "penalty", "bias", "charge",
    "jain", "mean_battery_uJ",
]


@dataclass
class EpisodeTrace:
    """Full record of one episode plus folded totals."""

    config_digest: str
    seed: int
    slots: List[SlotReport] = field(default_factory=list)
    totals: Dict[str, object] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "config_digest": self.config_digest,
            "seed": self.seed,
            "slots": [r.to_json_dict() for r in self.slots],
            "totals": self.totals,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), allow_nan=False)

    def write_csv(self, stream: TextIO) -> None:
        """Per-slot table with one row per slot, stable column order."""
        stream.write(",".join(CSV_COLUMNS) + "\n")
        for r in self.slots:
            parts = r.reward_parts
            row = [
                r.slot, r.position[0], r.position[1],
                r.action.v, r.action.theta,
                r.action_clamped, r.out_of_bounds,
                "" if r.schedule.served_terminal is None else r.schedule.served_terminal,
                r.schedule.offload, r.dropped_tasks,
                r.schedule.tau_up, r.schedule.tau_s, r.schedule.t_id,
                r.schedule.t_eh, r.schedule.t_uav_comp,
                r.flows.e_uav_move, r.flows.e_uav_tran, r.flows.e_uav_comp,
                sum(r.flows.e_term_comp), sum(r.flows.e_term_tran),
                sum(r.flows.e_harvested), sum(r.flows.e_daily_drain),
                r.reward, parts["obj_energy"], parts["obj_fair"],
                parts["penalty"], parts["bias"], parts["charge"],
                r.jain, r.mean_battery,
            ]
            stream.write(",".join(str(v) for v in row) + "\n")


class SwiptMecEnv:
    """The slot-stepped environment.

    Holds no global state; independent instances never interact, so
    several environments may run in one process.
    """

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self._terminals: Optional[List[Terminal]] = None
        self._pos: Tuple[float, float] = (0.0, 0.0)
        self._slot = 0
        self._seed: Optional[int] = None
        self._task_rng: Optional[np.random.Generator] = None
        self._reports: List[SlotReport] = []

    # -- properties ----------------------------------------------------

    @property
    def terminals(self) -> List[Terminal]:
        if self._terminals is None:
            raise RuntimeError("reset() must be called first")
        return self._terminals

    @property
    def position(self) -> Tuple[float, float]:
        """Raw UAV ground-plane coordinates, meters."""
        return self._pos

    @property
    def slot(self) -> int:
        return self._slot

    @property
    def done(self) -> bool:
        return self._slot >= self.cfg.T

    @property
    def seed(self) -> Optional[int]:
        return self._seed

    def observation(self) -> List[float]:
        """UAV position scaled to [-1, 1] per axis."""
        w = self.cfg.area_half_width
        return [self._pos[0] / w, self._pos[1] / w]

    # -- episode control -----------------------------------------------

    def reset(self, seed: Optional[int] = None) -> List[float]:
        """Start a fresh episode. The seed fixes terminal placement and
        the task arrival stream; None uses the configured default."""
        if seed is None:
            seed = self.cfg.seed
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
        self._seed = seed
        self._terminals = place_terminals(self.cfg, seed)
        self._task_rng = np.random.default_rng([seed, TASK_STREAM_TAG])
        self._pos = (0.0, 0.0)
        self._slot = 0
        self._reports = []
        return self.observation()

    def step(self, action: Action) -> Tuple[List[float], float, bool, SlotReport]:
        """Advance one slot. See the module docstring for ordering."""
        if self._terminals is None or self._task_rng is None:
            raise RuntimeError("reset() must be called before step()")
        cfg = self.cfg
        if self._slot >= cfg.T:
            raise RuntimeError("episode is finished; call reset()")

        # 1. Movement. Out-of-range commands clamp to the action bounds;
        # the propulsion bill follows the commanded speed even when the
        # boundary stops the airframe short.
        v_req = float(action.v)
        th_req = float(action.theta)
        v = min(max(v_req, 0.0), cfg.v_max)
        th = min(max(th_req, 0.0), _THETA_MAX)
        clamped = (v != v_req) or (th != th_req)
        w = cfg.area_half_width
        cand_x = self._pos[0] + v * cfg.tau * math.cos(th)
        cand_y = self._pos[1] + v * cfg.tau * math.sin(th)
        out_of_bounds = abs(cand_x) > w or abs(cand_y) > w
        self._pos = (min(max(cand_x, -w), w), min(max(cand_y, -w), w))

        # 2. Task arrivals.
        generate_tasks(self._terminals, cfg, self._task_rng, self._slot)

        # 3. Service selection and slot layout.
        flows = SlotEnergyFlows.zeros(cfg.I)
        flows.e_uav_move = propulsion_power(v, cfg.propulsion) * cfg.tau
        target = select_target(self._pos, self._terminals, cfg)
        budget: Optional[LinkBudget] = None
        if target is not None:
            d = math.hypot(target.position[0] - self._pos[0],
                           target.position[1] - self._pos[1])
            budget = link_budget(LinkGeometry(d, cfg.H), cfg)
        schedule, _ = build_schedule(target, budget, cfg)
        served_id = schedule.served_terminal

        # The charging bonus goes to the neediest terminal as of the
        # start of the slot, ties to the lowest id.
        pre = [t.battery for t in self._terminals]
        lowest_id = min(range(cfg.I), key=lambda i: (pre[i], i))

        dropped = 0
        for t in self._terminals:
            flows.e_daily_drain[t.id] = cfg.dE1 * cfg.tau
            task = t.pending_task
            if task is not None:
                if t.id == served_id and schedule.offload:
                    uplink, onboard = offload_energy_terms(task, schedule, cfg)
                    flows.e_term_tran[t.id] = uplink
                    flows.e_uav_comp += onboard
                else:
                    cost, was_dropped = resolve_local(task, t.battery, cfg)
                    if was_dropped:
                        dropped += 1
                    else:
                        flows.e_term_comp[t.id] = cost
                t.pending_task = None
        if served_id is not None:
            flows.e_harvested[served_id] = schedule.eh_rate_w * schedule.t_eh * UJ_PER_J
            flows.e_uav_tran = swipt_transmit_energy(schedule.t_id, schedule.t_eh, cfg)

        # 4. Batteries.
        for t in self._terminals:
            t.battery = battery_update(
                t.battery,
                flows.e_daily_drain[t.id],
                flows.e_term_comp[t.id],
                flows.e_term_tran[t.id],
                flows.e_harvested[t.id],
                cfg,
            )
        post = [t.battery for t in self._terminals]

        # 5. Reward, assembled strictly as the sum of its parts.
        e_total = flows.system_total()
        jain = jain_index(post)
        mean_battery = sum(post) / cfg.I
        f_energy = jain * mean_battery
        obj_energy = -cfg.rho1 * e_total
        obj_fair = cfg.rho2 * f_energy
        if cfg.oob_penalty_conditional:
            penalty = -cfg.R_bar if out_of_bounds else 0.0
        else:
            penalty = -cfg.R_bar
        if served_id is None:
            bias_weight = 0.0
            charge = 0.0
        else:
            bias_weight = self._terminals[served_id].weight
            charge = flows.e_harvested[served_id]
            if served_id == lowest_id:
                charge = charge + cfg.C_char
        if not cfg.bias_served_terminal_only:
            bias_weight = sum(t.weight for t in self._terminals)
        bias = cfg.rho3 * cfg.R_b * bias_weight
        reward = obj_energy + obj_fair + penalty + bias + charge

        report = SlotReport(
            slot=self._slot,
            position=self._pos,
            action=Action(v=v, theta=th),
            action_clamped=clamped,
            out_of_bounds=out_of_bounds,
            schedule=schedule,
            flows=flows,
            dropped_tasks=dropped,
            reward=reward,
            reward_parts={
                "obj_energy": obj_energy,
                "obj_fair": obj_fair,
                "penalty": penalty,
                "bias": bias,
                "charge": charge,
            },
            batteries_after=post,
            jain=jain,
            f_energy=f_energy,
            mean_battery=mean_battery,
        )
        self._reports.append(report)
        self._slot += 1
        return self.observation(), reward, self.done, report

    # -- episode folding -------------------------------------------------

    def finalize(self) -> EpisodeTrace:
        """Fold the recorded slots into an episode trace with totals."""
        if self._terminals is None:
            raise RuntimeError("reset() must be called before finalize()")
        reports = self._reports
        episode_return = 0.0
        e_move = e_tran = e_comp = 0.0
        term_comp = term_tran = harvested = 0.0
        f_energy_sum = 0.0
        dropped = 0
        for r in reports:
            episode_return += r.reward
            e_move += r.flows.e_uav_move
            e_tran += r.flows.e_uav_tran
            e_comp += r.flows.e_uav_comp
            term_comp += sum(r.flows.e_term_comp)
            term_tran += sum(r.flows.e_term_tran)
            harvested += sum(r.flows.e_harvested)
            f_energy_sum += r.f_energy
            dropped += r.dropped_tasks
        n = len(reports)
        batteries = [t.battery for t in self._terminals]
        totals: Dict[str, object] = {
            "slots": n,
            "return": episode_return,
            "e_total_J": e_move + e_tran + e_comp + (term_comp + term_tran) * J_PER_UJ,
            "e_uav_move_J": e_move,
            "e_uav_tran_J": e_tran,
            "e_uav_comp_J": e_comp,
            "e_term_comp_uJ": term_comp,
            "e_term_tran_uJ": term_tran,
            "e_harvested_uJ": harvested,
            "mean_f_energy_uJ": f_energy_sum / n if n else 0.0,
            "final_jain": jain_index(batteries),
            "final_batteries_uJ": list(batteries),
            "avg_retained_uJ": sum(batteries) / len(batteries),
            "dropped_tasks": dropped,
        }
        return EpisodeTrace(
            config_digest=self.cfg.digest(),
            seed=self._seed if self._seed is not None else self.cfg.seed,
            slots=list(reports),
            totals=totals,
        )
