"""Training loop against the environment server.

Every training episode resets the server with the same scenario seed, so
the agent optimizes one fixed layout. Each iteration is one episode of T
steps; transitions go to the replay buffer and gradient updates run after
every environment step once the warmup threshold is met. The loop writes
a learning-curve CSV row per iteration (iteration, return, oob_count,
r_char_sum, alpha), checkpoints the networks at the end, and reports the
return of a final deterministic evaluation episode.

Exploration: warmup episodes (and periodic exploration episodes early in
training, see AgentHyperparams.explore_every) use a heading-hold sampler
rather than per-step uniform noise. Holding a random velocity and heading
for a few consecutive slots produces straight sweeps that cross several
service zones in sequence, so the replay buffer contains chains of serve
events that value backups can link together. Per-step uniform actions
perform a random walk that almost never strings two serves together.
Exploration episodes are extra environment episodes that only feed the
buffer; the learning curve always records the policy rollout. A configured
fraction of them (explore_greedy_frac) picks each action as the best of a
sampled candidate set under the pessimistic critic, which converts value
knowledge gathered from random sweeps into coherent trajectories.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch

from .buffer import ReplayBuffer
from .envclient import EpisodeInterrupted, WireEnvClient
from .hyper import AgentHyperparams
from .networks import make_networks
from .sac import SacAgent

log = logging.getLogger("sacsk.train")

CURVE_COLUMNS = ["iteration", "return", "oob_count", "r_char_sum", "alpha"]


@dataclass
class TrainConfig:
    agent: str = "sacsk"
    scenario_config: Optional[str] = None
    scenario_seed: int = 1
    agent_seed: int = 0
    out_dir: str = "runs"
    hyper: AgentHyperparams = field(default_factory=AgentHyperparams)

    def validate(self) -> "TrainConfig":
        if self.agent not in ("sacsk", "sac"):
            raise ValueError(f"agent must be 'sacsk' or 'sac', got {self.agent!r}")
        self.hyper.validate()
        return self


@dataclass
class TrainResult:
    rows: List[Dict[str, float]]
    final_eval_return: float
    checkpoint_path: str
    curve_path: str


class HeadingHoldSampler:
    """Random actions that keep a drawn velocity and heading for a few slots.

    A new draw happens when the hold expires or when the caller forces one.
    The training loop forces a redraw after an out-of-bounds step (a fresh
    heading is the cheapest way back inside) and after a step that charged a
    terminal: redrawing from a service area turns a straight sweep into a
    chain of hop attempts between service areas, which is where the replay
    buffer is otherwise thinnest. Both triggers come from the step feedback;
    the sampler uses no position information.
    """

    def __init__(self, rng: np.random.Generator, v_max: float,
                 hold_min: int = 2, hold_max: int = 6):
        self._rng = rng
        self._v_max = v_max
        self._hold_min = hold_min
        self._hold_max = hold_max
        self._remaining = 0
        self._v = 0.0
        self._theta = 0.0

    def action(self, redraw: bool) -> Tuple[float, float]:
        if self._remaining <= 0 or redraw:
            self._v = float(self._rng.uniform(0.0, self._v_max))
            self._theta = float(self._rng.uniform(0.0, 2.0 * math.pi))
            self._remaining = int(self._rng.integers(self._hold_min,
                                                     self._hold_max + 1))
        self._remaining -= 1
        return self._v, self._theta


def _value_guided_action(agent: SacAgent, obs_t: torch.Tensor,
                         mean: torch.Tensor, log_std: torch.Tensor,
                         v_max: float, rng: np.random.Generator,
                         n_candidates: int) -> Tuple[float, float]:
    """Best of a sampled action set under the pessimistic critic.

    Half the candidates come from the current policy (whose distribution at
    this step the caller passes in), half are uniform over the action box,
    so the pick can both refine current behavior and reach for actions the
    policy would never propose.
    """
    k_policy = n_candidates // 2
    k_uniform = n_candidates - k_policy
    uniform = np.stack([rng.uniform(0.0, v_max, k_uniform),
                        rng.uniform(0.0, 2.0 * math.pi, k_uniform)], axis=1)
    with torch.no_grad():
        policy_actions, _ = agent.actor.dist.sample(
            mean.expand(k_policy, -1), log_std.expand(k_policy, -1),
            generator=agent.noise_rng)
        candidates = torch.cat(
            [policy_actions, torch.tensor(uniform, dtype=torch.float32)])
        obs_rep = obs_t.expand(n_candidates, -1)
        value = torch.min(agent.q1(obs_rep, candidates),
                          agent.q2(obs_rep, candidates))
        best = candidates[int(torch.argmax(value))]
    return float(best[0]), float(best[1])


def _mean_action(agent: SacAgent, obs: List[float], state) -> Tuple[float, float, object]:
    obs_t = torch.tensor([obs], dtype=torch.float32)
    with torch.no_grad():
        mean, _, next_state = agent.actor(obs_t, state)
        action = agent.actor.dist.mean_action(mean)
    return float(action[0, 0]), float(action[0, 1]), next_state


def evaluate(agent: SacAgent, client: WireEnvClient, scenario_seed: int,
             horizon: int) -> float:
    """Return of one deterministic (distribution-mode) episode."""
    obs = client.reset(scenario_seed)
    state = agent.actor.initial_state(1)
    total = 0.0
    for _ in range(horizon):
        v, theta, state = _mean_action(agent, obs, state)
        obs, reward, done, _ = client.step(v, theta)
        total += reward
        if done:
            break
    return total


def train(tc: TrainConfig) -> TrainResult:
    tc.validate()
    hyper = tc.hyper
    os.makedirs(tc.out_dir, exist_ok=True)
    torch.manual_seed(tc.agent_seed)
    warmup_rng = np.random.default_rng(tc.agent_seed)

    client = WireEnvClient(tc.scenario_config)
    try:
        return _train_loop(tc, hyper, client, warmup_rng)
    finally:
        client.close()


def _train_loop(tc: TrainConfig, hyper: AgentHyperparams,
                client: WireEnvClient, warmup_rng: np.random.Generator
                ) -> TrainResult:
    env_cfg = client.config()
    v_max = float(env_cfg["v_max"])
    horizon = int(env_cfg["T"])
    obs_dim = 2

    actor, q1, q2 = make_networks(tc.agent, obs_dim, v_max)
    agent = SacAgent(actor, q1, q2, hyper, seed=tc.agent_seed)
    buffer = ReplayBuffer(hyper.buffer_size, obs_dim, 2, seed=tc.agent_seed + 1,
                          state_dim=getattr(actor, "state_dim", 0))

    curve_path = os.path.join(tc.out_dir, "curve.csv")
    checkpoint_path = os.path.join(tc.out_dir, "checkpoint.pt")
    rows: List[Dict[str, float]] = []

    with open(curve_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        explore_cutoff = int(hyper.explore_until_frac * hyper.total_iterations)
        for iteration in range(1, hyper.total_iterations + 1):
            agent.entropy_target = hyper.entropy_target_at(iteration)
            while True:
                try:
                    ep_return, oob_count, r_char = _run_episode(
                        tc, hyper, client, agent, buffer, warmup_rng,
                        horizon, v_max, explore=False)
                    break
                except EpisodeInterrupted:
                    log.warning("episode interrupted at iteration %d; retrying",
                                iteration)
            row = {"iteration": iteration, "return": ep_return,
                   "oob_count": oob_count, "r_char_sum": r_char,
                   "alpha": agent.alpha}
            rows.append(row)
            writer.writerow([row[c] for c in CURVE_COLUMNS])
            fh.flush()
            if (hyper.explore_every > 0
                    and iteration % hyper.explore_every == 0
                    and iteration <= explore_cutoff
                    and len(buffer) >= hyper.warmup_transitions):
                while True:
                    try:
                        _run_episode(tc, hyper, client, agent, buffer,
                                     warmup_rng, horizon, v_max, explore=True)
                        break
                    except EpisodeInterrupted:
                        log.warning("exploration episode interrupted at "
                                    "iteration %d; retrying", iteration)
            if iteration % 50 == 0 or iteration == hyper.total_iterations:
                log.info("iteration %d: return %.1f oob %d alpha %.4f",
                         iteration, ep_return, oob_count, agent.alpha)

    final_eval = evaluate(agent, client, tc.scenario_seed, horizon)
    torch.save({
        "agent": agent.state_dict(),
        "hyper": asdict(hyper),
        "train_config": {k: v for k, v in asdict(tc).items() if k != "hyper"},
        "final_eval_return": final_eval,
    }, checkpoint_path)
    with open(os.path.join(tc.out_dir, "result.json"), "w") as fh:
        json.dump({"final_eval_return": final_eval,
                   "iterations": hyper.total_iterations,
                   "agent": tc.agent,
                   "scenario_seed": tc.scenario_seed,
                   "agent_seed": tc.agent_seed}, fh, indent=2)
    return TrainResult(rows, final_eval, checkpoint_path, curve_path)


def _run_episode(tc: TrainConfig, hyper: AgentHyperparams,
                 client: WireEnvClient, agent: SacAgent, buffer: ReplayBuffer,
                 warmup_rng: np.random.Generator, horizon: int, v_max: float,
                 explore: bool) -> Tuple[float, int, float]:
    obs = client.reset(tc.scenario_seed)
    state = agent.actor.initial_state(1)
    use_policy = not explore and len(buffer) >= hyper.warmup_transitions
    use_greedy = (explore and len(buffer) >= hyper.warmup_transitions
                  and float(warmup_rng.random()) < hyper.explore_greedy_frac)
    sampler = None if use_policy else HeadingHoldSampler(warmup_rng, v_max)
    redraw = False
    prev_charge = 0.0
    ep_return = 0.0
    oob_count = 0
    r_char = 0.0
    recurrent = buffer.state_dim > 0
    for _ in range(horizon):
        # The actor state advances on every step, whatever picks the action,
        # so stored transitions always carry the rollout's recurrent state.
        obs_t = torch.tensor([obs], dtype=torch.float32)
        with torch.no_grad():
            mean, log_std, next_state = agent.actor(obs_t, state)
        if use_policy:
            with torch.no_grad():
                action_t, _ = agent.actor.dist.sample(
                    mean, log_std, generator=agent.noise_rng)
            v, theta = float(action_t[0, 0]), float(action_t[0, 1])
        elif use_greedy:
            v, theta = _value_guided_action(agent, obs_t, mean, log_std,
                                            v_max, warmup_rng,
                                            hyper.explore_candidates)
        else:
            v, theta = sampler.action(redraw)
        next_obs, reward, done, info = client.step(v, theta)
        if recurrent:
            buffer.add(obs, (v, theta), reward, next_obs, done,
                       state=agent.actor.pack_state(state)[0].numpy(),
                       next_state=agent.actor.pack_state(next_state)[0].numpy())
        else:
            buffer.add(obs, (v, theta), reward, next_obs, done)
        ep_return += reward
        out_of_bounds = bool(info["out_of_bounds"])
        step_charge = float(info["reward_parts"]["charge"])
        # Redraw on entering a service area (charge rising edge), not on
        # every charging step: held actions that keep charging are data the
        # hover skill needs, while the entry edge is what chains hops.
        redraw = out_of_bounds or (step_charge > 0.0 and prev_charge == 0.0)
        prev_charge = step_charge
        oob_count += int(out_of_bounds)
        r_char += step_charge
        obs = next_obs
        state = next_state
        for _ in range(hyper.updates_per_step):
            agent.update(buffer)
        if done:
            break
    return ep_return, oob_count, r_char
