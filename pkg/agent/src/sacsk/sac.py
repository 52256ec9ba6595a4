"""Soft actor-critic updates with twin critics and a learned temperature."""

from __future__ import annotations

import copy
from typing import Dict, Optional

import torch
from torch import Tensor, nn

from .buffer import ReplayBuffer
from .hyper import AgentHyperparams


class SacAgent:
    """Owns the networks, their targets, the temperature, and the optimizers.

    Update cadence: every call refreshes both critics; the actor and the
    temperature move once per `policy_frequency` calls; target networks are
    blended once per `target_frequency` calls with coefficient
    `target_smoothing` (target <- smoothing * critic + (1 - smoothing) * target).
    Calls made before `warmup_transitions` transitions exist are no-ops.
    """

    def __init__(self, actor: nn.Module, q1: nn.Module, q2: nn.Module,
                 hyper: AgentHyperparams, seed: int = 0):
        self.hyper = hyper.validate()
        self.actor = actor
        self.q1 = q1
        self.q2 = q2
        self.q1_target = copy.deepcopy(q1)
        self.q2_target = copy.deepcopy(q2)
        for p in self.q1_target.parameters():
            p.requires_grad_(False)
        for p in self.q2_target.parameters():
            p.requires_grad_(False)
        # Positive temperature via an exponential map.
        self.log_alpha = torch.tensor(
            float(torch.log(torch.tensor(hyper.alpha_init))), requires_grad=True)
        self.actor_opt = torch.optim.Adam(actor.parameters(), lr=hyper.lr_actor)
        self.critic_opt = torch.optim.Adam(
            list(q1.parameters()) + list(q2.parameters()), lr=hyper.lr_critic)
        self.alpha_opt = torch.optim.Adam([self.log_alpha], lr=hyper.lr_actor)
        self.update_count = 0
        # The temperature chases this value; the training loop moves it when
        # the hyperparameters define an entropy-target schedule.
        self.entropy_target = hyper.target_entropy
        self.noise_rng = torch.Generator().manual_seed(seed)

    @property
    def alpha(self) -> float:
        return float(self.log_alpha.detach().exp())

    def _actor_sample(self, obs: Tensor, flat_state: Optional[Tensor] = None):
        """Sample from the policy at obs, conditioned on the stored recurrent
        state when the batch carries one (None keeps the zero state)."""
        state = None
        if flat_state is not None and getattr(self.actor, "state_dim", 0) > 0:
            state = self.actor.unpack_state(flat_state)
        mean, log_std, _ = self.actor(obs, state)
        return self.actor.dist.sample(mean, log_std, generator=self.noise_rng)

    def critic_targets(self, batch: Dict[str, Tensor]) -> Tensor:
        """Soft Bellman targets. Episode ends are horizon caps, not absorbing
        failures, so the value bootstraps through them."""
        with torch.no_grad():
            next_action, next_log_prob = self._actor_sample(
                batch["next_obs"], batch.get("next_state"))
            tq = torch.min(self.q1_target(batch["next_obs"], next_action),
                           self.q2_target(batch["next_obs"], next_action))
            alpha = self.log_alpha.exp()
            return (batch["reward"] * self.hyper.reward_scale
                    + self.hyper.gamma * (tq - alpha * next_log_prob))

    def critic_loss(self, batch: Dict[str, Tensor], targets: Tensor) -> Tensor:
        pred1 = self.q1(batch["obs"], batch["action"])
        pred2 = self.q2(batch["obs"], batch["action"])
        return (torch.nn.functional.mse_loss(pred1, targets)
                + torch.nn.functional.mse_loss(pred2, targets))

    def soft_update_targets(self) -> None:
        lam = self.hyper.target_smoothing
        with torch.no_grad():
            for target, online in ((self.q1_target, self.q1), (self.q2_target, self.q2)):
                for tp, op in zip(target.parameters(), online.parameters()):
                    tp.mul_(1.0 - lam).add_(op, alpha=lam)
                for tb, ob in zip(target.buffers(), online.buffers()):
                    tb.copy_(ob)

    def update(self, buffer: ReplayBuffer) -> Optional[Dict[str, float]]:
        """One gradient step driven by a uniform batch from the buffer."""
        if len(buffer) < max(self.hyper.warmup_transitions, self.hyper.batch_size):
            return None
        batch = buffer.sample(self.hyper.batch_size)
        targets = self.critic_targets(batch)
        loss_q = self.critic_loss(batch, targets)
        self.critic_opt.zero_grad()
        loss_q.backward()
        self.critic_opt.step()

        stats = {"loss_q": float(loss_q.detach()), "alpha": self.alpha}
        if self.update_count % self.hyper.policy_frequency == 0:
            action, log_prob = self._actor_sample(batch["obs"],
                                                  batch.get("state"))
            q_min = torch.min(self.q1(batch["obs"], action),
                              self.q2(batch["obs"], action))
            alpha = self.log_alpha.exp().detach()
            loss_pi = (alpha * log_prob - q_min).mean()
            self.actor_opt.zero_grad()
            loss_pi.backward()
            self.actor_opt.step()

            entropy_gap = (-log_prob - self.entropy_target).detach()
            loss_alpha = (self.log_alpha.exp() * entropy_gap).mean()
            self.alpha_opt.zero_grad()
            loss_alpha.backward()
            self.alpha_opt.step()
            stats["loss_pi"] = float(loss_pi.detach())
            stats["loss_alpha"] = float(loss_alpha.detach())

        if self.update_count % self.hyper.target_frequency == 0:
            self.soft_update_targets()
        self.update_count += 1
        return stats

    def state_dict(self) -> Dict[str, object]:
        return {
            "actor": self.actor.state_dict(),
            "q1": self.q1.state_dict(),
            "q2": self.q2.state_dict(),
            "q1_target": self.q1_target.state_dict(),
            "q2_target": self.q2_target.state_dict(),
            "log_alpha": self.log_alpha.detach().clone(),
            "update_count": self.update_count,
        }

    def load_state_dict(self, state: Dict[str, object]) -> None:
        self.actor.load_state_dict(state["actor"])
        self.q1.load_state_dict(state["q1"])
        self.q2.load_state_dict(state["q2"])
        self.q1_target.load_state_dict(state["q1_target"])
        self.q2_target.load_state_dict(state["q2_target"])
        with torch.no_grad():
            self.log_alpha.copy_(state["log_alpha"])
        self.update_count = int(state["update_count"])
