"""Training hyperparameters and their validity rules."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class AgentHyperparams:
    """Knobs for the soft actor-critic training loop.

    Defaults are the published operating point. Training-run sizing
    (iterations, warmup, batch) may be overridden per run without touching
    the learning dynamics.
    """

    gamma: float = 0.92
    lr_actor: float = 3e-4
    lr_critic: float = 1e-3
    batch_size: int = 1024
    target_smoothing: float = 5e-3
    buffer_size: int = 1_000_000
    policy_frequency: int = 2
    target_frequency: int = 1
    alpha_init: float = 0.2
    target_entropy: float = -2.0
    total_iterations: int = 1000
    warmup_transitions: int = 1024
    # Rewards reach thousands per step; critics regress on a scaled copy so
    # early squared errors do not swamp Adam. Logged returns are unscaled.
    reward_scale: float = 1e-3
    updates_per_step: int = 1
    # Exploration episodes: every explore_every-th iteration (0 disables) an
    # extra heading-hold episode feeds the buffer without touching the
    # learning curve, until explore_until_frac of total iterations has passed.
    explore_every: int = 4
    explore_until_frac: float = 0.6
    # Fraction of exploration episodes that pick each step's action as the
    # best of a sampled candidate set under the pessimistic critic, instead
    # of holding random headings. Value-guided rollouts turn whatever the
    # critics already know into coherent trajectories for the buffer.
    explore_greedy_frac: float = 0.0
    explore_candidates: int = 24
    # Entropy-target schedule. The temperature controller tracks a target
    # that stays at target_entropy until anneal_from_frac of the run, then
    # moves linearly to target_entropy_final by anneal_to_frac and holds.
    # A None final value keeps the target constant. A high early target
    # keeps action noise wide enough to cross low-value gaps between
    # distant reward pockets; the late decay lets the policy commit to
    # precise motion once those pockets are mapped.
    target_entropy_final: float | None = None
    anneal_from_frac: float = 0.5
    anneal_to_frac: float = 0.9

    def entropy_target_at(self, iteration: int) -> float:
        """Entropy target for a 1-based training iteration."""
        if self.target_entropy_final is None:
            return self.target_entropy
        lo = self.anneal_from_frac * self.total_iterations
        hi = self.anneal_to_frac * self.total_iterations
        if iteration <= lo:
            return self.target_entropy
        if iteration >= hi:
            return self.target_entropy_final
        w = (iteration - lo) / (hi - lo)
        return (1.0 - w) * self.target_entropy + w * self.target_entropy_final

    def validate(self) -> "AgentHyperparams":
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0.0 < self.target_smoothing <= 1.0:
            raise ValueError(
                f"target_smoothing must be in (0, 1], got {self.target_smoothing}")
        if self.batch_size <= 0:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.buffer_size < self.batch_size:
            raise ValueError(
                f"buffer_size {self.buffer_size} smaller than batch_size {self.batch_size}")
        if self.lr_actor <= 0 or self.lr_critic <= 0:
            raise ValueError("learning rates must be positive")
        if self.policy_frequency < 1 or self.target_frequency < 1:
            raise ValueError("update frequencies must be at least 1")
        if self.alpha_init <= 0:
            raise ValueError(f"alpha_init must be positive, got {self.alpha_init}")
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be at least 1")
        if self.warmup_transitions < 0:
            raise ValueError("warmup_transitions must not be negative")
        if self.reward_scale <= 0:
            raise ValueError("reward_scale must be positive")
        if self.updates_per_step < 0:
            raise ValueError("updates_per_step must not be negative")
        if self.explore_every < 0:
            raise ValueError("explore_every must not be negative")
        if not 0.0 <= self.explore_until_frac <= 1.0:
            raise ValueError(
                f"explore_until_frac must be in [0, 1], got {self.explore_until_frac}")
        if not 0.0 <= self.explore_greedy_frac <= 1.0:
            raise ValueError(
                f"explore_greedy_frac must be in [0, 1], got {self.explore_greedy_frac}")
        if self.explore_candidates < 2:
            raise ValueError("explore_candidates must be at least 2")
        if not 0.0 <= self.anneal_from_frac <= 1.0:
            raise ValueError(
                f"anneal_from_frac must be in [0, 1], got {self.anneal_from_frac}")
        if not 0.0 <= self.anneal_to_frac <= 1.0:
            raise ValueError(
                f"anneal_to_frac must be in [0, 1], got {self.anneal_to_frac}")
        if self.anneal_to_frac < self.anneal_from_frac:
            raise ValueError("anneal_to_frac must not precede anneal_from_frac")
        return self
