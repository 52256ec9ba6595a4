"""Uniform replay buffer over fixed-size transition arrays."""

from __future__ import annotations

from typing import Dict

import numpy as np
import torch


class ReplayBuffer:
    """Ring buffer of (obs, action, reward, next_obs, done) transitions.

    Sampling is uniform with replacement from the filled region, driven by
    a private seeded generator so runs are reproducible.

    With state_dim > 0 each transition also stores the policy's recurrent
    state at the observation and at the next observation (flattened), so
    updates can condition the policy on the same state the rollout used.
    """

    def __init__(self, capacity: int, obs_dim: int, act_dim: int, seed: int = 0,
                 state_dim: int = 0):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.state_dim = state_dim
        self.obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.action = np.zeros((capacity, act_dim), dtype=np.float32)
        self.reward = np.zeros(capacity, dtype=np.float32)
        self.next_obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.done = np.zeros(capacity, dtype=np.float32)
        if state_dim > 0:
            self.state = np.zeros((capacity, state_dim), dtype=np.float32)
            self.next_state = np.zeros((capacity, state_dim), dtype=np.float32)
        self._next = 0
        self._size = 0
        self._rng = np.random.default_rng(seed)

    def __len__(self) -> int:
        return self._size

    def add(self, obs, action, reward, next_obs, done,
            state=None, next_state=None) -> None:
        k = self._next
        self.obs[k] = obs
        self.action[k] = action
        self.reward[k] = reward
        self.next_obs[k] = next_obs
        self.done[k] = float(done)
        if self.state_dim > 0:
            if state is None or next_state is None:
                raise ValueError("this buffer stores recurrent states; "
                                 "add() needs state and next_state")
            self.state[k] = state
            self.next_state[k] = next_state
        self._next = (k + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample_indices(self, batch_size: int) -> np.ndarray:
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        return self._rng.integers(0, self._size, size=batch_size)

    def sample(self, batch_size: int) -> Dict[str, torch.Tensor]:
        idx = self.sample_indices(batch_size)
        batch = {
            "obs": torch.from_numpy(self.obs[idx]),
            "action": torch.from_numpy(self.action[idx]),
            "reward": torch.from_numpy(self.reward[idx]),
            "next_obs": torch.from_numpy(self.next_obs[idx]),
            "done": torch.from_numpy(self.done[idx]),
        }
        if self.state_dim > 0:
            batch["state"] = torch.from_numpy(self.state[idx])
            batch["next_state"] = torch.from_numpy(self.next_state[idx])
        return batch
