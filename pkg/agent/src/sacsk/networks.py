"""Actor and critic networks.

Two families share one interface:

* the spline-head family: a recurrent encoder feeding spline function
  layers (actor: 1 recurrent layer of width 128 into two spline layers of
  width 256 and parallel mean / log-std heads; critics: 2 recurrent layers
  of width 128 into spline layers 128 -> 128 -> 1),
* a plain multilayer-perceptron family of width 256 used as the ablation
  baseline.

Actors expose (mean, log_std, next_state); critics map an observation and
a raw environment action (normalized internally) to a scalar value.
Critics always run their encoder from the zero state on length-1
sequences; the actor keeps a persistent state across an episode rollout
and is evaluated from the zero state during parameter updates.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import torch
from torch import Tensor, nn

from .dist import SquashedGaussian
from .kan import KanStack
from .sru import Sru


def action_scale(v_max: float) -> Tensor:
    return torch.tensor([v_max, 2.0 * math.pi], dtype=torch.float32)


def encode_action(action: Tensor, v_max: float) -> Tensor:
    """Critic-side action features: speed in [-1, 1], heading on the circle.

    The heading is an angle, so feeding it raw would put nearly identical
    eastward headings (just above 0 and just below 2*pi) at opposite ends
    of the input range and split their value estimates. sin/cos places
    them next to each other.
    """
    v = 2.0 * action[..., 0:1] / v_max - 1.0
    theta = action[..., 1:2]
    return torch.cat([v, torch.sin(theta), torch.cos(theta)], dim=-1)


class ActorSruKan(nn.Module):
    def __init__(self, obs_dim: int, v_max: float, hidden: int = 128,
                 kan_width: int = 256, grid_size: int = 5, order: int = 3):
        super().__init__()
        self.encoder = Sru(obs_dim, hidden, num_layers=1)
        self.head = KanStack([hidden, kan_width, kan_width],
                             grid_size=grid_size, order=order)
        act_dim = 2
        self.mean_head = nn.Linear(kan_width, act_dim)
        self.log_std_head = nn.Linear(kan_width, act_dim)
        self.dist = SquashedGaussian(action_scale(v_max))
        # Width of the flattened recurrent state, for replay storage.
        self.state_dim = self.encoder.num_layers * hidden

    def initial_state(self, batch: int = 1) -> Tensor:
        return self.encoder.initial_state(batch)

    def pack_state(self, state: Tensor) -> Tensor:
        """[layers, batch, hidden] -> [batch, layers * hidden]."""
        layers, batch, hidden = state.shape
        return state.permute(1, 0, 2).reshape(batch, layers * hidden)

    def unpack_state(self, flat: Tensor) -> Tensor:
        """[batch, layers * hidden] -> [layers, batch, hidden]."""
        batch = flat.shape[0]
        layers = self.encoder.num_layers
        return flat.reshape(batch, layers, -1).permute(1, 0, 2).contiguous()

    def forward(self, obs: Tensor, state: Optional[Tensor] = None
                ) -> Tuple[Tensor, Tensor, Tensor]:
        """obs: [batch, obs_dim] one step. Returns (mean, log_std, next_state)."""
        h, next_state = self.encoder(obs.unsqueeze(1), state)
        z = self.head(h[:, 0, :])
        return self.mean_head(z), self.log_std_head(z), next_state


class CriticSruKan(nn.Module):
    def __init__(self, obs_dim: int, v_max: float, hidden: int = 128,
                 kan_width: int = 128, grid_size: int = 5, order: int = 3):
        super().__init__()
        self.encoder = Sru(obs_dim + 3, hidden, num_layers=2)
        self.head = KanStack([hidden, kan_width, 1],
                             grid_size=grid_size, order=order)
        self.v_max = v_max

    def forward(self, obs: Tensor, action: Tensor) -> Tensor:
        """obs: [batch, obs_dim]; action in raw environment units. -> [batch]."""
        x = torch.cat([obs, encode_action(action, self.v_max)], dim=-1)
        h, _ = self.encoder(x.unsqueeze(1))
        return self.head(h[:, 0, :]).squeeze(-1)


def _mlp(dims: Sequence[int]) -> nn.Sequential:
    layers: list[nn.Module] = []
    for k in range(len(dims) - 2):
        layers += [nn.Linear(dims[k], dims[k + 1]), nn.ReLU()]
    layers.append(nn.Linear(dims[-2], dims[-1]))
    return nn.Sequential(*layers)


class ActorMlp(nn.Module):
    def __init__(self, obs_dim: int, v_max: float, width: int = 256):
        super().__init__()
        self.body = _mlp([obs_dim, width, width])
        self.tail = nn.ReLU()
        act_dim = 2
        self.mean_head = nn.Linear(width, act_dim)
        self.log_std_head = nn.Linear(width, act_dim)
        self.dist = SquashedGaussian(action_scale(v_max))
        self.state_dim = 0

    def initial_state(self, batch: int = 1) -> Optional[Tensor]:
        return None

    def forward(self, obs: Tensor, state: Optional[Tensor] = None
                ) -> Tuple[Tensor, Tensor, Optional[Tensor]]:
        z = self.tail(self.body(obs))
        return self.mean_head(z), self.log_std_head(z), None


class CriticMlp(nn.Module):
    def __init__(self, obs_dim: int, v_max: float, width: int = 256):
        super().__init__()
        self.net = _mlp([obs_dim + 3, width, width, 1])
        self.v_max = v_max

    def forward(self, obs: Tensor, action: Tensor) -> Tensor:
        x = torch.cat([obs, encode_action(action, self.v_max)], dim=-1)
        return self.net(x).squeeze(-1)


def make_networks(kind: str, obs_dim: int, v_max: float
                  ) -> Tuple[nn.Module, nn.Module, nn.Module]:
    """Build (actor, critic_1, critic_2) for 'sacsk' or 'sac'."""
    if kind == "sacsk":
        return (ActorSruKan(obs_dim, v_max),
                CriticSruKan(obs_dim, v_max),
                CriticSruKan(obs_dim, v_max))
    if kind == "sac":
        return (ActorMlp(obs_dim, v_max),
                CriticMlp(obs_dim, v_max),
                CriticMlp(obs_dim, v_max))
    raise ValueError(f"unknown network kind {kind!r}")
