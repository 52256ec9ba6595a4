"""Bounded action distribution.

A diagonal Gaussian is squashed through tanh and mapped affinely onto the
action box [0, scale_d) per dimension, so sampled actions always respect
the bounds. Log-densities include the change-of-variables corrections for
both the tanh squash and the affine map.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import torch
from torch import Tensor

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _log1m_tanh_sq(u: Tensor) -> Tensor:
    """log(1 - tanh(u)^2), computed without catastrophic cancellation."""
    return 2.0 * (math.log(2.0) - u - torch.nn.functional.softplus(-2.0 * u))


class SquashedGaussian:
    """Maps (mean, log_std) network heads to bounded actions with densities."""

    def __init__(self, scale: Tensor):
        if scale.dim() != 1 or (scale <= 0).any():
            raise ValueError("scale must be a 1-D tensor of positive bounds")
        self.scale = scale
        # Upper bounds are exclusive; keep samples strictly below them.
        self.scale_open = torch.nextafter(scale, torch.zeros_like(scale))

    def _to_action(self, u: Tensor) -> Tensor:
        scale = self.scale.to(u.dtype)
        top = self.scale_open.to(u.dtype)
        a = (torch.tanh(u) + 1.0) * 0.5 * scale
        return a.clamp(torch.zeros_like(top), top)

    def sample(self, mean: Tensor, log_std: Tensor,
               noise: Optional[Tensor] = None,
               generator: Optional[torch.Generator] = None) -> Tuple[Tensor, Tensor]:
        """Reparameterized sample and its log-density. Shapes [..., dim]."""
        log_std = log_std.clamp(LOG_STD_MIN, LOG_STD_MAX)
        std = log_std.exp()
        if noise is None:
            noise = torch.randn(mean.shape, dtype=mean.dtype,
                                device=mean.device, generator=generator)
        u = mean + std * noise
        action = self._to_action(u)
        log_prob = self._log_prob_of_u(u, mean, log_std)
        return action, log_prob

    def mean_action(self, mean: Tensor) -> Tensor:
        """Deterministic action at the distribution mode (noise-free)."""
        return self._to_action(mean)

    def _log_prob_of_u(self, u: Tensor, mean: Tensor, log_std: Tensor) -> Tensor:
        std = log_std.exp()
        gauss = -0.5 * ((u - mean) / std) ** 2 - log_std - _HALF_LOG_2PI
        scale = self.scale.to(u.dtype)
        squash = _log1m_tanh_sq(u) + torch.log(scale * 0.5)
        return (gauss - squash).sum(dim=-1)

    def log_prob_of_action(self, mean: Tensor, log_std: Tensor,
                           action: Tensor) -> Tensor:
        """Density of a given in-bounds action (used by verification tests)."""
        log_std = log_std.clamp(LOG_STD_MIN, LOG_STD_MAX)
        scale = self.scale.to(action.dtype)
        t = (2.0 * action / scale - 1.0).clamp(-1.0 + 1e-12, 1.0 - 1e-12)
        u = torch.atanh(t)
        return self._log_prob_of_u(u, mean, log_std)
