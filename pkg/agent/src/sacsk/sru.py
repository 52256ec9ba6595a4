"""Simple recurrent unit layers.

Each cell keeps an internal state c that is updated elementwise, so all
matrix products depend only on the current input and the sequence can be
processed with the heavy arithmetic batched across steps. Per step:

    x_tilde = W x
    f = sigmoid(W_f x + v_f * c_prev + b_f)        forget gate
    c = f * c_prev + (1 - f) * x_tilde             internal state
    r = sigmoid(W_r x + v_r * c_prev + b_r)        reset gate
    h = r * c + (1 - r) * x'                       highway output

x' is the raw input when the input width already equals the hidden width
and a learned projection of it otherwise.
"""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import torch
from torch import Tensor, nn


class SruCell(nn.Module):
    """One recurrent layer with elementwise state updates."""

    def __init__(self, input_dim: int, hidden_dim: int):
        super().__init__()
        if input_dim < 1 or hidden_dim < 1:
            raise ValueError("dimensions must be positive")
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        bound = 1.0 / math.sqrt(input_dim)

        def mat() -> nn.Parameter:
            return nn.Parameter(torch.empty(hidden_dim, input_dim).uniform_(-bound, bound))

        self.w = mat()
        self.w_f = mat()
        self.w_r = mat()
        self.v_f = nn.Parameter(torch.zeros(hidden_dim))
        self.v_r = nn.Parameter(torch.zeros(hidden_dim))
        self.b_f = nn.Parameter(torch.zeros(hidden_dim))
        self.b_r = nn.Parameter(torch.zeros(hidden_dim))
        if input_dim != hidden_dim:
            self.w_highway: Optional[nn.Parameter] = mat()
        else:
            self.w_highway = None

    def step(self, x: Tensor, c_prev: Tensor) -> Tuple[Tensor, Tensor]:
        """Advance one step. x: [batch, input], c_prev: [batch, hidden]."""
        if x.shape[-1] != self.input_dim:
            raise ValueError(
                f"expected input width {self.input_dim}, got {x.shape[-1]}")
        if c_prev.shape[-1] != self.hidden_dim:
            raise ValueError(
                f"expected state width {self.hidden_dim}, got {c_prev.shape[-1]}")
        x_tilde = x @ self.w.T
        f = torch.sigmoid(x @ self.w_f.T + self.v_f * c_prev + self.b_f)
        c = f * c_prev + (1.0 - f) * x_tilde
        r = torch.sigmoid(x @ self.w_r.T + self.v_r * c_prev + self.b_r)
        highway = x if self.w_highway is None else x @ self.w_highway.T
        h = r * c + (1.0 - r) * highway
        return h, c

    def forward(self, seq: Tensor, c0: Optional[Tensor] = None) -> Tuple[Tensor, Tensor]:
        """Run a sequence. seq: [batch, steps, input]. Returns (h_seq, c_last)."""
        if seq.dim() != 3:
            raise ValueError(f"expected [batch, steps, input], got shape {tuple(seq.shape)}")
        batch = seq.shape[0]
        c = (torch.zeros(batch, self.hidden_dim, dtype=seq.dtype, device=seq.device)
             if c0 is None else c0)
        outputs = []
        for t in range(seq.shape[1]):
            h, c = self.step(seq[:, t, :], c)
            outputs.append(h)
        return torch.stack(outputs, dim=1), c


class Sru(nn.Module):
    """A stack of SruCell layers; layer k feeds layer k+1 its outputs."""

    def __init__(self, input_dim: int, hidden_dim: int, num_layers: int):
        super().__init__()
        if num_layers < 1:
            raise ValueError("num_layers must be at least 1")
        dims = [input_dim] + [hidden_dim] * num_layers
        self.cells = nn.ModuleList(
            SruCell(dims[k], dims[k + 1]) for k in range(num_layers))
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers

    def initial_state(self, batch: int, dtype: torch.dtype = torch.float32,
                      device: Optional[torch.device] = None) -> Tensor:
        return torch.zeros(self.num_layers, batch, self.hidden_dim,
                           dtype=dtype, device=device)

    def forward(self, seq: Tensor, state: Optional[Tensor] = None) -> Tuple[Tensor, Tensor]:
        """seq: [batch, steps, input]; state: [layers, batch, hidden] or None.

        Returns (top-layer outputs [batch, steps, hidden], next state).
        """
        if state is None:
            state = self.initial_state(seq.shape[0], dtype=seq.dtype, device=seq.device)
        next_states: List[Tensor] = []
        out = seq
        for k, cell in enumerate(self.cells):
            out, c_last = cell(out, state[k])
            next_states.append(c_last)
        return out, torch.stack(next_states, dim=0)
