"""Spline-based function layers.

Every edge from input unit i to output unit j carries its own learnable
scalar function

    phi(x) = w_b * silu(x) + w_s * sum_k c_k * B_k(x)

where silu(x) = x / (1 + exp(-x)) and the B_k are B-spline basis functions
of a fixed order on a uniform grid. Output nodes add their incoming edge
values and apply no further transform. Inputs outside the grid fall back to
the base branch plus the boundary value of the spline branch (the spline
input is clamped to the grid).
"""

from __future__ import annotations

import math
from typing import List, Sequence

import torch
from torch import Tensor, nn


def make_knots(grid_size: int, order: int, lo: float, hi: float) -> Tensor:
    """Uniform knot vector extended `order` intervals beyond each grid end."""
    if grid_size < 1:
        raise ValueError("grid_size must be at least 1")
    if order < 1:
        raise ValueError("order must be at least 1")
    if not lo < hi:
        raise ValueError("grid must satisfy lo < hi")
    h = (hi - lo) / grid_size
    count = grid_size + 2 * order + 1
    return lo + h * (torch.arange(count, dtype=torch.float64) - order)


def bspline_basis(x: Tensor, knots: Tensor, order: int) -> Tensor:
    """Evaluate all degree-`order` B-spline basis functions at x.

    x: any shape. knots: 1-D, uniform. Returns shape x.shape + (n_basis,)
    with n_basis = len(knots) - order - 1. Uses the Cox-de Boor recursion;
    intervals are half-open on the right, so points at or beyond the last
    knot evaluate to zero (callers clamp into the grid first).
    """
    t = knots.to(dtype=x.dtype, device=x.device)
    xe = x.unsqueeze(-1)
    b = ((xe >= t[:-1]) & (xe < t[1:])).to(x.dtype)
    for d in range(1, order + 1):
        left = (xe - t[: -(d + 1)]) / (t[d:-1] - t[: -(d + 1)])
        right = (t[d + 1:] - xe) / (t[d + 1:] - t[1:-d])
        b = left * b[..., :-1] + right * b[..., 1:]
    return b


def bspline_basis_cubic_uniform(x: Tensor, knots: Tensor) -> Tensor:
    """Cubic basis on a uniform knot vector, computed in closed form.

    On a uniform grid every cubic basis function is a shifted copy of the
    same piecewise cubic, so at any point only four are nonzero and their
    values are cubic polynomials of the fractional offset u within the
    current knot interval:

        B_{j}(u)   = (1 - u)^3 / 6
        B_{j+1}(u) = (3u^3 - 6u^2 + 4) / 6
        B_{j+2}(u) = (-3u^3 + 3u^2 + 3u + 1) / 6
        B_{j+3}(u) = u^3 / 6

    Agrees with `bspline_basis(x, knots, 3)` to floating-point roundoff for
    x inside [lo, hi), the domain `KanLayer._spline_input` clamps into;
    outside that range the two disagree (the recursion tracks the partial
    boundary windows, this form does not). This avoids the recursion's
    chain of full temporaries, which dominates wall time for wide layers.
    """
    t = knots.to(dtype=x.dtype, device=x.device)
    n_basis = t.shape[0] - 4
    h = t[1] - t[0]
    # Index of the knot interval containing x, counted so that interval j
    # activates basis functions j..j+3 (x below t[3] or at/above t[-4]
    # falls outside the clamped-caller range; clamp indices for safety).
    idx = torch.clamp(torch.floor((x - t[3]) / h), 0, n_basis - 4)
    u = ((x - t[3]) / h - idx).unsqueeze(-1)
    idx = idx.to(torch.long)
    one_m = 1.0 - u
    u2 = u * u
    u3 = u2 * u
    vals = torch.cat([
        one_m * one_m * one_m / 6.0,
        (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0,
        (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0,
        u3 / 6.0,
    ], dim=-1)
    # Points at or beyond the last knot lie outside every half-open
    # interval; the recursion returns all zeros there.
    vals = vals * (x < t[-1]).unsqueeze(-1).to(x.dtype)
    out = torch.zeros(x.shape + (n_basis,), dtype=x.dtype, device=x.device)
    offsets = torch.arange(4, device=x.device)
    return out.scatter(-1, idx.unsqueeze(-1) + offsets, vals)


class KanLayer(nn.Module):
    """A layer of per-edge learnable spline functions; nodes sum their edges."""

    def __init__(self, in_dim: int, out_dim: int, grid_size: int = 5,
                 order: int = 3, lo: float = -1.0, hi: float = 1.0):
        super().__init__()
        if in_dim < 1 or out_dim < 1:
            raise ValueError("dimensions must be positive")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.grid_size = grid_size
        self.order = order
        self.lo = lo
        self.hi = hi
        self.n_basis = grid_size + order
        self.register_buffer("knots", make_knots(grid_size, order, lo, hi))
        bound = 1.0 / math.sqrt(in_dim)
        self.w_base = nn.Parameter(
            torch.empty(out_dim, in_dim).uniform_(-bound, bound))
        self.w_spline = nn.Parameter(
            torch.empty(out_dim, in_dim).uniform_(-bound, bound))
        self.coeffs = nn.Parameter(
            torch.randn(out_dim, in_dim, self.n_basis) * 0.1)

    def _spline_input(self, x: Tensor) -> Tensor:
        # Clamp into the grid; nudge the top edge inward because the last
        # basis interval is half-open and would otherwise evaluate to zero.
        edge = self.hi - 1e-6 * (self.hi - self.lo)
        return x.clamp(self.lo, edge)

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"expected input width {self.in_dim}, got {x.shape[-1]}")
        base = torch.nn.functional.silu(x)
        xs = self._spline_input(x)
        if self.order == 3:
            basis = bspline_basis_cubic_uniform(xs, self.knots)
        else:
            basis = bspline_basis(xs, self.knots, self.order)
        scaled = self.w_spline.unsqueeze(-1) * self.coeffs
        y_spline = basis.flatten(-2) @ scaled.reshape(self.out_dim, -1).T
        return base @ self.w_base.T + y_spline


class KanStack(nn.Module):
    """Sequential spline layers, e.g. dims [128, 256, 256]."""

    def __init__(self, dims: Sequence[int], grid_size: int = 5, order: int = 3,
                 lo: float = -1.0, hi: float = 1.0):
        super().__init__()
        if len(dims) < 2:
            raise ValueError("need at least input and output widths")
        self.layers = nn.ModuleList(
            KanLayer(dims[k], dims[k + 1], grid_size, order, lo, hi)
            for k in range(len(dims) - 1))

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x
