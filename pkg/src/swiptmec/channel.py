"""Air-to-ground link model.

The UAV serves terminals through a downward-facing directional antenna.
Large-scale loss follows a probabilistic line-of-sight model: the
elevation angle sets the LoS probability, which mixes LoS and NLoS
excess losses on top of free-space path loss. Terminals outside the
antenna cone see zero gain and cannot be served.

All functions are pure and operate on plain floats so that repeated
evaluation is bit-for-bit reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scenario import ScenarioConfig


@dataclass(frozen=True)
class LinkGeometry:
    """Relative geometry between the UAV and one ground terminal."""

    d_horiz: float  # ground-projected distance, m
    H: float        # UAV altitude, m

    def __post_init__(self) -> None:
        if self.d_horiz < 0.0:
            raise ValueError(f"d_horiz must be non-negative, got {self.d_horiz!r}")
        if self.H <= 0.0:
            raise ValueError(f"H must be positive, got {self.H!r}")

    @property
    def slant(self) -> float:
        return math.sqrt(self.d_horiz * self.d_horiz + self.H * self.H)

    @property
    def elevation_deg(self) -> float:
        """Elevation angle seen from the terminal, degrees."""
        if self.d_horiz == 0.0:
            return 90.0
        return math.degrees(math.atan(self.H / self.d_horiz))


@dataclass(frozen=True)
class LinkBudget:
    """Evaluated link quantities for one UAV-terminal pair and slot."""

    p_los: float
    path_loss_db: float
    channel_gain: float   # linear power gain, 10^(-path_loss/10)
    antenna_gain: float   # 0 outside the cone
    in_cone: bool
    noise_power: float    # W
    snr_down: float
    snr_up: float
    rate_down: float      # bit/s
    rate_up: float        # bit/s


def los_probability(geom: LinkGeometry, a1: float, b1: float) -> float:
    """Probability of a line-of-sight link at this geometry."""
    exponent = -b1 * (geom.elevation_deg - a1)
    return 1.0 / (1.0 + a1 * math.exp(exponent))


def path_loss_db(geom: LinkGeometry, cfg: ScenarioConfig) -> float:
    """Expected path loss in dB: free space plus LoS-weighted excess."""
    p = los_probability(geom, cfg.a1, cfg.b1)
    free_space = 20.0 * math.log10(4.0 * math.pi * cfg.f_c * geom.slant / cfg.c)
    return free_space + p * cfg.eta_los + (1.0 - p) * cfg.eta_nlos


def channel_gain(geom: LinkGeometry, cfg: ScenarioConfig) -> float:
    """Linear power gain of the link."""
    return 10.0 ** (-path_loss_db(geom, cfg) / 10.0)


def in_cone(d_horiz: float, H: float, beta: float) -> bool:
    """Whether a ground point at horizontal distance d_horiz falls under
    the antenna cone. The boundary itself counts as inside.

    Tested on the off-nadir angle rather than the ground radius
    H*tan(beta) so the canonical boundary (d = H at beta = pi/4) stays
    inside despite floating-point tangent round-off.
    """
    return math.atan2(d_horiz, H) <= beta


def antenna_gain(geom: LinkGeometry, beta: float, H: float) -> float:
    """Directional antenna gain; zero outside the ground cone."""
    if in_cone(geom.d_horiz, H, beta):
        return 2.28 / (beta * beta)
    return 0.0


def noise_power(cfg: ScenarioConfig) -> float:
    """Receiver noise power in watts over the working bandwidth."""
    dbm = cfg.noise_psd + 10.0 * math.log10(cfg.B)
    return 10.0 ** ((dbm - 30.0) / 10.0)


def link_budget(geom: LinkGeometry, cfg: ScenarioConfig) -> LinkBudget:
    """Evaluate the full link budget for one geometry.

    The downlink splits received power at the terminal, so only the
    information share (1 - eta_ps) carries rate. The uplink transmits
    at the terminal's full power.
    """
    p = los_probability(geom, cfg.a1, cfg.b1)
    loss = path_loss_db(geom, cfg)
    h = 10.0 ** (-loss / 10.0)
    g = antenna_gain(geom, cfg.beta, cfg.H)
    sigma2 = noise_power(cfg)
    snr_down = (1.0 - cfg.eta_ps) * h * cfg.P_tran * g / sigma2
    snr_up = cfg.P_i * h * g / sigma2
    rate_down = cfg.B * math.log2(1.0 + snr_down)
    rate_up = cfg.B * math.log2(1.0 + snr_up)
    return LinkBudget(
        p_los=p,
        path_loss_db=loss,
        channel_gain=h,
        antenna_gain=g,
        in_cone=g > 0.0,
        noise_power=sigma2,
        snr_down=snr_down,
        snr_up=snr_up,
        rate_down=rate_down,
        rate_up=rate_up,
    )
