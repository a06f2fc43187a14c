"""Scenario description: fixed cell, guard regions, tiers and path loss.

All lengths are meters, powers watts, densities transmitters per m^2.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, GuardClearanceError
from .gamma import GammaParams, LogNormalParams, composite_fading_params

RAYLEIGH = GammaParams(1.0, 1.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class PathLossModel:
    """Non-singular path loss C * max(d0, r)**n."""

    constant: float
    exponent: float
    reference_distance: float

    def __post_init__(self):
        if not self.constant > 0:
            raise DomainError(f"path-loss constant must be positive, got {self.constant}")
        if not self.exponent > 2:
            raise DomainError(f"path-loss exponent must exceed 2, got {self.exponent}")
        if not self.reference_distance > 0:
            raise DomainError(f"reference distance must be positive, got {self.reference_distance}")

    def __call__(self, r):
        return path_loss(r, self)


@dataclass(frozen=True)
class TierSpec:
    """One class of transmitters forming a marked PPP.

    ``fading`` is the small-scale fading power of each link; log-normal
    shadowing comes from the network config.  ``penetration_loss_db`` only
    matters when the tier is used as a cross tier.
    """

    power: float
    density: float
    fading: GammaParams = RAYLEIGH
    penetration_loss_db: float = 0.0
    name: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.power) and self.power > 0):
            raise DomainError(f"tier power must be positive, got {self.power}")
        if not (math.isfinite(self.density) and self.density >= 0):
            raise DomainError(f"tier density must be finite and >= 0, got {self.density}")
        if self.penetration_loss_db < 0:
            raise DomainError("penetration loss must be nonnegative")

    @property
    def effective_power(self):
        return self.power / db_to_linear(self.penetration_loss_db)


@dataclass(frozen=True)
class CrossTierSpec:
    """Unassociated tier whose PPP is only excluded from a small disk around the receiver."""

    tier: TierSpec
    exclusion_radius: float

    def __post_init__(self):
        if not self.exclusion_radius > 0:
            raise DomainError(f"cross-tier exclusion radius must be positive, got {self.exclusion_radius}")


@dataclass(frozen=True)
class NetworkConfig:
    path_loss: PathLossModel
    serving_power: float
    tiers: tuple
    serving_fading: GammaParams = RAYLEIGH
    shadow: LogNormalParams = field(default_factory=LogNormalParams)
    cross_tier: CrossTierSpec = None
    cell_radius_override: float = None
    noise_power: float = None

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        if not self.tiers:
            raise DomainError("at least one interferer tier (the serving tier) is required")
        if not self.serving_power > 0:
            raise DomainError("serving power must be positive")
        if self.cell_radius_override is not None and not self.cell_radius_override > 0:
            raise DomainError("cell radius override must be positive")
        if self.noise_power is not None and self.noise_power < 0:
            raise DomainError("noise power must be nonnegative")

    @property
    def serving_tier(self):
        return self.tiers[0]

    def scale_densities(self, factor):
        """Copy with every density (cross tier included) multiplied by ``factor``."""
        tiers = tuple(replace(t, density=t.density * factor) for t in self.tiers)
        cross = self.cross_tier
        if cross is not None:
            cross = replace(cross, tier=replace(cross.tier, density=cross.tier.density * factor))
        return replace(self, tiers=tiers, cross_tier=cross)

    def without_shadowing(self):
        return replace(self, shadow=LogNormalParams(0.0))


def _check_beta(beta):
    if not (0.0 <= beta <= 1.0):
        raise DomainError(f"beta must lie in [0, 1], got {beta}")


def path_loss(r, model):
    """C * max(d0, r)**n, elementwise for arrays."""
    r = np.asarray(r, dtype=float)
    out = model.constant * np.maximum(model.reference_distance, r) ** model.exponent
    return float(out) if out.ndim == 0 else out


def tier_coefficient(tier, serving_tier, n):
    """a_i = 1 + (P_i / P_1)**(1/n)."""
    return 1.0 + (tier.power / serving_tier.power) ** (1.0 / n)


def tier_coefficients(config):
    n = config.path_loss.exponent
    return np.array([tier_coefficient(t, config.serving_tier, n) for t in config.tiers])


def effective_density(config):
    """Lambda = sum_i a_i**2 lambda_i over the out-of-cell tiers."""
    a = tier_coefficients(config)
    dens = np.array([t.density for t in config.tiers])
    return float(np.sum(a**2 * dens))


def typical_cell_radius(config):
    """R_c = 1 / (2 sqrt(sum a_i^2 lambda_i)), unless overridden."""
    if config.cell_radius_override is not None:
        return float(config.cell_radius_override)
    lam = effective_density(config)
    if lam <= 0:
        raise DomainError("total interferer density is zero; set cell_radius_override")
    return 0.5 / math.sqrt(lam)


def guard_radius(tier, config):
    """R_g = (a_i - 1) R_c."""
    a = tier_coefficient(tier, config.serving_tier, config.path_loss.exponent)
    return (a - 1.0) * typical_cell_radius(config)


def dominant_weights(config):
    """Probability that the dominant interferer belongs to each tier: a_i^2 lambda_i / Lambda."""
    a = tier_coefficients(config)
    dens = np.array([t.density for t in config.tiers])
    raw = a**2 * dens
    total = raw.sum()
    if total <= 0:
        return np.zeros_like(raw)
    return raw / total


def small_ball_distances(beta, config):
    """Per-tier distance R_c + R_g^(i) - r from the receiver to the guard edge.

    Raises GuardClearanceError when any distance is not above d0.
    """
    _check_beta(beta)
    rc = typical_cell_radius(config)
    a = tier_coefficients(config)
    d = (a - beta) * rc
    d0 = config.path_loss.reference_distance
    for i, (tier, di) in enumerate(zip(config.tiers, d)):
        if config.tiers[i].density > 0 and di <= d0:
            label = tier.name or f"tier[{i}]"
            raise GuardClearanceError(
                f"{label}: R_c + R_g - r = {di:.3f} m does not exceed d0 = {d0} m at beta={beta}",
                tier=label,
                beta=beta,
            )
    return d


def mark_moments(tier, shadow, power=None):
    """Exact (E Z, E Z^2) of Z = G * L * P."""
    p = tier.effective_power if power is None else power
    g = tier.fading
    return (
        p * g.mean() * shadow.moment(1),
        p * p * g.second_moment() * shadow.moment(2),
    )


def mark_gamma(tier, shadow, power=None):
    """Gamma approximation of the composite mark G * L * P."""
    p = tier.effective_power if power is None else power
    return composite_fading_params(tier.fading, shadow).scaled(p)


def signal_params(beta, config):
    """S(r) ~ Gamma[k_p, theta_p * P_s / l(beta R_c)]."""
    _check_beta(beta)
    r = beta * typical_cell_radius(config)
    comp = composite_fading_params(config.serving_fading, config.shadow)
    return comp.scaled(config.serving_power / path_loss(r, config.path_loss))
