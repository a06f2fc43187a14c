"""Monte Carlo sampling of the hybrid model and of a plain PPP layout.

Layout modes
------------
``hybrid-small-ball``
    Each tier's PPP is removed from the disk of radius a_i R_c - r centred on
    the receiver, and the dominant interferer sits at that distance.  This is
    exactly the model the analytic moments describe.
``hybrid-exact``
    Each tier's PPP is removed from the disk of radius a_i R_c centred on the
    cell centre; the dominant interferer is placed on that circle at a uniform
    angle.
``ppp-baseline``
    An unconditioned PPP with the serving station added at the origin.  The
    receiver sits at a fraction beta of the way from the serving station to
    the midpoint of its nearest neighbour (the inscribed radius of the
    Voronoi cell in that direction).  This placement is a modelling choice.

Every layout draws from its own child of a ``numpy.random.SeedSequence``,
so results do not depend on how layouts are split across workers.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedConfigError
from .geometry import (
    _check_beta,
    db_to_linear,
    dominant_weights,
    path_loss,
    small_ball_distances,
    tier_coefficients,
    typical_cell_radius,
)

LAYOUT_MODES = ("hybrid-small-ball", "hybrid-exact", "ppp-baseline")
THREADS_ENV = "HYBRIDCELL_THREADS"


@dataclass(frozen=True)
class SimPlan:
    layout_mode: str = "hybrid-small-ball"
    layouts: int = 500
    fading_draws: int = 200
    seed: int = 0
    betas: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    thresholds_db: tuple = (0.0, 5.0, 10.0)
    region_half_width: float = None
    tail_tolerance: float = 1e-3
    check_truncation: bool = True
    include_dominant: bool = True
    keep_samples: bool = False
    workers: int = None

    def __post_init__(self):
        if self.layout_mode not in LAYOUT_MODES:
            raise DomainError(f"layout_mode must be one of {LAYOUT_MODES}, got {self.layout_mode!r}")
        if self.layouts < 1 or self.fading_draws < 1:
            raise DomainError("layouts and fading_draws must be positive")
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "thresholds_db", tuple(float(t) for t in self.thresholds_db))
        for b in self.betas:
            _check_beta(b)
        if not 0 < self.tail_tolerance < 1:
            raise DomainError("tail_tolerance must lie in (0, 1)")


@dataclass
class EmpiricalResult:
    """Per-beta Monte Carlo estimates; standard errors treat layouts as the iid unit."""

    betas: np.ndarray
    thresholds_db: np.ndarray
    coverage: np.ndarray  # (n_beta, n_threshold)
    coverage_se: np.ndarray
    rate: np.ndarray  # nats
    rate_se: np.ndarray
    interference_mean: np.ndarray
    interference_mean_se: np.ndarray
    interference_var: np.ndarray
    interference_var_se: np.ndarray
    samples: dict = field(default_factory=dict)  # beta -> (interference, sir)
    region_half_widths: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EmpiricalMoments:
    mean: float
    variance: float
    mean_se: float
    variance_se: float


def sample_ppp(density, half_width, rng, exclusions=()):
    """Homogeneous PPP on the square [-w, w]^2 minus the given ``(center, radius)`` disks."""
    area = (2.0 * half_width) ** 2
    count = rng.poisson(density * area)
    pts = rng.uniform(-half_width, half_width, size=(count, 2))
    keep = np.ones(count, dtype=bool)
    for center, radius in exclusions:
        keep &= np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1]) >= radius
    return pts[keep]


def dominant_distance(beta, a, rc, eta):
    """Distance from (beta R_c, 0) to a point at radius a R_c and angle eta (law of cosines)."""
    return np.sqrt(a * a + 2.0 * a * beta * np.cos(eta) + beta * beta) * rc


def sample_dominant(beta, config, rng, size=None, mode="hybrid-exact"):
    """Dominant-interferer received power (W) for ``size`` independent draws."""
    _check_beta(beta)
    rc = typical_cell_radius(config)
    a = tier_coefficients(config)
    w = dominant_weights(config)
    n = 1 if size is None else size
    tier_idx = rng.choice(len(a), size=n, p=w)
    if mode == "hybrid-small-ball":
        dist = (a[tier_idx] - beta) * rc
    else:
        eta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        dist = dominant_distance(beta, a[tier_idx], rc, eta)
    out = np.empty(n)
    for i, tier in enumerate(config.tiers):
        sel = tier_idx == i
        m = int(sel.sum())
        if m:
            g = tier.fading.sample(rng, m)
            l = config.shadow.sample(rng, m)
            out[sel] = g * l * tier.effective_power / path_loss(dist[sel], config.path_loss)
    return out[0] if size is None else out


def _required_radius(x, n, tol):
    return x * tol ** (-1.0 / (n - 2.0))


def region_half_widths(config, plan):
    """Square half-width per source such that the truncated shot-noise tail is below tolerance."""
    model = config.path_loss
    n, d0 = model.exponent, model.reference_distance
    rc = typical_cell_radius(config)
    bmax = max(plan.betas)
    a = tier_coefficients(config)
    nearest = {}
    for i, tier in enumerate(config.tiers):
        if tier.density > 0:
            if plan.layout_mode == "ppp-baseline":
                x = rc
            else:
                x = (a[i] - bmax) * rc
            nearest[f"tier{i}"] = max(x, d0)
    if config.cross_tier is not None and config.cross_tier.tier.density > 0:
        nearest["cross"] = max(config.cross_tier.exclusion_radius, d0)
    widths = {}
    for key, x in nearest.items():
        if plan.region_half_width is None:
            widths[key] = bmax * rc + _required_radius(x, n, plan.tail_tolerance)
        else:
            w = float(plan.region_half_width)
            reach = w - bmax * rc
            tail = math.inf if reach <= 0 else (x / reach) ** (n - 2.0)
            if plan.check_truncation and tail > plan.tail_tolerance:
                raise DomainError(
                    f"region half-width {w:.1f} m truncates {tail:.2e} of the {key} shot-noise mean "
                    f"(tolerance {plan.tail_tolerance:g}); enlarge it or disable check_truncation"
                )
            widths[key] = w
    return widths


class _Layout:
    """Geometry constants shared by all layouts of one simulation."""

    def __init__(self, config, plan):
        self.config = config
        self.plan = plan
        self.model = config.path_loss
        self.rc = typical_cell_radius(config)
        self.betas = np.asarray(plan.betas)
        self.a = tier_coefficients(config)
        self.weights = dominant_weights(config)
        self.widths = region_half_widths(config, plan)
        self.thresholds = db_to_linear(np.asarray(plan.thresholds_db))
        if plan.layout_mode == "ppp-baseline":
            if len(config.tiers) != 1:
                raise UnsupportedConfigError("ppp-baseline supports a single out-of-cell tier")
        else:
            self.small_ball = np.array([small_ball_distances(b, config) for b in self.betas])  # (nb, tiers)

    def _marks(self, tier, rng, count, draws):
        g = tier.fading.sample(rng, (draws, count))
        shadow = self.config.shadow.sample(rng, count)
        return g * (shadow * tier.effective_power)[None, :]

    def run(self, rng):
        cfg, plan = self.config, self.plan
        nb, draws = len(self.betas), plan.fading_draws
        if plan.layout_mode == "ppp-baseline":
            rx, interference = self._baseline(rng)
        else:
            rx = np.column_stack([self.betas * self.rc, np.zeros(nb)])
            interference = np.zeros((draws, nb))
            for i, tier in enumerate(cfg.tiers):
                if tier.density == 0:
                    continue
                pts = sample_ppp(tier.density, self.widths[f"tier{i}"], rng)
                dist = np.hypot(pts[None, :, 0] - rx[:, 0:1], pts[None, :, 1] - rx[:, 1:2])  # (nb, N)
                if plan.layout_mode == "hybrid-small-ball":
                    valid = dist >= self.small_ball[:, i : i + 1]
                else:
                    valid = (np.hypot(pts[:, 0], pts[:, 1]) >= self.a[i] * self.rc)[None, :]
                gain = np.where(valid, 1.0 / path_loss(dist, self.model), 0.0)
                interference += self._marks(tier, rng, len(pts), draws) @ gain.T
            if plan.include_dominant and self.weights.sum() > 0:
                interference += self._dominant(rng)
        interference += self._cross(rng, rx)
        serving = cfg.serving_fading.sample(rng, (draws, nb)) * cfg.shadow.sample(rng, nb)[None, :]
        signal = serving * cfg.serving_power / path_loss(np.hypot(rx[:, 0], rx[:, 1]), self.model)[None, :]
        noise = cfg.noise_power or 0.0
        with np.errstate(divide="ignore"):
            sir = signal / (interference + noise)
        return interference, sir

    def _dominant(self, rng):
        cfg, plan = self.config, self.plan
        i = rng.choice(len(self.a), p=self.weights)
        tier = cfg.tiers[i]
        if plan.layout_mode == "hybrid-small-ball":
            dist = self.small_ball[:, i]
        else:
            eta = rng.uniform(0.0, 2.0 * np.pi)
            dist = dominant_distance(self.betas, self.a[i], self.rc, eta)
        g = tier.fading.sample(rng, plan.fading_draws)
        shadow = cfg.shadow.sample(rng)
        return np.outer(g * shadow * tier.effective_power, 1.0 / path_loss(dist, self.model))

    def _cross(self, rng, rx):
        cross = self.config.cross_tier
        draws, nb = self.plan.fading_draws, len(rx)
        if cross is None or cross.tier.density == 0:
            return np.zeros((draws, nb))
        pts = sample_ppp(cross.tier.density, self.widths["cross"], rng)
        dist = np.hypot(pts[None, :, 0] - rx[:, 0:1], pts[None, :, 1] - rx[:, 1:2])
        gain = np.where(dist >= cross.exclusion_radius, 1.0 / path_loss(dist, self.model), 0.0)
        return self._marks(cross.tier, rng, len(pts), draws) @ gain.T

    def _baseline(self, rng):
        tier = self.config.tiers[0]
        draws = self.plan.fading_draws
        while True:
            pts = sample_ppp(tier.density, self.widths["tier0"], rng)
            if len(pts):
                break
        norms = np.hypot(pts[:, 0], pts[:, 1])
        j = int(np.argmin(norms))
        direction = pts[j] / norms[j]
        rx = np.outer(self.betas * norms[j] / 2.0, direction)
        dist = np.hypot(pts[None, :, 0] - rx[:, 0:1], pts[None, :, 1] - rx[:, 1:2])
        gain = 1.0 / path_loss(dist, self.model)
        return rx, self._marks(tier, rng, len(pts), draws) @ gain.T


def _default_workers():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _layout_stats(layout, seed_seq):
    rng = np.random.default_rng(seed_seq)
    interference, sir = layout.run(rng)
    covered = (sir[:, :, None] > layout.thresholds[None, None, :]).mean(axis=0)
    with np.errstate(over="ignore"):
        rate = np.log1p(sir).mean(axis=0)
    return covered, rate, interference.mean(axis=0), (interference**2).mean(axis=0), interference, sir


def _mean_se(x):
    n = len(x)
    if n < 2:
        return np.full(x.shape[1:], np.nan)
    with np.errstate(invalid="ignore"):
        se = x.std(axis=0, ddof=1) / math.sqrt(n)
    # constant columns (e.g. an infinite rate without interference) have no spread
    return np.where(np.all(x == x[:1], axis=0), 0.0, se)


def simulate(config, plan):
    """Run ``plan.layouts`` independent layouts and aggregate per-beta statistics."""
    layout = _Layout(config, plan)
    children = np.random.SeedSequence(plan.seed).spawn(plan.layouts)
    workers = plan.workers or _default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda s: _layout_stats(layout, s), children))
    else:
        stats = [_layout_stats(layout, s) for s in children]

    cov = np.stack([s[0] for s in stats])  # (L, nb, nt)
    rate = np.stack([s[1] for s in stats])
    m1 = np.stack([s[2] for s in stats])
    m2 = np.stack([s[3] for s in stats])
    M1, M2 = m1.mean(axis=0), m2.mean(axis=0)
    var = M2 - M1**2
    # delta method on (mean of m1, mean of m2) across iid layouts
    if len(m1) > 1:
        c11 = np.var(m1, axis=0, ddof=1)
        c22 = np.var(m2, axis=0, ddof=1)
        c12 = np.array([np.cov(m1[:, j], m2[:, j])[0, 1] for j in range(m1.shape[1])])
        var_se = np.sqrt(np.maximum(4 * M1**2 * c11 - 4 * M1 * c12 + c22, 0.0) / len(m1))
    else:
        var_se = np.full_like(var, np.nan)

    samples = {}
    if plan.keep_samples:
        inter = np.concatenate([s[4] for s in stats])
        sirs = np.concatenate([s[5] for s in stats])
        samples = {float(b): (inter[:, j], sirs[:, j]) for j, b in enumerate(plan.betas)}
    return EmpiricalResult(
        betas=np.asarray(plan.betas),
        thresholds_db=np.asarray(plan.thresholds_db),
        coverage=cov.mean(axis=0),
        coverage_se=_mean_se(cov),
        rate=rate.mean(axis=0),
        rate_se=_mean_se(rate),
        interference_mean=M1,
        interference_mean_se=_mean_se(m1),
        interference_var=var,
        interference_var_se=var_se,
        samples=samples,
        region_half_widths=layout.widths,
    )


def empirical_interference_moments(config, plan):
    """Sample mean and variance of the total interference at each beta of the plan."""
    res = simulate(config, plan)
    return [
        EmpiricalMoments(
            float(res.interference_mean[j]),
            float(res.interference_var[j]),
            float(res.interference_mean_se[j]),
            float(res.interference_var_se[j]),
        )
        for j in range(len(res.betas))
    ]
