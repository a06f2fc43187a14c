"""Analytic interference: Campbell moments, Laplace transform, Gamma fit.

Interference at the receiver is the sum of independent sources:

* ``dominant``  - one interferer on the guard-region edge (tier chosen with
  probability a_i^2 lambda_i / Lambda),
* ``tier:<i>``  - shot noise of tier i outside its guard region,
* ``cross``     - cross-tier shot noise outside a small disk around the
  receiver (position independent).

Moments of every source are kept separately in :class:`InterferenceMoments`
so that either a single Gamma fit of the total or a list of per-source Gamma
fits can be handed to the metrics layer.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, GuardClearanceError, NumericError, UnsupportedConfigError
from .gamma import GammaParams, moment_match
from .geometry import (
    _check_beta,
    dominant_weights,
    mark_gamma,
    mark_moments,
    path_loss,
    small_ball_distances,
    tier_coefficients,
    typical_cell_radius,
)
from .specfun import beta_fn, hyp2f1, upper_incomplete_gamma

# the closed-form kernel is abandoned for the stable integral once the
# shot-noise exponent falls below this fraction of lambda*pi*x^2
_CANCELLATION_GUARD = 1e-4


@dataclass(frozen=True)
class SourceMoments:
    name: str
    mean: float
    variance: float


@dataclass(frozen=True)
class InterferenceMoments:
    """Mean (W) and variance (W^2) of the total interference plus per-source parts."""

    components: tuple = ()

    @property
    def mean(self):
        return float(sum(c.mean for c in self.components))

    @property
    def variance(self):
        return float(sum(c.variance for c in self.components))

    def component(self, name):
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    def __add__(self, other):
        return InterferenceMoments(self.components + other.components)

    def without(self, name):
        return InterferenceMoments(tuple(c for c in self.components if c.name != name))


def _tier_label(config, i):
    return config.tiers[i].name or f"tier{i + 1}"


def shot_noise_moments(density, ez, ez2, x, model):
    """Campbell mean and variance of a marked PPP outside a disk of radius x.

    Handles x < d0, where the path loss is flat on the annulus [x, d0].
    """
    n, C, d0 = model.exponent, model.constant, model.reference_distance
    if density == 0:
        return 0.0, 0.0
    inner = max(x, d0)
    mean = 2.0 * math.pi * density * ez * inner ** (2.0 - n) / (C * (n - 2.0))
    var = math.pi * density * ez2 * inner ** (2.0 - 2.0 * n) / (C * C * (n - 1.0))
    if x < d0:
        area = math.pi * (d0 * d0 - x * x)
        mean += density * ez * area / (C * d0**n)
        var += density * ez2 * area / (C * d0**n) ** 2
    return mean, var


def homogeneous_moments(beta, config, printed_variance=False):
    """Small-ball moments with one out-of-cell tier.

    With ``printed_variance`` the shot-noise variance uses E Z instead of
    E Z^2 (kept only to document the difference; it is dimensionally wrong).
    """
    if len(config.tiers) != 1:
        raise UnsupportedConfigError("homogeneous_moments expects exactly one interferer tier")
    tier = config.tiers[0]
    d = float(small_ball_distances(beta, config)[0])
    ez, ez2 = mark_moments(tier, config.shadow)
    loss = path_loss(d, config.path_loss)
    dom = SourceMoments("dominant", ez / loss, (ez2 - ez * ez) / loss**2)
    mean, var = shot_noise_moments(tier.density, ez, ez2, d, config.path_loss)
    if printed_variance:
        var *= ez / ez2
    return InterferenceMoments((dom, SourceMoments(_tier_label(config, 0), mean, var)))


def heterogeneous_moments(beta, config):
    """Small-ball moments for any number of out-of-cell tiers (cross tier excluded)."""
    d = small_ball_distances(beta, config)
    weights = dominant_weights(config)
    parts = []
    dom_m1 = dom_m2 = 0.0
    for i, tier in enumerate(config.tiers):
        ez, ez2 = mark_moments(tier, config.shadow)
        loss = path_loss(d[i], config.path_loss)
        dom_m1 += weights[i] * ez / loss
        dom_m2 += weights[i] * ez2 / loss**2
        mean, var = shot_noise_moments(tier.density, ez, ez2, float(d[i]), config.path_loss)
        parts.append(SourceMoments(_tier_label(config, i), mean, var))
    dom = SourceMoments("dominant", dom_m1, dom_m2 - dom_m1 * dom_m1)
    return InterferenceMoments((dom, *parts))


def exact_moments_n4(beta, config):
    """Moments without the small-ball bound, closed form for n = 4.

    The dominant interferer sits at angle-uniform position on each tier's
    guard edge and each tier's PPP is excluded from the disk of radius
    a_i R_c around the cell center.
    """
    model = config.path_loss
    if model.exponent != 4:
        raise UnsupportedConfigError(f"closed-form exact moments need n = 4, got n = {model.exponent}")
    _check_beta(beta)
    a = tier_coefficients(config)
    if not beta < a.min():
        raise DomainError(f"beta={beta} must be below min a_i = {a.min():.6f}")
    rc = typical_cell_radius(config)
    C = model.constant
    for i in range(len(a)):
        if config.tiers[i].density > 0 and (a[i] - beta) * rc <= model.reference_distance:
            label = _tier_label(config, i)
            raise GuardClearanceError(f"{label}: nearest exclusion edge within d0", tier=label, beta=beta)
    weights = dominant_weights(config)
    b2 = beta * beta
    dom_m1 = dom_m2 = 0.0
    parts = []
    for i, tier in enumerate(config.tiers):
        ez, ez2 = mark_moments(tier, config.shadow)
        ai2 = a[i] ** 2
        gap = ai2 - b2
        dom_m1 += weights[i] * ez * (ai2 + b2) / (C * rc**4 * gap**3)
        dom_m2 += weights[i] * ez2 * (ai2 + b2) * (ai2 * ai2 + 8 * ai2 * b2 + b2 * b2) / (C * C * rc**8 * gap**7)
        lam = tier.density
        mean = math.pi * lam * ez * ai2 / (C * rc**2 * gap**2)
        var = 2 * math.pi * lam * ez2 * ai2 * (ai2 * ai2 + 6 * ai2 * b2 + 3 * b2 * b2) / (6 * C * C * rc**6 * gap**6)
        parts.append(SourceMoments(_tier_label(config, i), mean, var))
    dom = SourceMoments("dominant", dom_m1, dom_m2 - dom_m1 * dom_m1)
    return InterferenceMoments((dom, *parts))


def cross_tier_moments(config):
    """Position-independent cross-tier moments; empty when no cross tier is configured."""
    cross = config.cross_tier
    if cross is None:
        return InterferenceMoments(())
    ez, ez2 = mark_moments(cross.tier, config.shadow)
    mean, var = shot_noise_moments(cross.tier.density, ez, ez2, cross.exclusion_radius, config.path_loss)
    return InterferenceMoments((SourceMoments("cross", mean, var),))


def total_moments(beta, config):
    """All sources: dominant, every out-of-cell tier and the cross tier."""
    return heterogeneous_moments(beta, config) + cross_tier_moments(config)


def gamma_approx(moments):
    """Gamma[k, theta] with the mean and variance of the interference."""
    return moment_match(moments.mean, moments.variance)


def component_gammas(moments):
    """Per-source Gamma fits, skipping sources that contribute nothing."""
    return [moment_match(c.mean, c.variance) for c in moments.components if c.mean > 0 and c.variance > 0]


def f_kernel(n, x, C, s, mark):
    """F_{n,x,C}(s) = E_z z^(2/n) [Gamma(-2/n, s z / (C x^n)) - Gamma(-2/n)] for Gamma marks.

    Uses the 2F1/Beta closed form, falling back to direct integration
    over the mark density when the closed form is not finite.
    """
    if not s > 0:
        raise DomainError(f"f_kernel needs s > 0, got {s}")
    delta = 2.0 / n
    k, theta = mark.shape, mark.scale
    b = s / (C * x**n)
    try:
        head = b ** (-delta) * (b * theta) ** (-k) * n / (2.0 + k * n)
        val = head * hyp2f1(k, k + delta, 1.0 + k + delta, -1.0 / (b * theta))
        val -= theta**delta * beta_fn(k + delta, -delta)
        if math.isfinite(val):
            return val
    except (NumericError, OverflowError, ZeroDivisionError):
        pass
    return _f_kernel_quadrature(delta, b, mark)


def _f_kernel_quadrature(delta, b, mark):
    from scipy import special

    k, theta = mark.shape, mark.scale
    g0 = float(special.gamma(-delta))
    log_norm = -special.gammaln(k) - k * math.log(theta)

    def integrand(z):
        if z <= 0:
            return 0.0
        dens = math.exp((k - 1) * math.log(z) - z / theta + log_norm)
        return z**delta * (upper_incomplete_gamma(-delta, b * z) - g0) * dens

    val, err = integrate.quad(integrand, 0, np.inf, limit=400, epsrel=1e-10)
    if not math.isfinite(val):
        raise NumericError(f"F kernel failed by both routes (b={b}, mark={mark})")
    return val


def _log_laplace_integral(s, density, mark, x, model):
    """2 pi lambda int_x^inf (1 - E exp(-s Z / l(v))) v dv, evaluated directly (x >= d0)."""
    n, C = model.exponent, model.constant
    delta = 2.0 / n
    a = s * mark.scale / (C * x**n)
    k = mark.shape

    # substitution u = (x / v)^n maps [x, inf) onto (0, 1]
    def g(u):
        if u == 0.0:
            return k * a
        return -math.expm1(-k * math.log1p(a * u)) / u

    val, _ = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(-delta, 0.0), epsrel=1e-12, limit=200)
    return 2.0 * math.pi * density * x * x / n * val


def shot_noise_log_laplace(s, density, mark, x, model):
    """-ln L(s) of the Gamma-marked shot noise outside radius x."""
    if s == 0 or density == 0:
        return 0.0
    n, C, d0 = model.exponent, model.constant, model.reference_distance
    out = 0.0
    if x < d0:
        flat = s * mark.scale / (C * d0**n)
        out += math.pi * density * (d0 * d0 - x * x) * -math.expm1(-mark.shape * math.log1p(flat))
        x = d0
    ring = math.pi * density * x * x
    tail = 2.0 * math.pi * density * s ** (2.0 / n) / (n * C ** (2.0 / n)) * f_kernel(n, x, C, s, mark) - ring
    if not (tail > _CANCELLATION_GUARD * ring):
        tail = _log_laplace_integral(s, density, mark, x, model)
    return out + tail


def _dominant_laplace(s, loss, tier, shadow, exact):
    if not exact or shadow.sigma == 0:
        g = mark_gamma(tier, shadow).scaled(1.0 / loss)
        return (1.0 + s * g.scale) ** (-g.shape)
    # Gauss-Hermite over the log-normal, Gamma fading integrated in closed form
    nodes, w = np.polynomial.hermite_e.hermegauss(80)
    lvals = np.exp(shadow.sigma * nodes)
    g = tier.fading
    vals = (1.0 + s * g.scale * tier.effective_power * lvals / loss) ** (-g.shape)
    return float(np.sum(w * vals) / math.sqrt(2 * math.pi))


def laplace_transform(s, beta, config, exact_dominant=False, include_dominant=True):
    """Laplace transform of the total interference at s (1/W).

    Dominant and shot-noise marks are Gamma approximations of the composite
    fading; ``exact_dominant`` integrates the dominant term's shadowing
    exactly instead.
    """
    if s < 0:
        raise DomainError(f"Laplace variable must be >= 0, got {s}")
    d = small_ball_distances(beta, config)
    if s == 0:
        return 1.0
    model = config.path_loss
    log_l = 0.0
    if include_dominant:
        weights = dominant_weights(config)
        dom = 0.0
        for i, tier in enumerate(config.tiers):
            if weights[i] > 0:
                dom += weights[i] * _dominant_laplace(s, path_loss(d[i], model), tier, config.shadow, exact_dominant)
        log_l += math.log(dom)
    for i, tier in enumerate(config.tiers):
        log_l -= shot_noise_log_laplace(s, tier.density, mark_gamma(tier, config.shadow), float(d[i]), model)
    cross = config.cross_tier
    if cross is not None:
        log_l -= shot_noise_log_laplace(
            s, cross.tier.density, mark_gamma(cross.tier, config.shadow), cross.exclusion_radius, model
        )
    return math.exp(log_l)
