"""Success probability and ergodic rate for Gamma signal and interference.

Rates are in nats.  All closed forms are SIR-only; thermal noise is
handled by the Monte Carlo engine.
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError, NumericError, UnsupportedConfigError
from .gamma import (
    DEFAULT_TOLERANCE,
    GammaParams,
    expected_log_gamma,
    expected_log_sum,
    moschopoulos_mixture,
    sum_moment_match,
)
from .geometry import path_loss, typical_cell_radius
from .interference import laplace_transform
from .specfun import regularized_2f1

_RANGE_SLACK = 1e-8


def _clip_probability(p, what):
    if not math.isfinite(p) or p < -_RANGE_SLACK or p > 1 + _RANGE_SLACK:
        raise NumericError(f"{what} evaluated to {p!r}, outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def _success_beta(ks, ki, x):
    """Gamma(ks+ki)/Gamma(ks) x^ki 2F1~(ki, ks+ki; 1+ki; -x) as I_w(ki, ks), w = x / (1 + x).

    The Pfaff-transformed 2F1 is a terminating alternating polynomial for
    integer ks and cancels badly near w = 1; the incomplete beta does not.
    """
    if x == math.inf:
        return 1.0
    return float(special.betainc(ki, ks, x / (1.0 + x)))


def success_probability_direct(threshold, signal, interference):
    """The regularized-2F1 expression evaluated literally (moderate shapes only)."""
    ks, ki = signal.shape, interference.shape
    x = signal.scale / (threshold * interference.scale)
    return (
        math.exp(math.lgamma(ks + ki) - math.lgamma(ks))
        * x**ki
        * regularized_2f1(ki, ks + ki, 1.0 + ki, -x)
    )


def success_probability(threshold, signal, interference):
    """P(S > T I) for S ~ Gamma[k_s, theta_s], I ~ Gamma[k_i, theta_i]."""
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold}")
    x = signal.scale / (threshold * interference.scale)
    p = _success_beta(signal.shape, interference.shape, x)
    return _clip_probability(p, "success probability")


def success_probability_mixture(threshold, signal, interference, tolerance=DEFAULT_TOLERANCE, max_terms=None):
    """P(S > T sum_m I_m) with independent Gamma interferers, via the Moschopoulos series."""
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold}")
    interference = list(interference)
    if len(interference) == 1:
        return success_probability(threshold, signal, interference[0])
    mix = moschopoulos_mixture(interference, tolerance, max_terms)
    x = signal.scale / (threshold * mix.theta_min)
    ks = signal.shape
    w = x / (1.0 + x)
    shapes = mix.shapes
    # the per-term success probabilities are regularized incomplete betas in w;
    # evaluate the first term through 2F1 and step the rest with the
    # standard recurrence I_w(a+1, b) = I_w(a, b) - w^a (1-w)^b / (a B(a, b))
    probs = np.empty(len(shapes))
    probs[0] = _success_beta(ks, shapes[0], x)
    if len(shapes) > 1:
        a = shapes[:-1]
        log_step = a * math.log(w) + ks * math.log1p(-w) - np.log(a) - (
            special.gammaln(a) + special.gammaln(ks) - special.gammaln(a + ks)
        )
        probs[1:] = probs[0] - np.cumsum(np.exp(log_step))
    p = float(np.dot(mix.weights, np.clip(probs, 0.0, 1.0)))
    return _clip_probability(p, "mixture success probability")


def success_probability_laplace(threshold, beta, config, exact_dominant=False, include_dominant=True, gauss_hermite_nodes=60):
    """P(SIR > T) = E_L[ L_I(l(r) T / (P_s theta_h L)) ] for Rayleigh-type signal fading (k = 1).

    Without shadowing this is the plain Laplace identity; with shadowing the
    log-normal on the serving link is integrated by Gauss-Hermite.
    """
    fading = config.serving_fading
    if fading.shape != 1.0:
        raise UnsupportedConfigError(
            f"Laplace route needs unit signal fading shape, got k = {fading.shape}"
        )
    if not threshold > 0:
        raise DomainError(f"threshold must be positive, got {threshold}")
    r = beta * typical_cell_radius(config)
    base = path_loss(r, config.path_loss) * threshold / (config.serving_power * fading.scale)
    sigma = config.shadow.sigma
    if sigma == 0:
        return _clip_probability(laplace_transform(base, beta, config, exact_dominant, include_dominant), "Laplace success probability")
    nodes, weights = np.polynomial.hermite_e.hermegauss(gauss_hermite_nodes)
    vals = [laplace_transform(base * math.exp(-sigma * z), beta, config, exact_dominant, include_dominant) for z in nodes]
    p = float(np.dot(weights, vals) / math.sqrt(2.0 * math.pi))
    return _clip_probability(p, "Laplace success probability")


def ergodic_rate_exact(signal, interference, tolerance=DEFAULT_TOLERANCE, max_terms=None):
    """E ln(1 + S / sum I_m) = E ln(S + sum I_m) - E ln(sum I_m), both via Moschopoulos."""
    if isinstance(interference, GammaParams):
        interference = [interference]
    interference = list(interference)
    together = expected_log_sum([signal, *interference], tolerance, max_terms)
    alone = expected_log_sum(interference, tolerance, max_terms)
    return max(together - alone, 0.0)


def ergodic_rate_gamma(signal, interference):
    """Rate with S + I moment-matched to one Gamma; a list of interferers is merged first."""
    if not isinstance(interference, GammaParams):
        interference = sum_moment_match(interference)
    total = sum_moment_match([signal, interference])
    return expected_log_gamma(total) - expected_log_gamma(interference)


def rate_from_coverage(ccdf, upper=None):
    """E ln(1 + X) = int_0^inf P(X > e^t - 1) dt, by adaptive quadrature.

    ``ccdf(T)`` must return P(X > T).
    """
    from scipy import integrate

    def f(t):
        if t <= 0:
            return 1.0
        if t > 700.0:  # SIR beyond 1e304
            return 0.0
        return ccdf(math.expm1(t))

    val, _ = integrate.quad(f, 0.0, np.inf if upper is None else upper, limit=400, epsrel=1e-8)
    return val
