"""Gamma-distribution algebra: moment matching, composite fading, exact sums.

Every power quantity in the model (fading, interferer marks, approximated
interference) is carried around as a :class:`GammaParams`.  Sums of
independent Gammas with distinct scales are represented exactly by the
Moschopoulos series, a mixture of ``Gamma[rho + n, theta_min]`` terms.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, NumericError, TruncationError
from .specfun import digamma

DB_PER_NEPER_STD = 8.686
DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_TERMS = 100_000
# the product evaluation is O(N log N), so it may run much longer than the recursion
PRODUCT_MAX_TERMS = 10_000_000
RECURSION_SWITCH_TERMS = 4096


def _check_positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class GammaParams:
    """Gamma[shape, scale] with density x**(k-1) exp(-x/theta) / (theta**k Gamma(k))."""

    shape: float
    scale: float

    def __post_init__(self):
        _check_positive("shape", self.shape)
        _check_positive("scale", self.scale)
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "scale", float(self.scale))

    def mean(self):
        return self.shape * self.scale

    def variance(self):
        return self.shape * self.scale**2

    def second_moment(self):
        return self.shape * (1.0 + self.shape) * self.scale**2

    def scaled(self, factor):
        """Distribution of ``factor * X``."""
        return GammaParams(self.shape, self.scale * factor)

    def cdf(self, x):
        return special.gammainc(self.shape, np.asarray(x, dtype=float) / self.scale)

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, self.scale, size=size)


@dataclass(frozen=True)
class LogNormalParams:
    """Zero-mean log-normal shadowing L = exp(sigma * N(0, 1))."""

    sigma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise DomainError(f"sigma must be finite and >= 0, got {self.sigma!r}")
        object.__setattr__(self, "sigma", float(self.sigma))

    @classmethod
    def from_db(cls, sigma_db):
        return cls(sigma_db / DB_PER_NEPER_STD)

    @property
    def sigma_db(self):
        return self.sigma * DB_PER_NEPER_STD

    def moment(self, order):
        """E[L**order]."""
        return math.exp(0.5 * (order * self.sigma) ** 2)

    def mean(self):
        return self.moment(1)

    def sample(self, rng, size=None):
        if self.sigma == 0.0:
            return np.ones(size) if size is not None else 1.0
        return np.exp(self.sigma * rng.standard_normal(size))


@dataclass(frozen=True)
class GammaMixture:
    """Truncated Moschopoulos representation of a sum of independent Gammas.

    Density ``sum_n weight_n * Gamma[rho + n, theta_min].pdf`` with
    ``weight_n = prefactor * coeffs[n]``.
    """

    prefactor: float
    rho: float
    theta_min: float
    coeffs: np.ndarray

    @property
    def weights(self):
        return self.prefactor * self.coeffs

    @property
    def shapes(self):
        return self.rho + np.arange(len(self.coeffs))

    @property
    def terms(self):
        return len(self.coeffs)

    def mass(self):
        return float(np.sum(self.weights))

    def mean(self):
        return float(np.sum(self.weights * self.shapes) * self.theta_min)

    def pdf(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        logpdf = (
            (self.shapes[None, :] - 1.0) * np.log(y[:, None])
            - y[:, None] / self.theta_min
            - special.gammaln(self.shapes)[None, :]
            - self.shapes[None, :] * math.log(self.theta_min)
        )
        return np.exp(logpdf) @ self.weights

    def cdf(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return special.gammainc(self.shapes[None, :], y[:, None] / self.theta_min) @ self.weights


def moment_match(mean, variance):
    """Gamma with the given mean and variance: k = mean**2/var, theta = var/mean."""
    _check_positive("mean", mean)
    _check_positive("variance", variance)
    return GammaParams(mean * mean / variance, variance / mean)


def sum_moment_match(parts):
    """Single Gamma matching the first two moments of a sum of independent Gammas."""
    parts = list(parts)
    if not parts:
        raise DomainError("sum_moment_match needs at least one component")
    mean = sum(p.shape * p.scale for p in parts)
    var = sum(p.shape * p.scale**2 for p in parts)
    return GammaParams(mean * mean / var, var / mean)


def composite_fading_params(small_scale, shadow):
    """Gamma approximation of H * L with H ~ Gamma, L log-normal (first two moments)."""
    k, theta = small_scale.shape, small_scale.scale
    s2 = shadow.sigma**2
    if s2 == 0.0:
        return small_scale
    e1 = math.exp(s2)
    shape = 1.0 / ((1.0 / k + 1.0) * e1 - 1.0)
    scale = (1.0 + k) * theta * math.exp(1.5 * s2) - k * theta * math.exp(0.5 * s2)
    return GammaParams(shape, scale)


def _nbinom_log_coeffs(k, q, n):
    """log of (k)_j q**j / j! for j = 0..n-1."""
    j = np.arange(n, dtype=float)
    return special.gammaln(k + j) - special.gammaln(k) - special.gammaln(j + 1.0) + j * math.log(q)


def _product_coeffs(shapes, q, prefactor, tolerance, max_terms):
    """Coefficients as the product of the series (1 - q_i z)**(-k_i).

    exp(sum_m gamma_m z**m) factorizes this way, so the output matches the
    recursion term by term.  Each factor times (1 - q_i)**k_i is a
    negative-binomial pmf, so the truncated mass is a convolution CDF.
    """
    from scipy import signal, stats

    log_pref = shapes * np.log1p(-q)
    # start from the largest single-factor quantile and double as needed
    n = int(max(stats.nbinom.isf(tolerance / len(shapes), k, 1.0 - qi) for k, qi in zip(shapes, q))) + 2
    while True:
        n = min(n, max_terms + 1)
        pmf = np.exp(log_pref[0] + _nbinom_log_coeffs(shapes[0], q[0], n))
        for k, qi, lp in zip(shapes[1:], q[1:], log_pref[1:]):
            pmf = signal.fftconvolve(pmf, np.exp(lp + _nbinom_log_coeffs(k, qi, n)))[:n]
            np.clip(pmf, 0.0, None, out=pmf)
        cum = np.cumsum(pmf)
        hit = np.nonzero(1.0 - cum < tolerance)[0]
        if hit.size:
            return pmf[: hit[0] + 1] / prefactor
        if n > max_terms:
            raise TruncationError(
                f"Moschopoulos series reached {max_terms} terms with mass {cum[-1]:.12g}",
                achieved_mass=float(cum[-1]),
                terms=n,
            )
        n *= 2


def _recursion_coeffs(shapes, q, prefactor, tolerance, max_terms):
    """c_{n+1} = (1/(n+1)) sum_{m=1}^{n+1} m gamma_m c_{n+1-m}, with c_0 = 1."""

    # m * gamma_m = sum_i k_i q_i**m, grown in blocks as needed
    def m_gamma(lo, hi):
        m = np.arange(lo, hi, dtype=float)
        return np.sum(shapes[:, None] * q[:, None] ** m[None, :], axis=0)

    block = 1024
    cap = min(block, max_terms) + 1
    mg = np.zeros(cap)
    mg[1:] = m_gamma(1, cap)
    c = np.zeros(cap)
    c[0] = 1.0
    mass = prefactor
    n = 0
    while 1.0 - mass >= tolerance:
        if n + 1 > max_terms:
            raise TruncationError(
                f"Moschopoulos series reached {max_terms} terms with mass {mass:.12g}",
                achieved_mass=mass,
                terms=n + 1,
            )
        if n + 1 >= cap:
            new_cap = min(cap + max(block, cap), max_terms + 1)
            mg = np.concatenate([mg, m_gamma(cap, new_cap)])
            c = np.concatenate([c, np.zeros(new_cap - cap)])
            cap = new_cap
        c[n + 1] = np.dot(mg[1 : n + 2], c[n::-1]) / (n + 1)
        n += 1
        mass_new = mass + prefactor * c[n]
        if mass_new == mass:
            # increments below float resolution of the running sum
            raise TruncationError(
                f"Moschopoulos mass stalled at {mass:.16g} after {n} terms",
                achieved_mass=mass,
                terms=n,
            )
        mass = mass_new
    return c[: n + 1].copy()


def moschopoulos_mixture(parts, tolerance=DEFAULT_TOLERANCE, max_terms=None, method="auto"):
    """Exact series for the law of a sum of independent Gammas, truncated.

    Terms are added until the missing mixture mass ``1 - C * sum(c_n)``
    drops below ``tolerance``.  ``method`` picks the coefficient evaluation:
    ``"recursion"`` (quadratic cost), ``"product"`` (FFT product of
    negative-binomial series), or ``"auto"``, which runs the recursion for
    short series and switches to the product when the series is long.
    ``max_terms`` defaults to 1e5 for the recursion and 1e7 for the product.
    """
    parts = list(parts)
    if not parts:
        raise DomainError("moschopoulos_mixture needs at least one component")
    if not 0.0 < tolerance < 1.0:
        raise DomainError(f"tolerance must lie in (0, 1), got {tolerance}")
    if method not in ("auto", "recursion", "product"):
        raise DomainError(f"unknown Moschopoulos method {method!r}")
    shapes = np.array([p.shape for p in parts])
    scales = np.array([p.scale for p in parts])
    theta_min = float(scales.min())
    rho = float(shapes.sum())
    ratios = theta_min / scales
    log_prefactor = float(np.sum(shapes * np.log(ratios)))
    prefactor = math.exp(log_prefactor)
    if prefactor == 0.0:
        raise NumericError(f"mixture prefactor underflows (log C = {log_prefactor:.1f})")
    q = 1.0 - ratios
    active = q > 0.0
    if not np.any(active):
        return GammaMixture(1.0, rho, theta_min, np.ones(1))
    shapes, q = shapes[active], q[active]

    if method == "recursion":
        coeffs = _recursion_coeffs(shapes, q, prefactor, tolerance, max_terms or DEFAULT_MAX_TERMS)
    elif method == "product":
        coeffs = _product_coeffs(shapes, q, prefactor, tolerance, max_terms or PRODUCT_MAX_TERMS)
    else:
        try:
            coeffs = _recursion_coeffs(shapes, q, prefactor, tolerance, min(max_terms or RECURSION_SWITCH_TERMS, RECURSION_SWITCH_TERMS))
        except TruncationError:
            coeffs = _product_coeffs(shapes, q, prefactor, tolerance, max_terms or PRODUCT_MAX_TERMS)
    return GammaMixture(prefactor, rho, theta_min, coeffs)


def expected_log_gamma(g):
    """E[ln X] for X ~ Gamma[k, theta]: psi(k) + ln(theta)."""
    return digamma(g.shape) + math.log(g.scale)


def expected_log_mixture(mix):
    """E[ln Y] for Y distributed as the (truncated) Gamma mixture."""
    w = mix.weights
    return float(np.sum(w * (digamma(mix.shapes) + math.log(mix.theta_min))))


def expected_log_sum(parts, tolerance=DEFAULT_TOLERANCE, max_terms=None):
    """E[ln(sum X_m)] for independent Gammas, via the Moschopoulos series.

    Evaluated as sum_n C c_n [psi(rho + n) + ln(theta_min)].
    """
    parts = list(parts)
    if len(parts) == 1:
        return expected_log_gamma(parts[0])
    return expected_log_mixture(moschopoulos_mixture(parts, tolerance, max_terms))


def expected_log_sum_printed(parts, tolerance=DEFAULT_TOLERANCE, max_terms=None):
    """Same quantity written as psi(rho) + ln(theta_min) + C sum_n c_n sum_{i<n} 1/(rho+i).

    Kept as an independent evaluation of the series for cross-checking.
    """
    mix = moschopoulos_mixture(parts, tolerance, max_terms)
    harmonic = np.concatenate([[0.0], np.cumsum(1.0 / (mix.rho + np.arange(mix.terms - 1)))])
    return digamma(mix.rho) + math.log(mix.theta_min) + float(np.sum(mix.weights * harmonic))
