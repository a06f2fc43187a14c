"""Special functions used by the coverage and rate formulas.

Digamma is evaluated here from scratch (recurrence plus asymptotic series).
The Gauss hypergeometric function uses its own power series together with
the Pfaff transformation on the negative real axis and defers to
``scipy.special.hyp2f1`` only close to the unit-circle boundary, where the
plain series stalls.  Positive-order incomplete gamma comes from scipy; the
negative non-integer orders needed by the shot-noise kernel are obtained by
downward recurrence.
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError, NumericError

EULER_GAMMA = 0.57721566490153286061

# B_2k / (2k) for k = 1..7
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_DIGAMMA_SHIFT = 12.0

_SERIES_MAX_TERMS = 20000
_SERIES_RTOL = 1e-16


def digamma(x):
    """psi(x) for x > 0.  Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"digamma requires finite x > 0, got {x!r}")
    z = np.array(arr, dtype=float, copy=True)
    acc = np.zeros_like(z)
    small = z < _DIGAMMA_SHIFT
    while np.any(small):
        acc[small] -= 1.0 / z[small]
        z[small] += 1.0
        small = z < _DIGAMMA_SHIFT
    inv2 = 1.0 / (z * z)
    tail = np.zeros_like(z)
    for coef in reversed(_DIGAMMA_ASYMPTOTIC):
        tail = (tail + coef) * inv2
    out = acc + np.log(z) - 0.5 / z - tail
    if np.ndim(x) == 0:
        return float(out)
    return out


def _is_nonpositive_int(v):
    return v <= 0 and float(v).is_integer()


def _gauss_series(a, b, c, z):
    """Plain power series of 2F1 for |z| < 1; terminates when a or b is -m."""
    total = 1.0
    term = 1.0
    for j in range(_SERIES_MAX_TERMS):
        term *= (a + j) * (b + j) / ((c + j) * (j + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) <= _SERIES_RTOL * abs(total) and j > 2:
            return total
    raise NumericError(
        f"2F1 series did not converge after {_SERIES_MAX_TERMS} terms "
        f"(a={a}, b={b}, c={c}, z={z}, partial={total})"
    )


def hyp2f1(a, b, c, z):
    """Gauss hypergeometric 2F1(a, b; c; z) for real z < 1.

    ``c`` must not be a nonpositive integer.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpositive_int(c):
        raise DomainError(f"2F1 undefined for c={c}")
    if not z < 1.0:
        raise DomainError(f"hyp2f1 implemented for z < 1, got z={z}")
    if z == 0.0:
        return 1.0
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _gauss_series(a, b, c, z)
    if 0.0 < z <= 0.5:
        return _gauss_series(a, b, c, z)
    if z < 0.0:
        w = z / (z - 1.0)
        # two Pfaff forms; prefer one that terminates
        if _is_nonpositive_int(c - b):
            return (1.0 - z) ** (-a) * _gauss_series(a, c - b, c, w)
        if _is_nonpositive_int(c - a):
            return (1.0 - z) ** (-b) * _gauss_series(c - a, b, c, w)
        if w <= 0.9:
            return (1.0 - z) ** (-a) * _gauss_series(a, c - b, c, w)
    return _hyp2f1_fallback(a, b, c, z)


def _hyp2f1_fallback(a, b, c, z):
    val = float(special.hyp2f1(a, b, c, z))
    if math.isfinite(val):
        return val
    import mpmath

    try:
        val = float(mpmath.hyp2f1(a, b, c, z))
    except Exception as exc:  # mpmath raises a zoo of types
        raise NumericError(f"2F1({a}, {b}; {c}; {z}) failed: {exc}") from exc
    if not math.isfinite(val):
        raise NumericError(f"2F1({a}, {b}; {c}; {z}) is not finite")
    return val


def regularized_2f1(a, b, c, z):
    """2F1(a, b; c; z) / Gamma(c), with z <= 0."""
    if z > 0:
        raise DomainError(f"regularized_2f1 expects z <= 0, got {z}")
    if _is_nonpositive_int(c):
        # the limit is finite, but no coverage formula reaches it
        raise DomainError(f"regularized_2f1 not implemented at c={c}")
    f = hyp2f1(a, b, c, z)
    return float(special.gammasgn(c)) * f * math.exp(-math.lgamma(c))


def upper_incomplete_gamma(a, x):
    """Non-normalized upper incomplete gamma Gamma(a, x) for x > 0.

    Negative non-integer ``a`` is lifted to positive order with
    Gamma(a, x) = (Gamma(a + 1, x) - x**a * exp(-x)) / a.
    """
    a, x = float(a), float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"upper_incomplete_gamma requires x > 0, got {x}")
    if _is_nonpositive_int(a):
        raise DomainError(f"upper_incomplete_gamma undefined at integer a={a} <= 0")
    if a > 0:
        return float(special.gammaincc(a, x) * special.gamma(a))
    steps = int(math.ceil(-a))
    val = float(special.gammaincc(a + steps, x) * special.gamma(a + steps))
    for j in range(steps, 0, -1):
        order = a + j - 1
        val = (val - x**order * math.exp(-x)) / order
    return val


def beta_fn(x, y):
    """Euler Beta function, valid for negative non-integer arguments."""
    return float(special.gamma(x) * special.gamma(y) / special.gamma(x + y))
