"""Gamma, log-gamma and digamma on the positive real axis.

Thin, domain-checked wrappers over :mod:`scipy.special`. Every function
accepts scalars or arrays and returns the same shape; scalars come back as
Python floats.
"""

import math

import numpy as np
from scipy import special

EULER_GAMMA = 0.57721566490153286
# d = gamma - 1 + ln 2, enters the squared Weibull kernel expansions
D_CONST = EULER_GAMMA - 1.0 + math.log(2.0)

# ln Γ(1+e) = -γ e + Σ_{k≥2} (-1)^k ζ(k) e^k / k, used near the zeros at 1 and 2
# where gammaln loses relative accuracy
_NEAR_ZERO = 0.1
_SERIES = np.concatenate((
    [0.0, -EULER_GAMMA],
    [(-1) ** k * special.zeta(k) / k for k in range(2, 30)]))


class DomainError(ValueError):
    """Argument outside the positive real axis."""


def _check_positive(z, name):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} requires finite z > 0, got {z!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def gamma_fn(z):
    """Gamma function, computed as ``exp(ln_gamma(z))``.

    Overflows to ``inf`` past z ~ 171.6, like any double-precision gamma.
    """
    arr = _check_positive(z, "gamma_fn")
    # Γ > 0 on the positive axis, so the sign of gammaln is never needed
    with np.errstate(over="ignore"):
        return _out(np.exp(special.gammaln(arr)))


def _ln_gamma_1p(e):
    return np.polynomial.polynomial.polyval(e, _SERIES)


def ln_gamma(z):
    """Natural log of the gamma function for z > 0.

    Near z = 1 and z = 2, where the value crosses zero, a Taylor series
    keeps the error relative rather than absolute.
    """
    arr = _check_positive(z, "ln_gamma")
    out = special.gammaln(arr)
    near1 = np.abs(arr - 1.0) < _NEAR_ZERO
    near2 = np.abs(arr - 2.0) < _NEAR_ZERO
    if np.any(near1 | near2):
        out = np.array(out, dtype=float, copy=True)
        e1 = arr[near1] - 1.0
        out[near1] = _ln_gamma_1p(e1)
        e2 = arr[near2] - 2.0
        out[near2] = _ln_gamma_1p(e2) + np.log1p(e2)
    return _out(out)


def digamma(z):
    """Logarithmic derivative of the gamma function for z > 0."""
    return _out(special.psi(_check_positive(z, "digamma")))
