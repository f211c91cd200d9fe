"""Shared test oracles that do not go through the package's quadrature code."""

import math

import numpy as np
from scipy import integrate, special


def kernel_mass(pdf, shape, scale, family):
    """Integrate a kernel pdf over [0, inf) with scipy quad.

    The integral runs in ``t = log y`` between the kernel's 1e-13 and
    1 - 1e-12 quantiles (computed from scipy's incomplete gamma or the
    closed-form Weibull cdf); the two excluded masses are added back.
    """
    s = shape
    if family == "gamma":
        lo = scale * special.gammaincinv(s, 1e-13)
        hi = scale * special.gammainccinv(s, 1e-12)
        left = special.gammainc(s, lo / scale)
    else:
        lo = scale * (-math.log1p(-1e-13)) ** (1.0 / s)
        hi = scale * (-math.log(1e-12)) ** (1.0 / s)
        left = -math.expm1(-(lo / scale) ** s)
    t_lo, t_hi = math.log(lo), math.log(hi)
    mid = [t for t in (math.log(scale), math.log(scale * s)) if t_lo < t < t_hi]
    val, _ = integrate.quad(lambda t: float(pdf(math.exp(t))) * math.exp(t),
                            t_lo, t_hi, points=mid or None,
                            epsabs=1e-14, epsrel=1e-13, limit=500)
    return val + left + 1e-12


def poly_density(coeffs, support="real"):
    """Polynomial stand-in for a density, with exact derivatives."""
    from gwkde.asymptotics import ReferenceDensity
    p = np.polynomial.Polynomial(coeffs)
    fns = [lambda y, q=p.deriv(k) if k else p: float(q(y)) for k in range(4)]
    return ReferenceDensity(*fns, name=f"poly{tuple(coeffs)}", support=support)


def slot_density(values, support="real"):
    """Density whose pdf/d1/d2/d3 slots are the given constants."""
    from gwkde.asymptotics import ReferenceDensity
    fns = [lambda y, v=v: float(v) for v in values]
    return ReferenceDensity(*fns, name="slots", support=support)


def fd_density(pdf, step=5e-3):
    """Density whose derivatives are 6th-order central differences of ``pdf``."""
    from gwkde.asymptotics import ReferenceDensity

    w1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
    w2 = np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0
    w3 = np.array([1, -8, 13, 0, -13, 8, -1]) / 8.0
    offs = np.arange(-3, 4)

    def make(w, order):
        def d(y):
            vals = np.array([float(pdf(y + o * step)) for o in offs])
            return float(w @ vals) / step ** order
        return d

    return ReferenceDensity(lambda y: float(pdf(y)), make(w1, 1), make(w2, 2),
                            make(w3, 3), name="fd")
