"""Quadrature ground truth for the kernel moments.

These integrate the exact kernels against a density with
:func:`scipy.integrate.quad` and share no algebra with
:mod:`gwkde.asymptotics`. Integrable power singularities at the origin,
``y**p`` with ``-1 < p < 0``, are removed with the substitution
``u = y**(p + 1)`` before integrating.
"""

import math
import warnings

import numpy as np
from scipy import integrate, special

from .kernels import InvalidShapeError
from .specfun import ln_gamma

TAIL_PROB = 1e-12
# absolute tolerances give way to relative ones for moments far above 1
REL_FLOOR = 1e-12


class OracleError(RuntimeError):
    """Quadrature failed to reach the requested accuracy."""


class DivergentIntegralError(ValueError):
    """The requested moment does not exist (non-integrable singularity)."""


def gamma_upper(shape, scale, tail=TAIL_PROB):
    """``1 - tail`` quantile of a gamma distribution."""
    return scale * float(special.gammainccinv(shape, tail))


def weibull_upper(shape, scale, tail=TAIL_PROB):
    return scale * (-math.log(tail)) ** (1.0 / shape)


def _quad(fun, lo, hi, points, epsabs, epsrel):
    pts = sorted(p for p in points if lo < p < hi)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fun, lo, hi, points=pts or None,
                                      epsabs=epsabs, epsrel=epsrel, limit=500)
        except integrate.IntegrationWarning as exc:
            raise OracleError(f"quadrature did not converge: {exc}") from exc
    return val, err


def integrate_power_weighted(g, p, upper, points=(), epsabs=1e-13, epsrel=1e-12):
    """Integrate ``y**p * g(y)`` over ``[0, inf)`` for smooth ``g``.

    ``upper`` splits the range: the bulk ``[0, upper]`` is integrated with
    breakpoints at ``points``, the remainder ``[upper, inf)`` separately.
    Returns ``(value, abserr)``.
    """
    if p <= -1:
        raise DivergentIntegralError(f"y**{p} is not integrable at 0")
    if p >= 0:
        val, err = _quad(lambda y: y ** p * g(y), 0.0, upper, points, epsabs, epsrel)
    else:
        q = p + 1.0
        # y = u**(1/q), y**p dy = du / q
        u_pts = [pt ** q for pt in points if pt > 0]
        val, err = _quad(lambda u: g(u ** (1.0 / q)) / q, 0.0, upper ** q,
                         u_pts, epsabs, epsrel)
    tail, tail_err = _quad(lambda y: y ** p * g(y), upper, math.inf, (),
                           epsabs, epsrel)
    return val + tail, err + tail_err


def _scalar(fun):
    return lambda y: float(fun(y))


def exact_gamma_moment_oracle(x, h, a, c1, f, tol=1e-10):
    """``int_0^inf K_G(y) f(y) dy`` with the body kernel centred at ``x``."""
    rho = (x + c1 * h) / a
    if rho <= 0:
        raise InvalidShapeError(f"gamma shape rho={rho:.6g} <= 0")
    theta = a
    log_norm = -rho * math.log(theta) - ln_gamma(rho)
    pdf = _scalar(f.pdf)

    def g(y):
        return math.exp(log_norm - y / theta) * pdf(y)

    upper = gamma_upper(rho, theta)
    centre = [rho * theta, max(rho - 1, 0) * theta]
    val, err = integrate_power_weighted(g, rho - 1.0, upper, centre)
    if err > max(tol, REL_FLOOR * abs(val)):
        raise OracleError(f"gamma moment error estimate {err:.3g} > {tol}")
    return val


def exact_weibull_moment_oracle(x, b, a, c2, f, tol=1e-10):
    """``int_0^inf K_W(y) f(y) dy`` with the tail kernel centred at ``x``."""
    k = (x + c2 * b) / a
    if k <= 0:
        raise InvalidShapeError(f"Weibull shape k={k:.6g} <= 0")
    lam = a
    pdf = _scalar(f.pdf)
    # u = (y/lam)^k turns K_W(y) dy into e^{-u} du
    upper = -math.log(TAIL_PROB)
    val, err = integrate_power_weighted(
        lambda u: math.exp(-u) * pdf(lam * u ** (1.0 / k)), 0.0, upper, [1.0])
    if err > max(tol, REL_FLOOR * abs(val)):
        raise OracleError(f"Weibull moment error estimate {err:.3g} > {tol}")
    return val


def exact_squared_kernel_oracle(x, bandwidth, a, c_const, branch, f, rtol=1e-8):
    """``int_0^inf K(y)^2 f(y) dy`` for the body or tail kernel at ``x``.

    ``bandwidth``/``c_const`` are ``(h, c1)`` for ``branch="gamma"`` and
    ``(b, c2)`` for ``branch="weibull"``.
    """
    pdf = _scalar(f.pdf)
    shape = (x + c_const * bandwidth) / a
    if shape <= 0:
        raise InvalidShapeError(f"{branch} shape {shape:.6g} <= 0")
    if shape <= 0.5:
        raise DivergentIntegralError(
            f"squared {branch} kernel with shape {shape:.6g} <= 1/2 "
            "is not integrable at 0")
    scale = a
    if branch == "gamma":
        log_norm = -2 * (shape * math.log(scale) + ln_gamma(shape))

        def g(y):
            return math.exp(log_norm - 2 * y / scale) * pdf(y)

        upper = gamma_upper(shape, scale)
        centre = [max(shape - 1, 0) * scale, shape * scale]
    elif branch == "weibull":
        log_norm = 2 * (math.log(shape / scale) - (shape - 1) * math.log(scale))

        def g(y):
            return math.exp(log_norm - 2 * (y / scale) ** shape) * pdf(y)

        upper = weibull_upper(shape, scale)
        centre = [scale]
    else:
        raise ValueError(f"branch must be 'gamma' or 'weibull', got {branch!r}")
    val, err = integrate_power_weighted(g, 2 * (shape - 1), upper, centre,
                                        epsabs=0.0, epsrel=1e-11)
    if err > rtol * max(abs(val), 1e-300):
        raise OracleError(f"squared-kernel relative error {err / abs(val):.3g} > {rtol}")
    return val


def exact_power_moment(k, power, scale):
    """Closed-form ``E eta^power`` for Weibull(shape k, scale)."""
    return scale ** power * math.exp(ln_gamma(1.0 + power / k))
