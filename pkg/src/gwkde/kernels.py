"""Gamma and Weibull kernels with position-dependent shapes.

The body kernel at a point ``x`` in ``[0, a]`` is the gamma pdf with shape
``rho = (x + c1*h)/a`` and scale ``a``; the tail kernel at ``x > a`` is the
Weibull pdf with shape ``k = (x + c2*b)/a`` and scale ``a``. Both shapes have
slope ``1/a`` in ``x`` and coincide at ``x = a`` once ``h = b*c2/c1``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .specfun import ln_gamma

COUPLING_RTOL = 1e-9


class InvalidShapeError(ValueError):
    """A kernel shape parameter came out non-positive."""


class ConfigError(ValueError):
    """Estimator parameters violate their sign or coupling constraints."""


@dataclass(frozen=True)
class EstimatorConfig:
    """Parameter set of the piecewise estimator.

    ``a`` is both the split point and the common kernel scale. The
    bandwidths must satisfy ``h = b*c2/c1``; use :meth:`from_b` or
    :meth:`from_h` to build a coupled config from one of them.
    """

    a: float
    c1: float
    c2: float
    h: float
    b: float

    def __post_init__(self):
        for name in ("a", "c1", "c2", "h", "b"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value}")
        if self.a <= 0 or self.h <= 0 or self.b <= 0:
            raise ConfigError(
                f"a, h, b must be positive (a={self.a}, h={self.h}, b={self.b})")
        if self.c1 >= 0 or self.c2 >= 0:
            raise ConfigError(
                f"c1, c2 must be negative (c1={self.c1}, c2={self.c2})")
        coupled_h = self.b * self.c2 / self.c1
        if abs(self.h - coupled_h) > COUPLING_RTOL * abs(coupled_h):
            raise ConfigError(
                f"bandwidths not coupled: h={self.h} but b*c2/c1={coupled_h}")

    @classmethod
    def from_b(cls, a, c1, c2, b):
        return cls(a=a, c1=c1, c2=c2, h=b * c2 / c1, b=b)

    @classmethod
    def from_h(cls, a, c1, c2, h):
        b = h * c1 / c2
        # recompute h from b so the coupling check sees one multiplication
        return cls(a=a, c1=c1, c2=c2, h=b * c2 / c1, b=b)

    @property
    def body_shift(self):
        """``c1*h``, or ``c2*b`` when the two agree to rounding.

        Sharing the product makes both shapes identical at ``x = a``.
        """
        body, tail = self.c1 * self.h, self.c2 * self.b
        return tail if abs(body - tail) <= 2 * math.ulp(tail) else body

    @property
    def scale(self):
        """Common scale of both kernels (theta = lambda = a)."""
        return self.a

    def to_dict(self):
        return {"a": self.a, "c1": self.c1, "c2": self.c2,
                "h": self.h, "b": self.b}


def rho_shape(x, cfg):
    """Gamma kernel shape ``(x + c1*h)/a`` at a body point ``x``."""
    rho = (x + cfg.body_shift) / cfg.a
    if rho <= 0:
        raise InvalidShapeError(
            f"gamma shape rho={rho:.6g} <= 0 at x={x} "
            f"(bandwidth h={cfg.h} too large for this x)")
    return rho


def k_shape(x, cfg):
    """Weibull kernel shape ``(x + c2*b)/a`` at a tail point ``x``."""
    k = (x + cfg.c2 * cfg.b) / cfg.a
    if k <= 0:
        raise InvalidShapeError(
            f"Weibull shape k={k:.6g} <= 0 at x={x} "
            f"(bandwidth b={cfg.b} too large for this x)")
    return k


def _xlogy_pow(p, y):
    """``p*log(y)`` with the limits ``y**p`` needs at ``y = 0``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = p * np.log(y)
    # y**0 == 1 even at y == 0
    return np.where((y == 0) & (p == 0), 0.0, out)


def _as_shape(shape, scale, family):
    shape = np.asarray(shape, dtype=float)
    if np.any(shape <= 0) or scale <= 0:
        raise InvalidShapeError(f"{family} pdf needs shape, scale > 0 "
                                f"(shape={shape}, scale={scale})")
    return shape


def _finish(out, y):
    out = np.where(y < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def gamma_pdf(y, shape, scale):
    """Gamma pdf evaluated in log-space.

    ``y`` and ``shape`` broadcast against each other. Returns ``inf`` at
    ``y = 0`` when ``shape < 1``.
    """
    shape = _as_shape(shape, scale, "gamma")
    y = np.asarray(y, dtype=float)
    log_pdf = (_xlogy_pow(shape - 1.0, y) - y / scale
               - shape * math.log(scale) - ln_gamma(shape))
    return _finish(np.exp(log_pdf), y)


def weibull_pdf(y, shape, scale):
    """Weibull pdf evaluated in log-space.

    ``y`` and ``shape`` broadcast against each other. At ``y = 0`` the pdf
    is ``inf`` for ``shape < 1``; callers decide how to treat that point
    singularity.
    """
    shape = _as_shape(shape, scale, "Weibull")
    y = np.asarray(y, dtype=float)
    z = y / scale
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_z = np.log(z)
        zk = np.where(z == 0, 0.0, np.exp(shape * log_z))
    log_pdf = np.log(shape / scale) + _xlogy_pow(shape - 1.0, z) - zk
    return _finish(np.exp(log_pdf), y)


def gamma_kernel(y, x, cfg):
    """Body kernel centred at ``x``, evaluated at observations ``y``."""
    return gamma_pdf(y, rho_shape(x, cfg), cfg.scale)


def weibull_kernel(y, x, cfg):
    """Tail kernel centred at ``x``, evaluated at observations ``y``."""
    return weibull_pdf(y, k_shape(x, cfg), cfg.scale)
