"""First-order bias and variance coefficients of the gamma-Weibull estimator.

Each function evaluates one coefficient of the small-bandwidth expansions

* body, ``x in (0, a]``:   bias = C1 + h*C2,   E K^2 = A1 + h*A2
* tail, ``x > a``:         bias = B1 + b*B2,   E K^2 = D1 + b*D2

for a density supplied with analytic derivatives. Formulas are transcribed
literally, including the pieces that do not survive numerical validation;
:mod:`gwkde.experiments` measures which expansions actually hold.

The upper-case coefficients carry the bandwidth constants (``C2 = c1 *
bias_factor_gamma``, ``A2 = c1 * var_factor_gamma``, ``B2 = c2 *
bias_factor_weibull``); the lower-case factors are exposed separately
because the ``c2`` matching condition consumes them directly.
"""

from dataclasses import dataclass, field
import math
from typing import Callable

import numpy as np

from .specfun import D_CONST, EULER_GAMMA, digamma, gamma_fn, ln_gamma

LN2 = math.log(2.0)
LN4 = math.log(4.0)
LN5 = math.log(5.0)
LN10 = math.log(10.0)
# recurring constant 6*gamma - 10 - ln 4 of the squared Weibull kernel moments
G_CONST = 6.0 * EULER_GAMMA - 10.0 - LN4


class SingularityError(ValueError):
    """A coefficient's denominator vanishes at the requested point."""


class DensityDomainError(ValueError):
    """A coefficient needs the density outside its declared support."""


@dataclass(frozen=True)
class ReferenceDensity:
    """A density together with its first three derivatives.

    ``support`` is ``"nonnegative"`` for densities on ``[0, inf)`` and
    ``"real"`` for test functions that may be evaluated anywhere.
    """

    pdf: Callable
    d1: Callable
    d2: Callable
    d3: Callable
    name: str = "custom"
    support: str = "nonnegative"
    params: dict = field(default_factory=dict)

    def derivative(self, order):
        return (self.pdf, self.d1, self.d2, self.d3)[order]

    def check_domain(self, y, what):
        if self.support == "nonnegative" and y < 0:
            raise DensityDomainError(
                f"{what} evaluates {self.name} at y={y:.6g} < 0, "
                "outside its support")


def _gamma_derivative(y, order, rho, kappa):
    # f^(m)(y) = C e^{-y/k} sum_j binom(m,j) (-1/k)^(m-j) (rho-1)_j y^(rho-1-j)
    y = np.asarray(y, dtype=float)
    log_c = -rho * math.log(kappa) - ln_gamma(rho)
    total = np.zeros_like(y)
    falling = 1.0
    pos = y > 0
    for j in range(order + 1):
        coef = math.comb(order, j) * (-1.0 / kappa) ** (order - j) * falling
        p = rho - 1.0 - j
        if coef != 0.0:
            term = np.zeros_like(y)
            term[pos] = np.exp(p * np.log(y[pos]) - y[pos] / kappa + log_c)
            at_zero = y == 0
            if np.any(at_zero):
                # y^p at 0: 0 for p > 0, 1 for p == 0, inf for p < 0
                term[at_zero] = (0.0 if p > 0 else
                                 math.exp(log_c) if p == 0 else math.inf)
            total = total + coef * term
        falling *= rho - 1.0 - j
    total = np.where(y < 0, 0.0, total)
    return float(total) if total.ndim == 0 else total


def gamma_reference(rho, kappa):
    """Gamma(shape ``rho``, scale ``kappa``) density with exact derivatives."""
    if rho <= 0 or kappa <= 0:
        raise ValueError(f"gamma reference needs rho, kappa > 0 "
                         f"(rho={rho}, kappa={kappa})")

    def make(order):
        return lambda y: _gamma_derivative(y, order, rho, kappa)

    return ReferenceDensity(
        pdf=make(0), d1=make(1), d2=make(2), d3=make(3),
        name=f"gamma(rho={rho:.6g}, kappa={kappa:.6g})",
        params={"rho": rho, "kappa": kappa})


def t_r(x, a):
    """Return ``(t, r) = (1 + a/x, 1 + 2a/x)``."""
    if x <= 0:
        raise SingularityError(f"t and r need x > 0, got x={x}")
    return 1.0 + a / x, 1.0 + 2.0 * a / x


def _require_body(x, a):
    if not 0 < x <= a:
        raise ValueError(f"body coefficients need 0 < x <= a (x={x}, a={a})")


def _require_tail(x, a):
    # x = a is admitted: the matching condition evaluates tail terms there
    if x < a:
        raise ValueError(f"tail coefficients need x >= a (x={x}, a={a})")


def bias_factor_gamma(x, a, f):
    """Lower-case factor ``f' + f''*a/2 + f'''*x*a/2``; ``C2 = c1 * this``."""
    return f.d1(x) + f.d2(x) * a / 2.0 + f.d3(x) * x * a / 2.0


def bias_gamma_C1_C2(x, a, c1, f):
    """Body bias coefficients ``(C1, C2)``."""
    _require_body(x, a)
    c1_term = x * a / 2.0 * f.d2(x)
    return c1_term, c1 * bias_factor_gamma(x, a, f)


def _tail_gammas(x, a):
    t, r = t_r(x, a)
    gt, gr = gamma_fn(t), gamma_fn(r)
    return t, r, gt, gr, gt * digamma(t), gr * digamma(r)


def bias_factor_weibull(x, a, f):
    """Lower-case factor ``b2(x, a)``; ``B2 = c2 * this``."""
    _require_tail(x, a)
    t, r, gt, gr, gpt, gpr = _tail_gammas(x, a)
    m = a * gt
    return a * a / (x * x) * (
        -f.d1(m) * gpt
        + f.d2(m) * a * ((gt - gr) * (gpt - 2.0 * gpr))
        - f.d3(m) * a * a / 2.0 * (gt - gr) ** 2 * gpt)


def bias_weibull_B1_B2(x, a, c2, f):
    """Tail bias coefficients ``(B1, B2)``."""
    _require_tail(x, a)
    t, r, gt, gr, _, _ = _tail_gammas(x, a)
    m = a * gt
    b1_term = f.pdf(m) - f.pdf(x) + f.d2(m) * a * a / 2.0 * (gt - gr) ** 2
    return b1_term, c2 * bias_factor_weibull(x, a, f)


def _check_a1_point(x, a, f):
    if a - 2.0 * x == 0:
        raise SingularityError(f"a - 2x vanishes at x={x}, a={a}")
    f.check_domain(x - a / 2.0, "A1/A2")


def var_factor_gamma(x, a, f):
    """Lower-case factor ``a2(x, a)``; ``A2 = c1 * this``."""
    _require_body(x, a)
    _check_a1_point(x, a, f)
    y = x - a / 2.0
    den = a - 2.0 * x
    return -(f.pdf(y) * (a + 2.0 * x) / (2.0 * math.sqrt(a * x) * den ** 2)
             + math.sqrt(x) / (math.sqrt(a) * den)
             * (f.d1(y) + a / 4.0 * y * f.d2(y)))


def var_gamma_A1_A2(x, a, c1, f):
    """Body squared-kernel coefficients ``(A1, A2)``."""
    _require_body(x, a)
    _check_a1_point(x, a, f)
    a1_term = -f.pdf(x - a / 2.0) * math.sqrt(x) / (math.sqrt(a) * (a - 2.0 * x))
    return a1_term, c1 * var_factor_gamma(x, a, f)


def var_weibull_D1_D2(x, a, c2, f):
    """Tail squared-kernel coefficients ``(D1, D2)``.

    ``D2`` depends on ``c2`` both through the ``d*x^2 + a*(c2 - d*x)``
    combinations and through the trailing ``c2``-proportional term.
    """
    _require_tail(x, a)
    d = D_CONST
    f0, f1, f2 = f.pdf(2 * a), f.d1(2 * a), f.d2(2 * a)
    pow2 = 2.0 ** (3.0 * x / a - 1.0)
    pref = x * pow2 / (a * a)
    core = f0 * (x * (x - 3 * a) / (2 * a * a) + 2.0) + f1 * (x - a) + f2 * 2 * a * a
    d1_term = pref * core

    s = d * x * x + a * (c2 - d * x)
    d2_term = pref * (
        f0 * ((x - 2 * a) * s / (2 * a ** 3) + s / a
              - x * (x - a) * (x - 2 * a) * G_CONST / (2 * a ** 3))
        + f1 * (s / a - 2 * x * d * (x - 2 * a + 1) - x * (x - a) * G_CONST / a)
        - f2 * (2 * x * (d * (x - a) + 2 * a * a + a * G_CONST))
        + c2 * pow2 / a ** 3 * (-x * math.log(a) + a + 2 * x * LN2) * core)
    return d1_term, d2_term


def d21_d22(a, f):
    """The ``c2``-free and ``c2``-linear parts of ``D2`` at the split point.

    Depends on ``a`` only. Singular at ``a = 4``, where ``ln a - 2 ln 2``
    vanishes.
    """
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    log_gap = math.log(a) - 2.0 * LN2
    if log_gap == 0 or abs(log_gap) < 1e-14:
        raise SingularityError(f"d22 is singular at a={a}: ln(a) - 2 ln 2 = 0")
    g = EULER_GAMMA
    f0, f1, f2 = f.pdf(2 * a), f.d1(2 * a), f.d2(2 * a)
    d21 = 2.0 ** (1.5 * a) * (
        f1 / LN10 * (a - 1) * (g * LN10 - LN5)
        + f2 * (g - 1 + 2 * a * a * (LN4 / LN10 - 6 * g + 10) + LN2 / LN10))
    d22 = 2.0 ** (1.5 * a - 1) * (
        f0 / (a * a) * ((2 * a - 1) / 2 + 3 * (1 - 1 / (LN10 * log_gap)))
        + f1 / a
        + f2 * (1 - log_gap / LN10))
    return d21, d22


@dataclass(frozen=True)
class AsymptoticTerms:
    """All expansion coefficients at one point.

    Coefficients of the branch that does not contain ``x`` are ``nan``;
    so are ``a1_term``/``a2_term`` where they are undefined (``x <= a/2``
    for densities on the half-line).
    """

    x: float
    a: float
    c1_term: float
    c2_term: float
    b1_term: float
    b2_term: float
    a1_term: float
    a2_term: float
    d1_term: float
    d2_term: float
    t: float
    r: float


def asymptotic_terms(x, a, c1, c2, f):
    nan = math.nan
    t, r = t_r(x, a)
    c1_t = c2_t = b1_t = b2_t = a1_t = a2_t = d1_t = d2_t = nan
    if x <= a:
        c1_t, c2_t = bias_gamma_C1_C2(x, a, c1, f)
        try:
            a1_t, a2_t = var_gamma_A1_A2(x, a, c1, f)
        except (SingularityError, DensityDomainError):
            pass
    else:
        b1_t, b2_t = bias_weibull_B1_B2(x, a, c2, f)
        d1_t, d2_t = var_weibull_D1_D2(x, a, c2, f)
    return AsymptoticTerms(x=x, a=a, c1_term=c1_t, c2_term=c2_t,
                           b1_term=b1_t, b2_term=b2_t, a1_term=a1_t,
                           a2_term=a2_t, d1_term=d1_t, d2_term=d2_t,
                           t=t, r=r)


# -- expansions checked against exact quadrature ---------------------------
# each returns (leading, slope): value ~ leading + bandwidth * slope

def gamma_mean_expansion(x, a, c1, f):
    """E f(xi_x) for the body kernel: ``f(x) + C1 + h*C2``."""
    c1_t, c2_t = bias_gamma_C1_C2(x, a, c1, f)
    return f.pdf(x) + c1_t, c2_t


def weibull_mean_expansion(x, a, c2, f):
    """E f(eta_x) for the tail kernel: ``f(x) + B1 + b*B2``."""
    b1_t, b2_t = bias_weibull_B1_B2(x, a, c2, f)
    return f.pdf(x) + b1_t, b2_t


def stirling_b_expansion(x, a, c1):
    """Expansion of the squared gamma kernel normaliser ``B(x, h, a)``."""
    den = a - 2.0 * x
    if den == 0 or x <= 0:
        raise SingularityError(f"B(x,h,a) expansion singular at x={x}, a={a}")
    leading = -math.sqrt(x) / (math.sqrt(a) * den)
    slope = -c1 * (a + 2.0 * x) / (2.0 * math.sqrt(a * x) * den ** 2)
    return leading, slope


def stirling_b_exact(x, h, a, c1):
    """``Gamma(2 rho - 1) / (a Gamma(rho)^2 2^(2 rho - 1))`` with ``rho = (x + c1 h)/a``."""
    rho = (x + c1 * h) / a
    if 2 * rho - 1 <= 0:
        raise SingularityError(f"B(x,h,a) needs rho > 1/2, got rho={rho:.6g}")
    log_b = (ln_gamma(2 * rho - 1) - math.log(a) - 2 * ln_gamma(rho)
             - (2 * rho - 1) * LN2)
    return math.exp(log_b)


def weibull_kernel_mean_expansion(x, a, c2):
    """Mean of the tail kernel: ``a Gamma(t) - b a^2 c2 Gamma(t) Psi(t) / x^2``."""
    _require_tail(x, a)
    t, _, gt, _, gpt, _ = _tail_gammas(x, a)
    return a * gt, -a * a * c2 / (x * x) * gpt


def weibull_kernel_var_expansion(x, a, c2):
    """Variance of the tail kernel as expanded in the bias derivation."""
    _require_tail(x, a)
    _, _, gt, gr, gpt, gpr = _tail_gammas(x, a)
    leading = a * a * (gt - gr) ** 2
    slope = 2 * a ** 3 * c2 / (x * x) * (gt - gr) * (gpt - 2 * gpr)
    return leading, slope


def gamma_squared_kernel_expansion(x, a, c1, f):
    """E K_G^2: ``A1 + h*A2``."""
    return var_gamma_A1_A2(x, a, c1, f)


def weibull_squared_kernel_expansion(x, a, c2, f):
    """E K_W^2: ``D1 + b*D2``."""
    return var_weibull_D1_D2(x, a, c2, f)
