"""Rule-of-thumb bandwidths from the pointwise MSE expansions.

The unknown density is replaced by a moment-matched gamma reference; the
tail bandwidth ``b`` minimises the tail MSE model at the split point and
the body bandwidth follows from the coupling ``h = b*c2/c1``.
"""

from dataclasses import dataclass, field
import math

from .asymptotics import (SingularityError, bias_factor_gamma,
                          bias_factor_weibull, bias_gamma_C1_C2,
                          bias_weibull_B1_B2, d21_d22, gamma_reference,
                          var_factor_gamma, var_gamma_A1_A2, var_weibull_D1_D2)
from .estimator import DegenerateSampleError

FORMAT_VERSION = 1


class SingularBandwidthError(ValueError):
    """A bandwidth formula divides by a vanishing coefficient.

    ``factor`` names the coefficient.
    """

    def __init__(self, factor, message):
        super().__init__(message)
        self.factor = factor


@dataclass(frozen=True)
class PlugInReference:
    """Gamma(rho_m, kappa_m) matched to the sample mean and variance."""

    rho_m: float
    kappa_m: float

    def density(self):
        return gamma_reference(self.rho_m, self.kappa_m)


@dataclass
class BandwidthSolution:
    a: float
    c1: float
    c2: float
    h_opt: float
    b_opt: float
    rho_m: float
    kappa_m: float
    n: int
    diagnostics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {"format_version": FORMAT_VERSION, "a": self.a, "c1": self.c1,
                "c2": self.c2, "h_opt": self.h_opt, "b_opt": self.b_opt,
                "rho_m": self.rho_m, "kappa_m": self.kappa_m, "n": self.n,
                "warnings": list(self.warnings),
                "diagnostics": dict(self.diagnostics)}

    def config(self):
        from .kernels import EstimatorConfig
        return EstimatorConfig(a=self.a, c1=self.c1, c2=self.c2,
                               h=self.h_opt, b=self.b_opt)


def fit_reference(sample):
    """Method-of-moments gamma reference: ``kappa = D/m``, ``rho = m^2/D``."""
    if sample.variance <= 0:
        raise DegenerateSampleError("sample variance is zero; the gamma "
                                    "reference is undefined")
    if sample.mean <= 0:
        raise DegenerateSampleError("sample mean is zero")
    m, var = sample.mean, sample.variance
    return PlugInReference(rho_m=m * m / var, kappa_m=var / m)


def _nonzero(value, factor):
    if value == 0 or not math.isfinite(value):
        raise SingularBandwidthError(factor, f"{factor} = {value}: bandwidth "
                                     "formula is singular")
    return value


def h_opt_from_terms(c1_term, c2_term, a2_term, f_x, n):
    """Stationary point of the body MSE model, from its coefficients."""
    _nonzero(c2_term, "C2")
    return (-c1_term / c2_term
            - (a2_term / (2 * c2_term) - c1_term - f_x) / (c2_term * n))


def b_opt_from_terms(b1_term, b2_term, d2_term, f_x, n):
    """Stationary point of the tail MSE model, from its coefficients."""
    _nonzero(b2_term, "B2")
    return (-b1_term / b2_term
            - (d2_term / (2 * b2_term) - b1_term + f_x) / (b2_term * n))


def _warn_nonpositive(name, value, warnings):
    if not value > 0 and warnings is not None:
        warnings.append(f"{name}={value:.6g} is not positive")
    return value


def h_opt(x, a, n, c1, f, warnings=None):
    """Optimal body bandwidth at ``x``; non-positive values are returned as is."""
    c1_t, c2_t = bias_gamma_C1_C2(x, a, c1, f)
    _, a2_t = var_gamma_A1_A2(x, a, c1, f)
    return _warn_nonpositive(
        "h_opt", h_opt_from_terms(c1_t, c2_t, a2_t, f.pdf(x), n), warnings)


def b_opt(x, a, n, c2, f, warnings=None):
    """Optimal tail bandwidth at ``x``; non-positive values are returned as is."""
    b1_t, b2_t = bias_weibull_B1_B2(x, a, c2, f)
    _, d2_t = var_weibull_D1_D2(x, a, c2, f)
    return _warn_nonpositive(
        "b_opt", b_opt_from_terms(b1_t, b2_t, d2_t, f.pdf(x), n), warnings)


def mse_gamma_model(h, x, a, n, c1, f):
    """Body MSE with the o(h) remainder dropped."""
    c1_t, c2_t = bias_gamma_C1_C2(x, a, c1, f)
    a1_t, a2_t = var_gamma_A1_A2(x, a, c1, f)
    fx = f.pdf(x)
    return ((c1_t + h * c2_t) ** 2
            + (a1_t - (c1_t + fx) ** 2 + h * (a2_t - 2 * c2_t * (c1_t + fx))) / n)


def mse_weibull_model(b, x, a, n, c2, f):
    """Tail MSE with the o(b) remainder dropped."""
    b1_t, b2_t = bias_weibull_B1_B2(x, a, c2, f)
    d1_t, d2_t = var_weibull_D1_D2(x, a, c2, f)
    fx = f.pdf(x)
    return ((b1_t + b * b2_t) ** 2
            + (d1_t - (b1_t - fx) ** 2 + b * (d2_t - 2 * b2_t * (b1_t - fx))) / n)


def solve_c2(a, c1, f, warnings=None):
    """Matching constant ``c2`` that equalises the two optimal bandwidths at ``a``.

    A non-negative result is returned unchanged; a message is appended to
    ``warnings`` when a list is given.
    """
    fa = f.pdf(a)
    c1_aa = bias_gamma_C1_C2(a, a, c1, f)[0]
    b1_aa = bias_weibull_B1_B2(a, a, -1.0, f)[0]
    c2_fac = bias_factor_gamma(a, a, f)
    b2_fac = bias_factor_weibull(a, a, f)
    a2_fac = var_factor_gamma(a, a, f)
    try:
        d21, d22 = d21_d22(a, f)
    except SingularityError as exc:
        raise SingularBandwidthError("d22", str(exc)) from None
    _nonzero(d21, "d21")
    _nonzero(c1_aa, "C1(a,a)")
    _nonzero(c2_fac, "c2(a,a)")
    c2 = (b1_aa * b2_fac / c1_aa * (a2_fac / c2_fac - 2 * fa)
          - 2 * fa * b2_fac - d22) / d21
    if c2 >= 0 and warnings is not None:
        warnings.append(f"solve_c2 returned c2={c2:.6g} >= 0; "
                        "tail constants must be negative")
    return c2


def iqr_floor(sample):
    """Fallback bandwidth ``n^(-2/5) * IQR``."""
    q75, q25 = sample.quantile(0.75), sample.quantile(0.25)
    return sample.n ** -0.4 * (q75 - q25)


def select_bandwidths(sample, a=None, c1=-1.0):
    """Full rule-of-thumb pipeline.

    fit_reference -> solve_c2 -> b_opt(a, a, n, c2) -> h = b_opt*c2/c1.

    ``a`` defaults to the sample median. When ``solve_c2`` is not negative
    the pipeline continues with ``c2 = c1``; when ``b_opt`` is not positive
    it continues with :func:`iqr_floor`. Both events are recorded in
    ``warnings`` and ``diagnostics``.
    """
    if c1 >= 0:
        raise ValueError(f"c1 must be negative, got {c1}")
    if a is None:
        a = sample.median()
    if a <= 0:
        raise ValueError(f"split point a must be positive, got {a}")
    ref = fit_reference(sample)
    f = ref.density()
    warns = []
    diag = {"f_a": f.pdf(a)}

    c2_raw = solve_c2(a, c1, f, warns)
    diag["c2_raw"] = c2_raw
    c2 = c2_raw
    if c2_raw >= 0:
        c2 = c1
        warns.append(f"using fallback c2 = c1 = {c1:.6g}")
        diag["c2_fallback"] = True

    b1_t, b2_t = bias_weibull_B1_B2(a, a, c2, f)
    d1_t, d2_t = var_weibull_D1_D2(a, a, c2, f)
    diag.update(B1=b1_t, B2=b2_t, D1=d1_t, D2=d2_t)
    b_raw = b_opt_from_terms(b1_t, b2_t, d2_t, f.pdf(a), sample.n)
    diag["b_opt_raw"] = b_raw
    b = b_raw
    if not b_raw > 0:
        b = iqr_floor(sample)
        warns.append(f"b_opt={b_raw:.6g} <= 0; using floor n^(-2/5)*IQR = {b:.6g}")
        diag["b_floor"] = True
        if not b > 0:
            raise SingularBandwidthError("IQR", "interquartile range is zero; "
                                         "no positive fallback bandwidth")
    h = b * c2 / c1

    # h_opt at the split point from the body formulas, reported only
    try:
        h_body = h_opt(a, a, sample.n, c1, f)
        diag["h_opt_body"] = h_body
        diag["coupling_gap"] = h_body - h
    except (SingularBandwidthError, SingularityError) as exc:
        diag["h_opt_body"] = None
        warns.append(f"h_opt at x=a unavailable: {exc}")
    return BandwidthSolution(a=a, c1=c1, c2=c2, h_opt=h, b_opt=b,
                             rho_m=ref.rho_m, kappa_m=ref.kappa_m, n=sample.n,
                             diagnostics=diag, warnings=warns)
