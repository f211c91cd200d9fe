"""Test distributions on [0, inf) with closed-form quantiles.

Sampling is by inverse transform from uniforms, so a fixed uniform stream
reproduces the same sample exactly.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from .asymptotics import ReferenceDensity, gamma_reference


class DistributionError(ValueError):
    """Unknown distribution or invalid parameters."""


PARAMETERS = {
    "weibull": ("shape", "scale"),
    "pareto": ("alpha", "xm"),
    "lognormal": ("mu", "sigma"),
    "gamma": ("rho", "kappa"),
    "burr": ("c", "k"),
    "halfcauchy": ("scale",),
}

DEFAULTS = {
    "weibull": {"shape": 0.9, "scale": 1.0},
    "pareto": {"alpha": 2.0, "xm": 1.0},
    "lognormal": {"mu": 0.0, "sigma": 1.0},
    "gamma": {"rho": 2.0, "kappa": 1.0},
    "burr": {"c": 2.0, "k": 1.0},
    "halfcauchy": {"scale": 1.0},
}


@dataclass(frozen=True)
class Distribution:
    name: str
    params: tuple

    def __post_init__(self):
        if self.name not in PARAMETERS:
            raise DistributionError(
                f"unknown distribution {self.name!r}; choose from "
                f"{', '.join(sorted(PARAMETERS))}")
        names = PARAMETERS[self.name]
        if len(self.params) != len(names):
            raise DistributionError(f"{self.name} takes parameters {names}")
        for key, value in zip(names, self.params):
            if key == "mu":
                if not math.isfinite(value):
                    raise DistributionError(f"{self.name}: mu must be finite")
            elif not (math.isfinite(value) and value > 0):
                raise DistributionError(
                    f"{self.name}: {key} must be positive, got {value}")

    @classmethod
    def create(cls, name, **params):
        if name not in PARAMETERS:
            raise DistributionError(
                f"unknown distribution {name!r}; choose from "
                f"{', '.join(sorted(PARAMETERS))}")
        unknown = set(params) - set(PARAMETERS[name])
        if unknown:
            raise DistributionError(f"{name} has no parameter(s) {sorted(unknown)}")
        merged = {**DEFAULTS[name], **params}
        return cls(name, tuple(float(merged[k]) for k in PARAMETERS[name]))

    @property
    def kwargs(self):
        return dict(zip(PARAMETERS[self.name], self.params))

    def to_dict(self):
        return {"name": self.name, **self.kwargs}

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        p = self.kwargs
        if self.name == "weibull":
            return p["scale"] * (-np.log1p(-u)) ** (1.0 / p["shape"])
        if self.name == "pareto":
            return p["xm"] * (1.0 - u) ** (-1.0 / p["alpha"])
        if self.name == "lognormal":
            return np.exp(p["mu"] + p["sigma"] * special.ndtri(u))
        if self.name == "gamma":
            return p["kappa"] * special.gammaincinv(p["rho"], u)
        if self.name == "burr":
            # Burr XII: F = 1 - (1 + x^c)^-k
            return ((1.0 - u) ** (-1.0 / p["k"]) - 1.0) ** (1.0 / p["c"])
        return p["scale"] * np.tan(np.pi * u / 2.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.kwargs
        xp = np.maximum(x, 0.0)
        if self.name == "weibull":
            out = -np.expm1(-(xp / p["scale"]) ** p["shape"])
        elif self.name == "pareto":
            out = np.where(x < p["xm"], 0.0,
                           1.0 - (p["xm"] / np.maximum(x, p["xm"])) ** p["alpha"])
        elif self.name == "lognormal":
            with np.errstate(divide="ignore"):
                out = special.ndtr((np.log(xp) - p["mu"]) / p["sigma"])
        elif self.name == "gamma":
            out = special.gammainc(p["rho"], xp / p["kappa"])
        elif self.name == "burr":
            out = 1.0 - (1.0 + xp ** p["c"]) ** (-p["k"])
        else:
            out = 2.0 / np.pi * np.arctan(xp / p["scale"])
        return np.where(x < 0, 0.0, out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.kwargs
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        if self.name == "weibull":
            k, lam = p["shape"], p["scale"]
            z = xs / lam
            out = k / lam * z ** (k - 1) * np.exp(-z ** k)
        elif self.name == "pareto":
            al, xm = p["alpha"], p["xm"]
            out = np.where(xs >= xm, al * xm ** al / xs ** (al + 1), 0.0)
        elif self.name == "lognormal":
            mu, sg = p["mu"], p["sigma"]
            out = (np.exp(-(np.log(xs) - mu) ** 2 / (2 * sg * sg))
                   / (xs * sg * math.sqrt(2 * math.pi)))
        elif self.name == "gamma":
            rho, kap = p["rho"], p["kappa"]
            out = np.exp((rho - 1) * np.log(xs) - xs / kap
                         - rho * math.log(kap) - special.gammaln(rho))
        elif self.name == "burr":
            c, k = p["c"], p["k"]
            out = c * k * xs ** (c - 1) * (1 + xs ** c) ** (-k - 1)
        else:
            s = p["scale"]
            out = 2.0 / (np.pi * s * (1 + (xs / s) ** 2))
        out = np.where(pos, out, 0.0)
        return float(out) if out.ndim == 0 else out

    def sample(self, n, rng):
        # Generator.random lies in [0, 1), so the quantile never sees u = 1
        return self.quantile(rng.random(n))

    def reference_density(self):
        """Density with derivatives: exact for gamma, finite differences otherwise."""
        if self.name == "gamma":
            return gamma_reference(*self.params)
        return finite_difference_density(self.pdf, name=self.name)


def finite_difference_density(pdf, step=2e-3, name="fd"):
    """Wrap ``pdf`` with 4th-order central-difference derivatives.

    The step is relative to ``max(|y|, 1)``.
    """
    def hstep(y):
        return step * max(abs(y), 1.0)

    def d1(y):
        e = hstep(y)
        return (-pdf(y + 2 * e) + 8 * pdf(y + e) - 8 * pdf(y - e) + pdf(y - 2 * e)) / (12 * e)

    def d2(y):
        e = hstep(y)
        return (-pdf(y + 2 * e) + 16 * pdf(y + e) - 30 * pdf(y)
                + 16 * pdf(y - e) - pdf(y - 2 * e)) / (12 * e * e)

    def d3(y):
        e = hstep(y)
        return (-pdf(y + 3 * e) + 8 * pdf(y + 2 * e) - 13 * pdf(y + e)
                + 13 * pdf(y - e) - 8 * pdf(y - 2 * e) + pdf(y - 3 * e)) / (8 * e ** 3)

    return ReferenceDensity(pdf=lambda y: float(pdf(y)), d1=d1, d2=d2, d3=d3,
                            name=f"{name} (finite differences)")
