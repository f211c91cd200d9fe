"""Gamma-Weibull kernel density estimation for heavy-tailed data on [0, inf)."""

from .asymptotics import ReferenceDensity, gamma_reference
from .bandwidth import BandwidthSolution, fit_reference, select_bandwidths
from .distributions import Distribution
from .estimator import DensityGrid, Sample, estimate_at, estimate_grid, junction_jump
from .kernels import EstimatorConfig, gamma_kernel, weibull_kernel

__version__ = "0.1.0"

__all__ = [
    "BandwidthSolution", "DensityGrid", "Distribution", "EstimatorConfig",
    "ReferenceDensity", "Sample", "estimate_at", "estimate_grid",
    "fit_reference", "gamma_kernel", "gamma_reference", "junction_jump",
    "select_bandwidths", "weibull_kernel",
]
