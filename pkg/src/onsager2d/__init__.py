"""Spectral solver and bifurcation analysis for the stationary 2D Doi-Onsager model."""

__version__ = "0.1.0"

from .kernel import (KernelSpec, bifurcation_points, classify_criticality, from_coefficients,
                     from_samples, lambda_zero, onsager_coefficients)
from .spectral import SpectralField, gibbs_measure
from .gamma_map import gamma, jacobian, residual
from .solver import multistart, newton, picard

__all__ = [
    "KernelSpec", "SpectralField", "bifurcation_points", "classify_criticality",
    "from_coefficients", "from_samples", "gamma", "gibbs_measure", "jacobian",
    "lambda_zero", "multistart", "newton", "onsager_coefficients", "picard", "residual",
]
