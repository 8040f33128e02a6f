"""Numerical study of the position-momentum entropy sum on the oscillator basis."""

from .oscillator_basis import CoefficientVector, Symmetry, active_indices, fourier_coefficients, synthesize
from .functionals import ENTROPY_BOUND, EntropyReport, total_entropy, grad_total_entropy, sq_of
from .minimizer import MinimizeConfig, MinimizeResult, minimize_entropy
from .property_suite import run_suite

__all__ = [
    "CoefficientVector", "Symmetry", "active_indices", "fourier_coefficients", "synthesize",
    "ENTROPY_BOUND", "EntropyReport", "total_entropy", "grad_total_entropy", "sq_of",
    "MinimizeConfig", "MinimizeResult", "minimize_entropy", "run_suite",
]
__version__ = "0.1.0"
