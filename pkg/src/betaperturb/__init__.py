"""
Spectra of beta-ensembles in tridiagonal form under rank-one
multiplicative perturbations ``(I + i l e1 e1*) J``.

Submodules: :mod:`numerics`, :mod:`jacobi`, :mod:`ensembles`, :mod:`perturb`,
:mod:`density`, :mod:`inverse`, :mod:`verify`, :mod:`cli`, :mod:`plotting`.
"""

from .density import log_density
from .ensembles import EnsembleSpec, RngStream, ScaleLaw, sample_jacobi, sample_scale
from .errors import (
    BetaPerturbError,
    ConditioningError,
    ConfigurationError,
    ConsistencyError,
    DomainError,
    NumericError,
    ParseError,
    SingularityError,
    SizeError,
)
from .inverse import SpectralData, recover
from .jacobi import JacobiMatrix, SpectralMeasure, jacobi_to_measure, measure_to_jacobi
from .perturb import (
    EigenConfiguration,
    chiral_spectrum,
    eigenvalues_additive,
    eigenvalues_multiplicative,
    perturbed_spectrum,
    spectrum_from_measure,
)
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "BetaPerturbError", "ConditioningError", "ConfigurationError", "ConsistencyError",
    "DomainError", "NumericError", "ParseError", "SingularityError", "SizeError",
    "EigenConfiguration", "EnsembleSpec", "JacobiMatrix", "RngStream", "ScaleLaw",
    "SpectralData", "SpectralMeasure", "chiral_spectrum", "eigenvalues_additive",
    "eigenvalues_multiplicative", "jacobi_to_measure", "log_density", "measure_to_jacobi",
    "perturbed_spectrum", "recover", "run_suite", "sample_jacobi", "sample_scale",
    "spectrum_from_measure",
]
