# xrayreg/baseline/__init__.py
"""
Intensity-based registration baselines: MI and GC similarity, Powell's method.
"""
from .similarity import SimilarityKind, mutual_information, gradient_correlation, similarity, bin_intensities
from .powell import PowellConfig, PowellResult, powell_optimize
from .intensity_registration import IntensityResult, INTENSITY_METHODS, make_objective, register_intensity

__all__ = [
    "SimilarityKind",
    "mutual_information",
    "gradient_correlation",
    "similarity",
    "bin_intensities",
    "PowellConfig",
    "PowellResult",
    "powell_optimize",
    "IntensityResult",
    "INTENSITY_METHODS",
    "make_objective",
    "register_intensity",
]
