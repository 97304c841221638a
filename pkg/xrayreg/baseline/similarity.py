# xrayreg/baseline/similarity.py
"""
Image similarity measures for intensity-based registration.
"""
from enum import Enum

import numpy as np
from sklearn.metrics import mutual_info_score

from xrayreg.common.errors import InvalidParameterError

DEFAULT_BINS = 32


class SimilarityKind(str, Enum):
    MI = "mi"
    GC = "gc"


def _values(p) -> np.ndarray:
    return np.asarray(getattr(p, "values", p), dtype=np.float64)


def _pair(a, b):
    va, vb = _values(a), _values(b)
    if va.shape != vb.shape:
        raise InvalidParameterError(f"patch shapes differ: {va.shape} vs {vb.shape}")
    if va.size == 0:
        raise InvalidParameterError("empty patch")
    return va, vb


def bin_intensities(values: np.ndarray, bins: int) -> np.ndarray:
    """Min-max normalize to [0, 1] and assign bin floor(v·bins), the maximum landing in the last bin."""
    lo, hi = values.min(), values.max()
    if hi - lo <= 0:
        return np.zeros(values.size, dtype=np.int64)
    v = (values.ravel() - lo) / (hi - lo)
    return np.minimum(np.floor(v * bins).astype(np.int64), bins - 1)


def mutual_information(a, b, bins: int = DEFAULT_BINS) -> float:
    """MI of the joint bins x bins histogram, natural log; constant images give 0."""
    if bins < 2:
        raise InvalidParameterError(f"bins must be >= 2, got {bins}")
    va, vb = _pair(a, b)
    return float(mutual_info_score(bin_intensities(va, bins), bin_intensities(vb, bins)))


def _ncc(x: np.ndarray, y: np.ndarray) -> float:
    x = x - x.mean()
    y = y - y.mean()
    denom = np.sqrt(np.sum(x * x) * np.sum(y * y))
    if denom <= 1e-12:
        return 0.0
    return float(np.clip(np.sum(x * y) / denom, -1.0, 1.0))


def gradient_correlation(a, b) -> float:
    """
    Mean NCC of the row and column central-difference gradients, evaluated on
    the interior so every sample is a true central difference.
    """
    va, vb = _pair(a, b)
    if va.ndim != 2 or min(va.shape) < 3:
        raise InvalidParameterError(f"gradient correlation needs a 2-D patch of at least 3x3, got {va.shape}")
    ga_r, ga_c = np.gradient(va)
    gb_r, gb_c = np.gradient(vb)
    inner = (slice(1, -1), slice(1, -1))
    return 0.5 * (_ncc(ga_r[inner], gb_r[inner]) + _ncc(ga_c[inner], gb_c[inner]))


def similarity(kind: SimilarityKind, a, b, bins: int = DEFAULT_BINS) -> float:
    if SimilarityKind(kind) is SimilarityKind.MI:
        return mutual_information(a, b, bins)
    return gradient_correlation(a, b)


def worst_objective(kind: SimilarityKind) -> float:
    """Objective (negated similarity) reported for poses that cannot be rendered."""
    return 0.0 if SimilarityKind(kind) is SimilarityKind.MI else 1.0
