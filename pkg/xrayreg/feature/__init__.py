# xrayreg/feature/__init__.py
from .roi import Roi, RoiSpec, compute_roi, roi_footprint, default_roi_spec
from .patch import Patch, Feature, extract_patch, standardize_patch, patch_residual, patch_sample_points
from .residual import feature_residual

__all__ = [
    "Roi",
    "RoiSpec",
    "compute_roi",
    "roi_footprint",
    "default_roi_spec",
    "Patch",
    "Feature",
    "extract_patch",
    "standardize_patch",
    "patch_residual",
    "patch_sample_points",
    "feature_residual",
]
