# xrayreg/feature/patch.py
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from xrayreg.drr.image import Image
from xrayreg.geometry import ProjectionGeometry, TransformParams, pixel_from_detector
from .roi import Roi, RoiSpec, _rot2

FLAT_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class Patch:
    values: np.ndarray
    out_of_field: bool = False
    mean: Optional[float] = None
    std: Optional[float] = None
    roi: Optional[Roi] = None

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class Feature:
    """Residual X(t, I) = H^t(DRR_t) − H^t(I) with the t and ROI that produced it."""

    values: np.ndarray
    t: TransformParams
    roi: Roi
    out_of_field: bool = False

    @property
    def shape(self):
        return self.values.shape


def patch_sample_points(roi: Roi, spec: RoiSpec) -> np.ndarray:
    """Detector-mm coordinates (rows, cols, 2) of the patch samples; rows run along h, cols along w."""
    a = ((np.arange(spec.patch_cols) + 0.5) / spec.patch_cols - 0.5) * roi.width_w
    b = ((np.arange(spec.patch_rows) + 0.5) / spec.patch_rows - 0.5) * roi.height_h
    aa, bb = np.meshgrid(a, b)
    local = np.stack([aa, bb], axis=-1)
    return roi.center_q + local @ _rot2(roi.orientation_phi).T


def extract_patch(img: Image, roi: Roi, spec: RoiSpec, geom: ProjectionGeometry) -> Patch:
    """H^t: bilinear resampling of the rotated ROI onto a fixed patch_rows x patch_cols grid."""
    px = pixel_from_detector(patch_sample_points(roi, spec), geom)
    cols, rows = px[..., 0].ravel(), px[..., 1].ravel()
    det_w, det_h = img.detector_px
    in_field = (cols >= 0) & (cols <= det_w - 1) & (rows >= 0) & (rows <= det_h - 1)
    ic = cols - img.offset_px[0]
    ir = rows - img.offset_px[1]
    covered = in_field & (ic >= 0) & (ic <= img.width - 1) & (ir >= 0) & (ir <= img.height - 1)
    values = np.zeros(cols.shape)
    if np.any(covered):
        values[covered] = ndimage.map_coordinates(
            img.values, [ir[covered], ic[covered]], order=1, mode="nearest", output=np.float64
        )
    return Patch(values=values.reshape(spec.patch_shape), out_of_field=bool(not np.all(in_field)), roi=roi)


def standardize_patch(p: Patch) -> Patch:
    """Zero mean, unit std; flat patches (std < 1e-6) become all zeros."""
    mean = float(p.values.mean())
    std = float(p.values.std())
    if std < FLAT_EPS:
        values = np.zeros_like(p.values)
    else:
        values = (p.values - mean) / std
    return Patch(values=values, out_of_field=p.out_of_field, mean=mean, std=std, roi=p.roi)


def patch_residual(a: Patch, b: Patch) -> np.ndarray:
    return a.values - b.values
