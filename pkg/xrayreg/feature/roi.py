# xrayreg/feature/roi.py
"""
Object-aligned region of interest on the detector, determined by t:
center q = projection of the gravity center, w = w0·D/t_z, h = h0·D/t_z, φ = t_θ.
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from xrayreg.common.errors import InvalidParameterError
from xrayreg.drr.image import PixelRegion
from xrayreg.geometry import ProjectionGeometry, TransformParams, bbox_corners, pixel_from_detector


@dataclass(frozen=True)
class RoiSpec:
    w0: float
    h0: float
    patch_rows: int = 156
    patch_cols: int = 300

    def __post_init__(self):
        if not (self.w0 > 0 and self.h0 > 0):
            raise InvalidParameterError(f"ROI size must be > 0, got w0={self.w0}, h0={self.h0}")
        if self.patch_rows < 1 or self.patch_cols < 1:
            raise InvalidParameterError("patch must have at least one row and column")

    @property
    def patch_shape(self):
        return (self.patch_rows, self.patch_cols)

    def to_dict(self) -> Dict[str, Any]:
        return {"w0_mm": self.w0, "h0_mm": self.h0, "patch_rows": self.patch_rows, "patch_cols": self.patch_cols}

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "RoiSpec":
        return cls(float(doc["w0_mm"]), float(doc["h0_mm"]), int(doc["patch_rows"]), int(doc["patch_cols"]))


@dataclass(frozen=True, eq=False)
class Roi:
    center_q: np.ndarray
    width_w: float
    height_h: float
    orientation_phi: float
    source_theta: Optional[float] = None

    def __post_init__(self):
        if not (self.width_w > 0 and self.height_h > 0):
            raise InvalidParameterError(f"ROI width/height must be > 0, got {self.width_w}, {self.height_h}")
        if self.source_theta is not None and self.orientation_phi != self.source_theta:
            raise InvalidParameterError("ROI orientation must equal t_theta of its parameters")
        object.__setattr__(self, "center_q", np.asarray(self.center_q, dtype=float))

    def corners_mm(self) -> np.ndarray:
        half = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]]) * [self.width_w / 2.0, self.height_h / 2.0]
        return self.center_q + half @ _rot2(self.orientation_phi).T

    def to_dict(self) -> Dict[str, Any]:
        return {
            "center_mm": self.center_q.tolist(),
            "width_mm": self.width_w,
            "height_mm": self.height_h,
            "phi_deg": self.orientation_phi,
        }


def _rot2(phi_deg: float) -> np.ndarray:
    c, s = np.cos(np.radians(phi_deg)), np.sin(np.radians(phi_deg))
    return np.array([[c, -s], [s, c]])


def compute_roi(t: TransformParams, geom: ProjectionGeometry, spec: RoiSpec) -> Roi:
    geom.check_pose(t)
    scale = geom.D / t.t_z
    return Roi(
        center_q=np.array([t.t_x * scale, t.t_y * scale]),
        width_w=spec.w0 * scale,
        height_h=spec.h0 * scale,
        orientation_phi=t.t_theta,
        source_theta=t.t_theta,
    )


def roi_footprint(roi: Roi, geom: ProjectionGeometry) -> PixelRegion:
    """Detector pixels needed to resample the ROI (one-pixel margin, clipped to the detector)."""
    px = pixel_from_detector(roi.corners_mm(), geom)
    c0 = max(int(np.floor(px[:, 0].min())) - 1, 0)
    r0 = max(int(np.floor(px[:, 1].min())) - 1, 0)
    c1 = min(int(np.ceil(px[:, 0].max())) + 1, geom.det_width_px - 1)
    r1 = min(int(np.ceil(px[:, 1].max())) + 1, geom.det_height_px - 1)
    if c1 < c0 or r1 < r0:
        # ROI entirely off the detector: every sample will be out of field anyway
        return PixelRegion(0, 0, 1, 1)
    return PixelRegion(c0, r0, c1 - c0 + 1, r1 - r0 + 1)


def default_roi_spec(vol, margin: float = 1.2, patch_rows: int = 156, patch_cols: int = 300) -> RoiSpec:
    """w0, h0 as margin × the object's x/y extent (object-plane mm)."""
    corners = bbox_corners(vol)
    extent = corners.max(axis=0) - corners.min(axis=0)
    return RoiSpec(w0=float(margin * extent[0]), h0=float(margin * extent[1]), patch_rows=patch_rows, patch_cols=patch_cols)
