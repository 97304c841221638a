# xrayreg/geometry/projection.py
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional, Tuple

import numpy as np

from xrayreg.common.errors import BehindSourceError, InvalidParameterError, PoseError, FormatError
from xrayreg.common.fileio import read_json, require, write_json
from .transform import TransformParams


@dataclass(frozen=True)
class ProjectionGeometry:
    """Point source at the origin, flat detector at z = D."""

    D: float = 1000.0
    det_width_px: int = 1024
    det_height_px: int = 1024
    pixel_spacing: float = 0.223
    principal_point: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not (np.isfinite(self.D) and self.D > 0):
            raise InvalidParameterError(f"source-detector distance must be > 0, got {self.D}")
        if not (np.isfinite(self.pixel_spacing) and self.pixel_spacing > 0):
            raise InvalidParameterError(f"pixel spacing must be > 0, got {self.pixel_spacing}")
        if self.det_width_px < 1 or self.det_height_px < 1:
            raise InvalidParameterError("detector must have at least one pixel")
        if self.principal_point is None:
            pp = ((self.det_width_px - 1) / 2.0, (self.det_height_px - 1) / 2.0)
        else:
            pp = (float(self.principal_point[0]), float(self.principal_point[1]))
        object.__setattr__(self, "principal_point", pp)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "D_mm": self.D,
            "det_px": [self.det_width_px, self.det_height_px],
            "pixel_spacing_mm": self.pixel_spacing,
            "principal_point_px": list(self.principal_point),
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "ProjectionGeometry":
        det = require(doc, "det_px", int, 2)
        pp = doc.get("principal_point_px")
        if pp is not None and (not isinstance(pp, list) or len(pp) != 2):
            raise FormatError("principal_point_px", "expected 2 values")
        try:
            return cls(
                D=float(require(doc, "D_mm", (int, float))),
                det_width_px=det[0],
                det_height_px=det[1],
                pixel_spacing=float(require(doc, "pixel_spacing_mm", (int, float))),
                principal_point=tuple(pp) if pp is not None else None,
            )
        except InvalidParameterError as e:
            raise FormatError("geometry", str(e)) from e

    def check_pose(self, t: TransformParams) -> None:
        if not (0.0 < t.t_z < self.D):
            raise PoseError(f"t_z = {t.t_z} mm is outside (0, {self.D})")


GEOMETRY_PRESETS = {
    "full": ProjectionGeometry(1000.0, 1024, 1024, 0.223),
    "desk": ProjectionGeometry(1000.0, 256, 256, 0.892),
    "ci": ProjectionGeometry(1000.0, 96, 96, 2.379),
}


def load_geometry(path) -> ProjectionGeometry:
    return ProjectionGeometry.from_dict(read_json(path))


def save_geometry(geom: ProjectionGeometry, path) -> None:
    write_json(path, geom.to_dict())


def project_point(p, geom: ProjectionGeometry) -> np.ndarray:
    """Perspective projection of world points (…, 3) onto the detector plane, in mm."""
    p = np.asarray(p, dtype=float)
    z = p[..., 2]
    if np.any(z <= 0):
        raise BehindSourceError("point at or behind the source plane")
    return geom.D * p[..., :2] / z[..., None]


def pixel_from_detector(uv, geom: ProjectionGeometry) -> np.ndarray:
    """Detector mm → (column, row) pixel coordinates; pixel centers sit on integers."""
    uv = np.asarray(uv, dtype=float)
    return uv / geom.pixel_spacing + np.asarray(geom.principal_point)


def detector_from_pixel(px, geom: ProjectionGeometry) -> np.ndarray:
    px = np.asarray(px, dtype=float)
    return (px - np.asarray(geom.principal_point)) * geom.pixel_spacing
