# xrayreg/geometry/__init__.py
from .transform import (
    TransformParams,
    RigidPose,
    PARAM_NAMES,
    normalize_angle,
    parse_params,
    pose_from_params,
    rotation_matrix,
)
from .projection import (
    ProjectionGeometry,
    GEOMETRY_PRESETS,
    load_geometry,
    save_geometry,
    project_point,
    pixel_from_detector,
    detector_from_pixel,
)
from .bbox import bbox_corners, bbox_diagonal

__all__ = [
    "TransformParams",
    "RigidPose",
    "PARAM_NAMES",
    "normalize_angle",
    "parse_params",
    "pose_from_params",
    "rotation_matrix",
    "ProjectionGeometry",
    "GEOMETRY_PRESETS",
    "load_geometry",
    "save_geometry",
    "project_point",
    "pixel_from_detector",
    "detector_from_pixel",
    "bbox_corners",
    "bbox_diagonal",
]
