# xrayreg/evaluation/metrics.py
"""
Registration accuracy: mean projected corner error rescaled to the object plane.
"""
from typing import Sequence

import numpy as np

from xrayreg.geometry import ProjectionGeometry, TransformParams, bbox_corners, bbox_diagonal, pose_from_params, project_point

SUCCESS_FRACTION = 0.01


def mtre_proj(
    t_est: TransformParams,
    t_gt: TransformParams,
    corners,
    geom: ProjectionGeometry,
    center: Sequence[float] = (0.0, 0.0, 0.0),
) -> float:
    """
    (1/8)·Σ‖proj(pose_est·p_k) − proj(pose_gt·p_k)‖ · z_k / D over the bounding-box
    corners p_k, z_k being the ground-truth depth of corner k (t_z,gt at the
    rotation center). Each detector displacement is scaled back by the
    magnification of its own corner, so a pure in-plane shift (δx, δy) scores
    exactly √(δx² + δy²).
    """
    corners = np.asarray(corners, dtype=float)
    gt_world = pose_from_params(t_gt, center).apply(corners)
    est = project_point(pose_from_params(t_est, center).apply(corners), geom)
    gt = project_point(gt_world, geom)
    return float(np.mean(np.linalg.norm(est - gt, axis=-1) * gt_world[:, 2] / geom.D))


def threshold_for_diagonal(diagonal: float) -> float:
    return SUCCESS_FRACTION * float(diagonal)


def success_threshold(vol) -> float:
    """1% of the object's bounding-box diagonal; raises EmptyObjectError on an empty volume."""
    return threshold_for_diagonal(bbox_diagonal(bbox_corners(vol)))
