# xrayreg/geometry/bbox.py
import itertools

import numpy as np

from xrayreg.common.errors import EmptyObjectError


def bbox_corners(volume) -> np.ndarray:
    """
    Corners (8, 3) of the tight axis-aligned box around all voxels with
    attenuation > 0, in object-local mm. Voxels count with their full extent.
    """
    occupied = np.argwhere(volume.array_xyz() > 0)
    if occupied.size == 0:
        raise EmptyObjectError("volume has no voxel with attenuation > 0")
    spacing = np.asarray(volume.spacing)
    origin = np.asarray(volume.origin)
    lo = origin + occupied.min(axis=0) * spacing - 0.5 * spacing
    hi = origin + occupied.max(axis=0) * spacing + 0.5 * spacing
    return np.array([[(lo, hi)[i][0], (lo, hi)[j][1], (lo, hi)[k][2]] for i, j, k in itertools.product((0, 1), repeat=3)])


def bbox_diagonal(corners) -> float:
    c = np.asarray(corners, dtype=float)
    return float(np.linalg.norm(c.max(axis=0) - c.min(axis=0)))
