# xrayreg/volume/volume.py
"""
Voxel attenuation map J with spacing, origin and cached gravity center.

Data is held C-ordered as (n_z, n_y, n_x) so that the flat order is x-fastest.
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import ndimage

from xrayreg.common.errors import EmptyObjectError, InvalidParameterError


@dataclass(frozen=True, eq=False)
class Volume:
    dims: Tuple[int, int, int]
    spacing: Tuple[float, float, float]
    origin: Tuple[float, float, float]
    data: np.ndarray
    gravity_center: np.ndarray = field(init=False)

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        spacing = tuple(float(s) for s in self.spacing)
        origin = tuple(float(o) for o in self.origin)
        if len(dims) != 3 or min(dims) < 1:
            raise InvalidParameterError(f"volume dims must be three values >= 1, got {self.dims}")
        if len(spacing) != 3 or not all(np.isfinite(s) and s > 0 for s in spacing):
            raise InvalidParameterError(f"volume spacing must be > 0, got {self.spacing}")
        if len(origin) != 3 or not np.all(np.isfinite(origin)):
            raise InvalidParameterError(f"volume origin must be finite, got {self.origin}")
        data = np.asarray(self.data, dtype=np.float32)
        if data.size != dims[0] * dims[1] * dims[2]:
            raise InvalidParameterError(f"data holds {data.size} values, dims need {np.prod(dims)}")
        data = np.array(data.reshape(dims[2], dims[1], dims[0]), dtype=np.float32, order="C")
        if not np.all(np.isfinite(data)) or np.any(data < 0):
            raise InvalidParameterError("attenuation values must be finite and >= 0")
        data.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "gravity_center", self._centroid())

    @classmethod
    def from_xyz(cls, array_xyz: np.ndarray, spacing, origin) -> "Volume":
        """Build from an array indexed [ix, iy, iz]."""
        a = np.asarray(array_xyz)
        return cls(dims=a.shape, spacing=spacing, origin=origin, data=np.transpose(a, (2, 1, 0)))

    def array_xyz(self) -> np.ndarray:
        return self.data.transpose(2, 1, 0)

    def voxel_centers(self) -> np.ndarray:
        """Local-mm coordinates (n_z, n_y, n_x, 3) of every voxel center, (x, y, z) last."""
        axes = [self.origin[k] + np.arange(self.dims[k]) * self.spacing[k] for k in range(3)]
        zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return np.stack([xx, yy, zz], axis=-1)

    def lattice_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lo = np.asarray(self.origin)
        return lo, lo + (np.asarray(self.dims) - 1) * np.asarray(self.spacing)

    @property
    def is_empty(self) -> bool:
        return not np.any(self.data > 0)

    def _centroid(self) -> np.ndarray:
        w = self.data.astype(np.float64)
        total = w.sum()
        if total <= 0:
            return np.full(3, np.nan)
        axes = [self.origin[k] + np.arange(self.dims[k]) * self.spacing[k] for k in range(3)]
        return np.array([
            np.dot(w.sum(axis=(0, 1)), axes[0]) / total,
            np.dot(w.sum(axis=(0, 2)), axes[1]) / total,
            np.dot(w.sum(axis=(1, 2)), axes[2]) / total,
        ])

    def require_object(self) -> None:
        if self.is_empty:
            raise EmptyObjectError("volume has no voxel with attenuation > 0")

    def scaled(self, alpha: float) -> "Volume":
        return Volume(self.dims, self.spacing, self.origin, self.data * np.float32(alpha))

    def __add__(self, other: "Volume") -> "Volume":
        if (self.dims, self.spacing, self.origin) != (other.dims, other.spacing, other.origin):
            raise InvalidParameterError("volumes must share the same lattice to be added")
        return Volume(self.dims, self.spacing, self.origin, self.data + other.data)


def sample_trilinear(vol: Volume, points) -> np.ndarray:
    """
    Trilinear attenuation at local-mm points (…, 3). Points outside the
    voxel-center lattice are vacuum (0).
    """
    p = np.asarray(points, dtype=float)
    shape = p.shape[:-1]
    idx = ((p.reshape(-1, 3) - np.asarray(vol.origin)) / np.asarray(vol.spacing)).T
    upper = (np.asarray(vol.dims) - 1)[:, None]
    inside = np.all((idx >= 0) & (idx <= upper), axis=0)
    out = np.zeros(idx.shape[1])
    if np.any(inside):
        # data is (z, y, x): reverse the coordinate rows
        out[inside] = ndimage.map_coordinates(
            vol.data, idx[::-1, inside], order=1, mode="nearest", output=np.float64
        )
    return out.reshape(shape)
