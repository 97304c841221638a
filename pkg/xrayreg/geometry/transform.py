# xrayreg/geometry/transform.py
"""
The six-parameter rigid transform and its pose matrix.

World frame: origin at the X-ray point source, +z toward the detector, detector
plane at z = D with u parallel to x and v parallel to y. A local object point p
maps to world as R·(p − center) + (t_x, t_y, t_z), R = R_z(θ)·R_x(α)·R_y(β).
"""
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from xrayreg.common.errors import InvalidParameterError

PARAM_NAMES = ("x", "y", "z", "theta", "alpha", "beta")
ANGLE_SLOTS = (3, 4, 5)


def normalize_angle(deg):
    """Wrap degrees into [-180, 180)."""
    return (np.asarray(deg, dtype=float) + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class TransformParams:
    """t = (t_x, t_y, t_z) in mm and (t_theta, t_alpha, t_beta) in degrees."""

    t_x: float
    t_y: float
    t_z: float
    t_theta: float = 0.0
    t_alpha: float = 0.0
    t_beta: float = 0.0

    def __post_init__(self):
        values = [self.t_x, self.t_y, self.t_z, self.t_theta, self.t_alpha, self.t_beta]
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError(f"non-finite transform parameters {values}")
        for name in ("t_x", "t_y", "t_z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("t_theta", "t_alpha", "t_beta"):
            object.__setattr__(self, name, float(normalize_angle(getattr(self, name))))

    def as_array(self) -> np.ndarray:
        return np.array([self.t_x, self.t_y, self.t_z, self.t_theta, self.t_alpha, self.t_beta])

    @classmethod
    def from_array(cls, values: Iterable[float]) -> "TransformParams":
        v = [float(x) for x in values]
        if len(v) != 6:
            raise InvalidParameterError(f"expected 6 transform parameters, got {len(v)}")
        return cls(*v)

    def __add__(self, delta) -> "TransformParams":
        if isinstance(delta, TransformParams):
            delta = delta.as_array()
        return TransformParams.from_array(self.as_array() + np.asarray(delta, dtype=float))

    def difference(self, other: "TransformParams") -> np.ndarray:
        """self − other with angle components wrapped into [-180, 180)."""
        d = self.as_array() - other.as_array()
        d[list(ANGLE_SLOTS)] = normalize_angle(d[list(ANGLE_SLOTS)])
        return d

    def replace(self, **changes) -> "TransformParams":
        values = {name: getattr(self, name) for name in ("t_x", "t_y", "t_z", "t_theta", "t_alpha", "t_beta")}
        values.update(changes)
        return TransformParams(**values)

    def to_list(self) -> list:
        return self.as_array().tolist()


def parse_params(text: str) -> TransformParams:
    """Parse 'tx,ty,tz,theta,alpha,beta' (mm, degrees)."""
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as e:
        raise InvalidParameterError(f"cannot parse parameters {text!r}") from e
    return TransformParams.from_array(values)


@dataclass(frozen=True, eq=False)
class RigidPose:
    rotation: np.ndarray
    translation: np.ndarray
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def apply(self, points) -> np.ndarray:
        """Map local points (…, 3) to world."""
        p = np.asarray(points, dtype=float)
        return (p - self.center) @ self.rotation.T + self.translation

    def inverse_apply(self, points) -> np.ndarray:
        """Map world points (…, 3) back to the object-local frame."""
        p = np.asarray(points, dtype=float)
        return (p - self.translation) @ self.rotation + self.center


def rotation_matrix(theta: float, alpha: float, beta: float) -> np.ndarray:
    # intrinsic Z-X-Y sequence gives R_z(theta)·R_x(alpha)·R_y(beta)
    return Rotation.from_euler("ZXY", [theta, alpha, beta], degrees=True).as_matrix()


def pose_from_params(t: TransformParams, center: Sequence[float] = (0.0, 0.0, 0.0)) -> RigidPose:
    c = np.asarray(center, dtype=float)
    if c.shape != (3,) or not np.all(np.isfinite(c)):
        raise InvalidParameterError(f"invalid rotation center {center}")
    R = rotation_matrix(t.t_theta, t.t_alpha, t.t_beta)
    return RigidPose(rotation=R, translation=np.array([t.t_x, t.t_y, t.t_z]), center=c)
