# xrayreg/volume/phantom.py
"""
Synthetic attenuation phantoms rasterized from boxes, spheres and cylinders.

Primitives are painted in order onto the voxel centers; a later primitive with
mu = 0 punches a hole into what was painted before.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from xrayreg.common.errors import EmptyObjectError, InvalidParameterError
from .volume import Volume

Vec3 = Tuple[float, float, float]
AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class Box:
    center: Vec3
    size: Vec3
    mu: float

    def contains(self, p: np.ndarray) -> np.ndarray:
        half = np.asarray(self.size) / 2.0
        return np.all(np.abs(p - np.asarray(self.center)) <= half, axis=-1)


@dataclass(frozen=True)
class Sphere:
    center: Vec3
    radius: float
    mu: float

    def contains(self, p: np.ndarray) -> np.ndarray:
        return np.sum((p - np.asarray(self.center)) ** 2, axis=-1) <= self.radius ** 2


@dataclass(frozen=True)
class Cylinder:
    center: Vec3
    radius: float
    length: float
    mu: float
    axis: str = "z"

    def contains(self, p: np.ndarray) -> np.ndarray:
        d = p - np.asarray(self.center)
        k = AXES[self.axis]
        radial = np.delete(d, k, axis=-1)
        return (np.sum(radial ** 2, axis=-1) <= self.radius ** 2) & (np.abs(d[..., k]) <= self.length / 2.0)


Primitive = Union[Box, Sphere, Cylinder]


@dataclass(frozen=True)
class PhantomSpec:
    dims: Tuple[int, int, int]
    spacing: Vec3
    primitives: Tuple[Primitive, ...] = field(default_factory=tuple)
    name: str = "custom"

    def origin(self) -> Vec3:
        # lattice centered on the local origin
        return tuple(-(n - 1) / 2.0 * s for n, s in zip(self.dims, self.spacing))

    def to_dict(self) -> Dict[str, Any]:
        prims = []
        for p in self.primitives:
            doc = {"kind": type(p).__name__.lower()}
            doc.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in p.__dict__.items()})
            prims.append(doc)
        return {"name": self.name, "dims": list(self.dims), "spacing_mm": list(self.spacing), "primitives": prims}


def rasterize_mask(primitive: Primitive, centers: np.ndarray) -> np.ndarray:
    return primitive.contains(centers)


def make_phantom(spec: PhantomSpec) -> Volume:
    if not spec.primitives:
        raise EmptyObjectError("phantom spec lists no primitives")
    for p in spec.primitives:
        if p.mu < 0:
            raise InvalidParameterError(f"negative attenuation in {p}")
    origin = spec.origin()
    axes = [origin[k] + np.arange(spec.dims[k]) * spec.spacing[k] for k in range(3)]
    zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    centers = np.stack([xx, yy, zz], axis=-1)
    data = np.zeros(spec.dims[::-1], dtype=np.float32)
    for prim in spec.primitives:
        data[rasterize_mask(prim, centers)] = prim.mu
    vol = Volume(dims=spec.dims, spacing=spec.spacing, origin=origin, data=data)
    vol.require_object()
    logger.debug("Phantom '{}' rasterized: {} occupied voxels", spec.name, int(np.count_nonzero(vol.data)))
    return vol


def plate_spec(spacing: float = 1.0, mu: float = 0.02) -> PhantomSpec:
    """Asymmetric plate with a ridge, a peg and three holes, so all six parameters show up in projection."""
    prims: List[Primitive] = [
        Box(center=(0.0, 0.0, 0.0), size=(56.0, 24.0, 4.0), mu=mu),
        # ridge along one short edge, thicker toward the detector
        Box(center=(-22.0, 0.0, 3.0), size=(8.0, 24.0, 6.0), mu=mu),
        # tab breaking the y symmetry
        Box(center=(14.0, 15.0, 0.0), size=(16.0, 6.0, 4.0), mu=mu),
        Cylinder(center=(18.0, -6.0, -6.0), radius=3.0, length=10.0, mu=mu * 1.5, axis="z"),
        Sphere(center=(6.0, 6.0, 3.0), radius=3.5, mu=mu),
        Cylinder(center=(-6.0, 5.0, 0.0), radius=3.0, length=6.0, mu=0.0, axis="z"),
        Cylinder(center=(4.0, -5.0, 0.0), radius=2.0, length=6.0, mu=0.0, axis="z"),
        Cylinder(center=(22.0, 6.0, 0.0), radius=2.5, length=6.0, mu=0.0, axis="z"),
    ]
    dims = tuple(int(np.ceil(e / spacing)) + 4 for e in (60.0, 40.0, 22.0))
    return PhantomSpec(dims=dims, spacing=(spacing,) * 3, primitives=tuple(prims), name="plate")


def cube_spec(side: float = 20.0, mu: float = 0.02, spacing: float = 1.0, margin: int = 4) -> PhantomSpec:
    n = int(round(side / spacing)) + 2 * margin
    return PhantomSpec(
        dims=(n, n, n),
        spacing=(spacing,) * 3,
        primitives=(Box(center=(0.0, 0.0, 0.0), size=(side,) * 3, mu=mu),),
        name="cube",
    )


def spheres_spec(offset: float = 10.0, radius: float = 5.0, mu: float = 0.02, spacing: float = 1.0) -> PhantomSpec:
    n = int(np.ceil((2 * (offset + radius)) / spacing)) + 5
    m = int(np.ceil(2 * radius / spacing)) + 5
    return PhantomSpec(
        dims=(n, m, m),
        spacing=(spacing,) * 3,
        primitives=(
            Sphere(center=(-offset, 0.0, 0.0), radius=radius, mu=mu),
            Sphere(center=(offset, 0.0, 0.0), radius=radius, mu=mu),
        ),
        name="spheres",
    )


PRESETS = {"plate": plate_spec, "cube": cube_spec, "spheres": spheres_spec}


def phantom_preset(name: str, **kwargs) -> PhantomSpec:
    if name not in PRESETS:
        raise InvalidParameterError(f"unknown phantom preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name](**kwargs)
