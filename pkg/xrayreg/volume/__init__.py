# xrayreg/volume/__init__.py
from .volume import Volume, sample_trilinear
from .phantom import (
    Box,
    Sphere,
    Cylinder,
    PhantomSpec,
    make_phantom,
    plate_spec,
    cube_spec,
    spheres_spec,
    phantom_preset,
)
from .volume_io import load_volume, save_volume

__all__ = [
    "Volume",
    "sample_trilinear",
    "Box",
    "Sphere",
    "Cylinder",
    "PhantomSpec",
    "make_phantom",
    "plate_spec",
    "cube_spec",
    "spheres_spec",
    "phantom_preset",
    "load_volume",
    "save_volume",
]
