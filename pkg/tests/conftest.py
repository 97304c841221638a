# tests/conftest.py
import numpy as np
import pytest

from xrayreg.feature import RoiSpec, default_roi_spec
from xrayreg.geometry import GEOMETRY_PRESETS, ProjectionGeometry, TransformParams
from xrayreg.nn import NetworkSpec
from xrayreg.volume import cube_spec, make_phantom, plate_spec


@pytest.fixture(scope="session")
def cube():
    """Uniform 20 mm cube, mu = 0.02/mm, 1 mm voxels."""
    return make_phantom(cube_spec(side=20.0, mu=0.02))


@pytest.fixture(scope="session")
def plate():
    return make_phantom(plate_spec())


@pytest.fixture(scope="session")
def ci_geom() -> ProjectionGeometry:
    return GEOMETRY_PRESETS["ci"]


@pytest.fixture(scope="session")
def odd_geom() -> ProjectionGeometry:
    """Odd pixel count so one pixel center sits exactly on the principal point."""
    return ProjectionGeometry(D=1000.0, det_width_px=65, det_height_px=65, pixel_spacing=1.0)


@pytest.fixture(scope="session")
def small_roi(plate) -> RoiSpec:
    return default_roi_spec(plate, patch_rows=24, patch_cols=40)


@pytest.fixture
def t_nominal() -> TransformParams:
    return TransformParams(0.0, 0.0, 500.0, 0.0, 0.0, 0.0)


@pytest.fixture
def tiny_spec() -> NetworkSpec:
    """12x12 input, 3x3 kernels: 12 -> 10 -> 5 -> 3 -> 1."""
    return NetworkSpec(input_rows=12, input_cols=12, c1=2, c2=2, kernel=3, hidden=8, n_out=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
