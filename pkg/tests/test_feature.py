# tests/test_feature.py
import numpy as np
import numpy.testing as npt
import pytest

from xrayreg.common.errors import InvalidParameterError, PoseError
from xrayreg.drr import Image, render_drr
from xrayreg.feature import (
    Patch,
    Roi,
    RoiSpec,
    compute_roi,
    default_roi_spec,
    extract_patch,
    feature_residual,
    patch_residual,
    patch_sample_points,
    roi_footprint,
    standardize_patch,
)
from xrayreg.geometry import GEOMETRY_PRESETS, TransformParams


def test_roi_law():
    geom = GEOMETRY_PRESETS["full"]
    spec = RoiSpec(w0=60.0, h0=30.0)
    t = TransformParams(4.0, -6.0, 437.0, 23.0, 1.0, 2.0)
    roi = compute_roi(t, geom, spec)
    assert roi.width_w * t.t_z / geom.D == pytest.approx(spec.w0, rel=1e-12)
    assert roi.height_h * t.t_z / geom.D == pytest.approx(spec.h0, rel=1e-12)
    npt.assert_allclose(roi.center_q, [geom.D * 4.0 / 437.0, geom.D * -6.0 / 437.0], rtol=1e-12)
    assert roi.orientation_phi == t.t_theta


def test_roi_rejects_bad_depth():
    with pytest.raises(PoseError):
        compute_roi(TransformParams(0, 0, -1.0), GEOMETRY_PRESETS["desk"], RoiSpec(10.0, 10.0))
    with pytest.raises(InvalidParameterError):
        RoiSpec(w0=0.0, h0=1.0)


def test_patch_grid_centers():
    geom = GEOMETRY_PRESETS["desk"]
    roi = compute_roi(TransformParams(0, 0, 500.0, 90.0), geom, RoiSpec(w0=4.0, h0=2.0, patch_rows=2, patch_cols=4))
    pts = patch_sample_points(roi, RoiSpec(w0=4.0, h0=2.0, patch_rows=2, patch_cols=4))
    assert pts.shape == (2, 4, 2)
    # w = 8 mm on the detector; cols sit at ±1, ±3 before the 90° turn
    npt.assert_allclose(pts[0, 0], [1.0, -3.0], atol=1e-12)
    npt.assert_allclose(pts.reshape(-1, 2).mean(axis=0), [0.0, 0.0], atol=1e-12)


def test_footprint_covers_roi_and_stays_on_detector(plate, ci_geom, small_roi):
    t = TransformParams(3.0, 1.0, 480.0, 30.0, 0.0, 0.0)
    roi = compute_roi(t, ci_geom, small_roi)
    fp = roi_footprint(roi, ci_geom)
    assert fp.within(ci_geom.det_width_px, ci_geom.det_height_px)
    drr = render_drr(plate, t, ci_geom, region=fp)
    full = render_drr(plate, t, ci_geom)
    npt.assert_array_equal(extract_patch(drr, roi, small_roi, ci_geom).values, extract_patch(full, roi, small_roi, ci_geom).values)


def test_out_of_field_flag(ci_geom):
    img = Image(values=np.ones((96, 96)), pixel_spacing=ci_geom.pixel_spacing)
    spec = RoiSpec(w0=60.0, h0=40.0, patch_rows=8, patch_cols=8)
    inside = extract_patch(img, compute_roi(TransformParams(0, 0, 500.0), ci_geom, spec), spec, ci_geom)
    assert not inside.out_of_field
    outside = extract_patch(img, compute_roi(TransformParams(50.0, 0, 500.0), ci_geom, spec), spec, ci_geom)
    assert outside.out_of_field
    assert outside.values.min() == 0.0


def test_standardize():
    p = standardize_patch(Patch(values=np.arange(12.0).reshape(3, 4)))
    assert p.values.mean() == pytest.approx(0.0, abs=1e-12)
    assert p.values.std() == pytest.approx(1.0)
    flat = standardize_patch(Patch(values=np.full((3, 4), 7.0)))
    assert not flat.values.any()


def test_feature_vanishes_at_matching_pose(plate, ci_geom, small_roi):
    t = TransformParams(2.0, -1.0, 510.0, 12.0, 5.0, -4.0)
    xray = render_drr(plate, t, ci_geom, provenance="synthetic-xray")
    feature = feature_residual(t, xray, plate, ci_geom, small_roi)
    assert feature.shape == small_roi.patch_shape
    assert np.abs(feature.values).max() <= 1e-6
    assert feature.roi.orientation_phi == t.t_theta


def test_feature_responds_to_offset(plate, ci_geom, small_roi):
    t = TransformParams(0.0, 0.0, 500.0)
    xray = render_drr(plate, t + [1.5, 0, 0, 0, 0, 0], ci_geom)
    feature = feature_residual(t, xray, plate, ci_geom, small_roi)
    assert np.abs(feature.values).max() > 0.1


def test_default_roi_spec_scales_extent(plate):
    spec = default_roi_spec(plate, margin=1.0)
    # base plate spans 56 mm in x; the tab pushes y to 30 mm
    assert spec.w0 == pytest.approx(56.0)
    assert spec.h0 == pytest.approx(30.0)


def _image(values, geom):
    return Image(values=values, pixel_spacing=geom.pixel_spacing)


def test_unrotated_patch_on_pixel_grid_is_a_crop(odd_geom, rng):
    img = _image(rng.normal(size=(65, 65)), odd_geom)
    spec = RoiSpec(w0=8.0, h0=6.0, patch_rows=6, patch_cols=8)
    # 1 mm samples centered 0.5 mm off the principal point land on pixel centers
    roi = Roi(center_q=(0.5, 0.5), width_w=8.0, height_h=6.0, orientation_phi=0.0)
    patch = extract_patch(img, roi, spec, odd_geom)
    npt.assert_allclose(patch.values, img.values[30:36, 29:37], atol=1e-12)
    assert not patch.out_of_field


def test_half_turn_reverses_the_patch(odd_geom, rng):
    img = _image(rng.normal(size=(65, 65)), odd_geom)
    spec = RoiSpec(w0=20.0, h0=12.0, patch_rows=9, patch_cols=15)
    center = rng.uniform(-5, 5, size=2)
    upright = extract_patch(img, Roi(center, 20.0, 12.0, 0.0), spec, odd_geom)
    turned = extract_patch(img, Roi(center, 20.0, 12.0, 180.0), spec, odd_geom)
    npt.assert_allclose(turned.values, upright.values[::-1, ::-1], atol=1e-6)


def test_patch_samples_a_ramp_exactly(odd_geom, rng):
    cols, rows = np.meshgrid(np.arange(65.0), np.arange(65.0))
    a, b, c = 0.3, -0.7, 40.0
    img = _image(a * cols + b * rows + c, odd_geom)
    spec = RoiSpec(w0=10.0, h0=10.0, patch_rows=11, patch_cols=17)
    cx, cy = odd_geom.principal_point
    for _ in range(5):
        roi = Roi(rng.uniform(-8, 8, size=2), rng.uniform(5, 20), rng.uniform(5, 20), rng.uniform(-180, 180))
        uv = patch_sample_points(roi, spec)
        expected = a * (uv[..., 0] / odd_geom.pixel_spacing + cx) + b * (uv[..., 1] / odd_geom.pixel_spacing + cy) + c
        npt.assert_allclose(extract_patch(img, roi, spec, odd_geom).values, expected, atol=1e-6)


def test_standardize_ignores_affine_exposure(rng):
    p = Patch(values=rng.normal(size=(6, 10)))
    base = standardize_patch(p).values
    for scale, offset in ((2.5, -3.0), (0.01, 100.0), (7.0, 0.0)):
        npt.assert_allclose(standardize_patch(Patch(values=scale * p.values + offset)).values, base, atol=1e-6)
    assert base.mean() == pytest.approx(0.0, abs=1e-6)
    assert base.std() == pytest.approx(1.0, abs=1e-6)


def test_feature_matches_full_frame_reference_and_is_antisymmetric(plate, ci_geom, small_roi):
    t = TransformParams(1.0, -2.0, 500.0, 8.0, -3.0, 4.0)
    xray = render_drr(plate, t + [1.0, 0, 0, 0, 0, 0], ci_geom, provenance="synthetic-xray")
    feature = feature_residual(t, xray, plate, ci_geom, small_roi)
    roi = compute_roi(t, ci_geom, small_roi)
    drr = standardize_patch(extract_patch(render_drr(plate, t, ci_geom), roi, small_roi, ci_geom))
    fixed = standardize_patch(extract_patch(xray, roi, small_roi, ci_geom))
    npt.assert_allclose(feature.values, patch_residual(drr, fixed), atol=1e-6)
    npt.assert_array_equal(patch_residual(fixed, drr), -patch_residual(drr, fixed))
    assert np.abs(feature.values).max() > 0.01
