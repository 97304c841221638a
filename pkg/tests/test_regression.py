# tests/test_regression.py
import numpy as np
import pytest

from xrayreg.common.errors import CoverageError, FormatError
from xrayreg.common.fileio import read_json, write_json
from xrayreg.drr import render_drr
from xrayreg.geometry import TransformParams, normalize_angle
from xrayreg.nn import TrainConfig, flatten_params
from xrayreg.regression import (
    GROUP_MEMBERS,
    GroupSpec,
    RegressorBank,
    ZoneGrid,
    default_group_specs,
    load_dataset,
    regress_multipass,
    regress_once,
    sample_rng,
    synthesize_dataset,
    synthesize_sample,
    train_bank,
    zone_of,
)
from xrayreg.regression.synthesis import draw_delta

TINY_TRAIN = TrainConfig(batch_size=4, epochs=2, seed=0)


@pytest.fixture(scope="module")
def bank(plate, ci_geom, small_roi):
    grid = ZoneGrid.desk()
    return train_bank(plate, ci_geom, small_roi, grid, [(0, 0)], [1, 2, 3], TINY_TRAIN, n_samples=8, seed=3)


@pytest.mark.parametrize(
    "alpha, beta, zone",
    [(0.0, 0.0, (9, 9)), (-180.0, -180.0, (0, 0)), (19.999, -0.001, (9, 8)), (25.0, 0.0, (10, 9)), (179.9, 179.9, (17, 17))],
)
def test_zone_of_default_grid(alpha, beta, zone):
    assert zone_of(alpha, beta, ZoneGrid()) == zone


def test_zone_of_clamps():
    grid = ZoneGrid.desk()
    assert grid.bounds((0, 0)) == ((-10.0, 10.0), (-10.0, 10.0))
    assert zone_of(50.0, -170.0, grid) == (0, 0)
    assert zone_of(-3.0, 4.0, ZoneGrid.from_span(2, 2, 10.0, 10.0)) == (0, 1)


def test_group_layout():
    specs = default_group_specs()
    assert [specs[g].n_out for g in (1, 2, 3)] == [3, 2, 1]
    assert GROUP_MEMBERS == {1: (0, 1, 3), 2: (4, 5), 3: (2,)}
    assert specs[1].half_ranges == (3.0, 3.0, 30.0, 6.0, 30.0, 30.0)
    assert specs[2].half_ranges == (0.4, 0.4, 30.0, 1.0, 30.0, 30.0)
    assert specs[3].half_ranges == (0.4, 0.4, 30.0, 1.0, 1.5, 1.5)
    assert GroupSpec.from_dict(specs[2].to_dict()) == specs[2]


def test_group_one_delta_distribution():
    rng = np.random.default_rng(0)
    spec = default_group_specs()[1]
    draws = np.array([draw_delta(rng, spec) for _ in range(10000)])
    assert abs(draws[:, 0].mean()) < 0.1
    assert draws[:, 0].min() >= -3.0 and draws[:, 0].max() <= 3.0
    assert draws[:, 2].max() <= 30.0


def test_zero_delta_sample(plate, ci_geom, small_roi):
    spec = default_group_specs()[1]
    feature, label = synthesize_sample(
        plate, ci_geom, small_roi, ZoneGrid.desk(), (0, 0), spec, sample_rng(1, (0, 0), 1, 0), delta=np.zeros(6)
    )
    assert not label.any()
    assert np.abs(feature.values).max() <= 1e-6
    assert -10.0 <= feature.t.t_alpha < 10.0


def test_sample_is_reproducible(plate, ci_geom, small_roi):
    spec = default_group_specs()[2]
    a_feat, a_label = synthesize_sample(plate, ci_geom, small_roi, ZoneGrid.desk(), (0, 0), spec, sample_rng(5, (0, 0), 2, 3))
    b_feat, b_label = synthesize_sample(plate, ci_geom, small_roi, ZoneGrid.desk(), (0, 0), spec, sample_rng(5, (0, 0), 2, 3))
    assert np.array_equal(a_feat.values, b_feat.values)
    assert np.array_equal(a_label, b_label)
    assert a_label.shape == (2,)


def test_dataset_threads_and_files(tmp_path, plate, ci_geom, small_roi):
    spec = default_group_specs()[3]
    grid = ZoneGrid.desk()
    one = synthesize_dataset(plate, ci_geom, small_roi, grid, (0, 0), spec, 10, 7, out_dir=tmp_path / "t1", threads=1)
    eight = synthesize_dataset(plate, ci_geom, small_roi, grid, (0, 0), spec, 10, 7, out_dir=tmp_path / "t8", threads=8)
    for name in ("features.f32", "labels.f64", "manifest.json"):
        assert (tmp_path / "t1" / name).read_bytes() == (tmp_path / "t8" / name).read_bytes()
    back = load_dataset(tmp_path / "t1")
    assert back.features.shape == (10, 24, 40)
    assert back.labels.shape == (10, 1)
    assert back.manifest["label_half_ranges"] == [30.0]
    assert back.manifest["n"] == 10
    assert np.array_equal(back.labels, one.labels)


def test_dataset_count_mismatch(tmp_path, plate, ci_geom, small_roi):
    synthesize_dataset(plate, ci_geom, small_roi, ZoneGrid.desk(), (0, 0), default_group_specs()[1], 3, 0, out_dir=tmp_path)
    manifest = tmp_path / "manifest.json"
    manifest.write_text(manifest.read_text().replace('"n": 3', '"n": 4'))
    with pytest.raises(FormatError):
        load_dataset(tmp_path)


def test_bank_has_one_model_per_group(bank):
    assert sorted(bank.models) == [((0, 0), 1), ((0, 0), 2), ((0, 0), 3)]
    assert [bank.get((0, 0), g).net.spec.n_out for g in (1, 2, 3)] == [3, 2, 1]
    with pytest.raises(CoverageError) as err:
        bank.get((1, 0), 1)
    assert err.value.zone == (1, 0)


def test_bank_roundtrip(tmp_path, bank, rng):
    bank.save(tmp_path / "bank")
    assert (tmp_path / "bank" / "zone_0_0_group_2.f64").exists()
    back = RegressorBank.load(tmp_path / "bank")
    assert back.grid == bank.grid
    assert back.roi_spec == bank.roi_spec
    x = rng.normal(size=(24, 40))
    for g in (1, 2, 3):
        assert np.array_equal(back.get((0, 0), g).predict(x), bank.get((0, 0), g).predict(x))


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda m: m.pop("architecture"), "models[0].architecture"),
        (lambda m: m.update(architecture={"rows": 24, "colums": 40}), "models[0]"),
        (lambda m: m.pop("weights_file"), "models[0].weights_file"),
        (lambda m: m.update(zone=[0]), "models[0].zone"),
        (lambda m: m.update(label_half_ranges=[1.0]), "models[0].label_half_ranges"),
    ],
)
def test_bank_load_names_broken_model_field(tmp_path, bank, mutate, field):
    out = bank.save(tmp_path / "bank")
    doc = read_json(out / "manifest.json")
    mutate(doc["models"][0])
    write_json(out / "manifest.json", doc)
    with pytest.raises(FormatError) as err:
        RegressorBank.load(out)
    assert err.value.field == field


def test_bank_load_truncated_weights(tmp_path, bank):
    out = bank.save(tmp_path / "bank")
    blob = out / "zone_0_0_group_1.f64"
    blob.write_bytes(blob.read_bytes()[:-8])
    with pytest.raises(FormatError) as err:
        RegressorBank.load(out)
    assert err.value.field.endswith(".weights_file")


def test_retraining_is_bit_identical(bank, plate, ci_geom, small_roi):
    again = train_bank(plate, ci_geom, small_roi, ZoneGrid.desk(), [(0, 0)], [1, 2, 3], TINY_TRAIN, n_samples=8, seed=3, threads=2)
    for key, model in bank.models.items():
        assert np.array_equal(flatten_params(model.net), flatten_params(again.models[key].net))
        assert model.meta["loss_trace"] == again.models[key].meta["loss_trace"]


def test_regression_hierarchy(bank, plate, ci_geom):
    t_gt = TransformParams(0.0, 0.0, 500.0, 5.0, 2.0, -3.0)
    xray = render_drr(plate, t_gt, ci_geom, provenance="synthetic-xray")
    t_init = t_gt + [1.0, 0.0, 5.0, 1.0, 2.0, 1.0]
    steps = []
    t_est = regress_once(bank, plate, xray, t_init, steps=steps)
    assert [s.group for s in steps] == [1, 2, 3]
    # group 2 sees the pose already corrected by group 1
    expected_phi = float(normalize_angle(steps[0].t_before.t_theta + steps[0].delta[2]))
    assert steps[1].roi.orientation_phi == pytest.approx(expected_phi, abs=1e-9)
    assert steps[1].t_before.t_x == pytest.approx(t_init.t_x + steps[0].delta[0])
    assert t_est.t_z == pytest.approx(t_init.t_z + steps[2].delta[0])


def test_multipass_bookkeeping(bank, plate, ci_geom):
    t_gt = TransformParams(0.0, 0.0, 500.0)
    xray = render_drr(plate, t_gt, ci_geom)
    t_init = t_gt + [0.5, -0.5, 3.0, 1.0, 1.0, -1.0]
    single = regress_multipass(bank, plate, xray, t_init, passes=1)
    assert single.t_est == regress_once(bank, plate, xray, t_init)
    triple = regress_multipass(bank, plate, xray, t_init, passes=3)
    assert len(triple.trajectory) == 3
    assert triple.trajectory[0] == single.t_est
    assert triple.n_drr_evals == 9
    assert [s.pass_index for s in triple.steps] == [0, 0, 0, 1, 1, 1, 2, 2, 2]


def test_missing_zone_is_a_coverage_error(bank, plate, ci_geom):
    xray = render_drr(plate, TransformParams(0, 0, 500.0), ci_geom)
    partial = RegressorBank(bank.grid, bank.roi_spec, bank.geometry, bank.groups, {k: v for k, v in bank.models.items() if k[1] != 3})
    with pytest.raises(CoverageError):
        regress_once(partial, plate, xray, TransformParams(0, 0, 500.0))
