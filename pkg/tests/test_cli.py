# tests/test_cli.py
import orjson
import pytest

from xrayreg.cli import main
from xrayreg.cli.main import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE


def _json(path):
    return orjson.loads(path.read_bytes())


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["phantom", "--preset", "plate", "--out", str(root / "plate.vol.json"), "--log-level", "WARNING"]) == EXIT_OK
    return root


def test_phantom_writes_volume_and_config(workspace):
    assert (workspace / "plate.vol.json").exists()
    assert (workspace / "plate.raw").exists()
    doc = _json(workspace / "effective_config.json")
    assert doc["command"] == "phantom"
    assert doc["options"]["phantom"]


def test_drr_does_not_depend_on_threads(workspace):
    vol = str(workspace / "plate.vol.json")
    for threads in ("1", "3"):
        out = workspace / f"drr{threads}" / "d.img.json"
        code = main(["drr", "--volume", vol, "--params", "0,0,500,5,3,-2", "--geom-preset", "ci", "--threads", threads, "--out", str(out), "--pgm"])
        assert code == EXIT_OK
    assert (workspace / "drr1" / "d.raw").read_bytes() == (workspace / "drr3" / "d.raw").read_bytes()
    assert (workspace / "drr1" / "d.pgm").read_bytes().startswith(b"P5\n96 96\n255\n")
    assert _json(workspace / "drr1" / "effective_config.json")["geometry"]["D_mm"] == 1000.0


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate", "--out", "x"],
        ["phantom", "--out", "x", "--colour", "red"],
        ["drr", "--volume", "v.json", "--params", "1,2", "--out", "x"],
        ["train", "--volume", "v.json", "--zone-grid", "3by3", "--out", "x"],
        [],
    ],
)
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_invalid_thread_count(workspace):
    code = main(["phantom", "--threads", "0", "--out", str(workspace / "t0" / "p.vol.json")])
    assert code == EXIT_USAGE


def test_missing_input_is_a_runtime_error(workspace):
    code = main(["drr", "--volume", str(workspace / "nope.vol.json"), "--params", "0,0,500,0,0,0", "--out", str(workspace / "x.img.json")])
    assert code == EXIT_RUNTIME


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "register" in capsys.readouterr().out


def test_cnn_without_bank_is_a_usage_error(workspace):
    code = main(["evaluate", "--volume", str(workspace / "plate.vol.json"), "--method", "cnn", "--out", str(workspace / "ev")])
    assert code == EXIT_USAGE


@pytest.fixture(scope="module")
def trained(workspace):
    vol = str(workspace / "plate.vol.json")
    bank = workspace / "bank"
    train = [
        "train", "--volume", vol, "--geom-preset", "ci", "--patch", "24x40", "--n-samples", "4",
        "--epochs", "1", "--batch-size", "4", "--seed", "5", "--out", str(bank), "--dataset", str(workspace / "data"),
    ]
    assert main(train) == EXIT_OK
    xray = workspace / "xray" / "x.img.json"
    assert main(["drr", "--volume", vol, "--params", "0,0,500,0,0,0", "--geom-preset", "ci", "--out", str(xray)]) == EXIT_OK
    return bank, xray


def _register(workspace, bank, xray, passes, out):
    return main([
        "register", "--bank", str(bank), "--volume", str(workspace / "plate.vol.json"), "--xray", str(xray),
        "--init", "0.5,0,505,1,2,1", "--passes", str(passes), "--out", str(out),
    ])


def test_train_writes_bank_and_datasets(workspace, trained):
    bank, _ = trained
    assert (bank / "manifest.json").exists()
    assert (workspace / "data" / "zone_0_0_group_3" / "manifest.json").exists()
    assert set(_json(bank / "effective_config.json")["options"]["final_loss"]) == {
        "zone_0_0_group_1", "zone_0_0_group_2", "zone_0_0_group_3",
    }


def test_register_passes(workspace, trained):
    bank, xray = trained
    results = {}
    for passes in (1, 3):
        out = workspace / f"reg{passes}"
        assert _register(workspace, bank, xray, passes, out) == EXIT_OK
        results[passes] = _json(out / "result.json")
    assert len(results[1]["trajectory"]) == 1
    assert len(results[3]["trajectory"]) == 3
    assert results[3]["trajectory"][0] == results[1]["t_est"]
    assert results[3]["n_drr_evals"] == 9
    assert len(results[3]["steps"]) == 9
    assert results[3]["zone"] == [0, 0]


def test_register_with_damaged_bank(workspace, trained, tmp_path):
    bank, xray = trained
    broken = tmp_path / "bank"
    broken.mkdir()
    for f in bank.iterdir():
        if f.name != "zone_0_0_group_2.f64":
            (broken / f.name).write_bytes(f.read_bytes())
    assert _register(workspace, broken, xray, 1, tmp_path / "reg") == EXIT_RUNTIME
    assert _register(workspace, bank, xray, 0, tmp_path / "reg0") == EXIT_RUNTIME


def test_evaluate_renders_with_the_bank_step(workspace, trained, tmp_path):
    bank, _ = trained
    stepped = tmp_path / "bank"
    stepped.mkdir()
    for f in bank.iterdir():
        (stepped / f.name).write_bytes(f.read_bytes())
    manifest = _json(stepped / "manifest.json")
    manifest["step_mm"] = 2.0
    (stepped / "manifest.json").write_bytes(orjson.dumps(manifest))
    base = [
        "evaluate", "--volume", str(workspace / "plate.vol.json"), "--bank", str(stepped), "--method", "cnn",
        "--n-perturb", "1", "--passes", "1",
    ]
    assert main(base + ["--out", str(tmp_path / "ev")]) == EXIT_OK
    assert _json(tmp_path / "ev" / "effective_config.json")["options"]["step_mm"] == 2.0
    assert main(base + ["--step", "1.0", "--out", str(tmp_path / "ev_override")]) == EXIT_OK
    assert _json(tmp_path / "ev_override" / "effective_config.json")["options"]["step_mm"] == 1.0
