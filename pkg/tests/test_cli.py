import csv
import json

import pytest

from proxsim.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from proxsim.config import RunConfig, load_config
from proxsim._serde import ConfigError

SMALL = {"forest": {"n_trees": 8}, "sigma_grid": [0.0, 1.0]}


@pytest.fixture(scope="module")
def run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps(SMALL))
    common = ["--config", str(cfg), "--scenarios-per-cell", "3"]
    data = root / "data"
    assert main(["generate", "--out", str(data), *common]) == EXIT_OK
    return root, data, common


def test_generate_summary(run, capsys):
    root, data, common = run
    out = root / "again"
    assert main(["generate", "--out", str(out), *common]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_scenarios"] == 27
    assert summary["total_rows"] == 27 * 864
    assert len(summary["rows_per_cell"]) == 9
    assert (out / "manifest.json").read_bytes() == (data / "manifest.json").read_bytes()


def test_features_then_train_eval_and_report(run, capsys):
    root, data, common = run
    out = root / "results"
    assert main(["features", "--data", str(data), "--view", "rf", "--out", str(data), *common]) == EXIT_OK
    assert (data / "features_rf.csv").exists()
    for view in ("rf", "kin", "fused"):
        assert main(["train-eval", "--data", str(data), "--view", view, "--out", str(out), *common]) == EXIT_OK
        for name in (f"metrics_{view}.json", f"confusion_{view}.csv", f"roc_{view}.csv", f"model_{view}.npz"):
            assert (out / name).exists()
    capsys.readouterr()
    assert main(["report", "--out", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "FUSED" in text and "macro_f1" in text
    rows = list(csv.DictReader((out / "ablation_table.csv").open()))
    assert [r["model"] for r in rows] == ["RF", "KIN", "FUSED"]
    metrics = json.loads((out / "metrics_fused.json").read_text())
    assert metrics["n_features"] == 14 + 35 + 3


def test_noise_sweep(run, capsys):
    root, _, common = run
    out = root / "sweep"
    assert main(["noise-sweep", "--out", str(out), "--sigma-grid", "0,2", *common]) == EXIT_OK
    rows = list(csv.DictReader((out / "noise_sweep.csv").open()))
    assert [float(r["sigma"]) for r in rows] == [0.0, 2.0]
    assert rows[0]["inv_sigma_sq"] == "inf"
    assert all(0 <= float(r["f1"]) <= 1 for r in rows)
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_usage_errors_exit_1(tmp_path, capsys):
    for argv in ([], ["bogus"], ["generate", "--seed", "-1"], ["noise-sweep", "--sigma-grid", "a,b"],
                 ["noise-sweep", "--sigma-grid", "-1"], ["train-eval"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_CONFIG
    assert main(["generate", "--scenarios-per-cell", "0", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_config_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"forest": {"n_tress": 3}}))
    assert main(["generate", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    bad.write_text("{not json")
    assert main(["generate", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    bad.write_text(json.dumps({"test_fraction": 1.5}))
    assert main(["report", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_io_errors_exit_2(tmp_path):
    assert main(["report", "--out", str(tmp_path)]) == EXIT_IO
    assert main(["train-eval", "--data", str(tmp_path / "missing"), "--out", str(tmp_path)]) == EXIT_IO
    assert main(["generate", "--config", str(tmp_path / "nope.json")]) == EXIT_IO


def test_config_round_trip(tmp_path):
    cfg = RunConfig().with_overrides(seed=7, scenarios_per_cell=5, sigma_grid=[0, 1])
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    back = load_config(path)
    assert back == cfg and back.hash == cfg.hash
    assert back.hash != RunConfig().hash
    with pytest.raises(ConfigError):
        RunConfig(sigma_grid=())
