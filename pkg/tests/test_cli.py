import json

import pytest

from qconv.cli import default_run_config, main, validate_run_config, ConfigError


def _config(tmp_path, data_dir, **train):
    cfg = {"schema_version": 1, "seed": 3,
           "data": {"dir": str(data_dir), "prefix": "train", "classes": [0, 2],
                    "train_per_class": 8, "test_per_class": 4},
           "model": {"channels": 1, "num_classes": 2},
           "train": {"epochs": 1, "batch_size": 8, **train},
           "output": {"dir": str(tmp_path / "run")}}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_verify_unitarity_identity(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", "--suite", "unitarity", "--trials", "5", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] and report["schema_version"] == 1
    ident = [c for c in report["suites"][0]["cases"] if c["case"] == "identity bank"][0]
    assert ident["max_error"] == 0.0
    assert "PASS unitarity" in capsys.readouterr().out


def test_verify_is_deterministic(tmp_path):
    reports = []
    for name in ("a.json", "b.json"):
        assert main(["verify", "--suite", "theorem1", "--trials", "2", "--seed", "7",
                     "--max-qubits", "6", "--out", str(tmp_path / name)]) == 0
        doc = json.loads((tmp_path / name).read_text())
        for s in doc["suites"]:
            s.pop("seconds")
        reports.append(doc)
    assert reports[0] == reports[1]


def test_verify_theorem2_index_lists(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "composite", "--trials", "1", "--out", str(out)]) == 0
    cases = json.loads(out.read_text())["suites"][0]["cases"]
    lists = [c for c in cases if "index lists" in c["case"]][0]["details"]
    assert lists["j=1"] == list(range(0, 241, 16)) and lists["j=2"] == list(range(256, 497, 16))


def test_verify_bad_arguments():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "theorem9"])
    assert exc.value.code == 2
    assert main(["verify", "--suite", "theorem1", "--max-qubits", "13"]) == 2


def test_init_config_round_trips(tmp_path):
    out = tmp_path / "c.json"
    assert main(["init-config", "--out", str(out)]) == 0
    cfg = validate_run_config(json.loads(out.read_text()))
    assert cfg == validate_run_config(default_run_config())


@pytest.mark.parametrize("patch", [{"model": {"chanels": 4}}, {"schema_version": 2},
                                   {"train": {"epochs": -1}}, {"model": {"channels": 3}},
                                   {"data": {"classes": [0, 1, 2]}}])
def test_config_rejected(patch):
    cfg = default_run_config()
    for key, value in patch.items():
        cfg[key] = {**cfg[key], **value} if isinstance(value, dict) else value
    with pytest.raises(ConfigError):
        validate_run_config(cfg)


def test_train_eval_export(tmp_path, synthetic_idx):
    cfg_path = _config(tmp_path, synthetic_idx)
    assert main(["train", "--config", str(cfg_path)]) == 0
    run = tmp_path / "run"
    metrics = json.loads((run / "metrics.json").read_text())
    ckpt = json.loads((run / "checkpoint.json").read_text())
    assert metrics["seed"] == 3 and metrics["config"]["model"]["channels"] == 1
    assert len(metrics["metrics"]["epochs"]) == 1
    assert len(ckpt["params"]) == 40 and "split" in ckpt["sub_seeds"]

    assert main(["eval", "--checkpoint", str(run / "checkpoint.json")]) == 0
    ev = json.loads((run / "eval.json").read_text())
    assert ev["test"] == metrics["metrics"]["final_test"]

    assert main(["eval", "--checkpoint", str(run / "checkpoint.json"), "--seed", "4",
                 "--out", str(run / "eval4.json")]) == 0
    assert json.loads((run / "eval4.json").read_text())["seed"] == 4

    plots = tmp_path / "plots"
    assert main(["export-plots", str(run / "metrics.json"), "--out", str(plots)]) == 0
    lines = (plots / "metrics_categories.tsv").read_text().splitlines()
    assert len(lines) == 2 and lines[0].startswith("epoch\t")
    grid = [row.split("\t") for row in (plots / "metrics_confusion.tsv").read_text().splitlines()]
    assert len(grid) == 2 and all(len(r) == 2 and all(v.isdigit() for v in r) for r in grid)
    assert json.loads((plots / "export.json").read_text())["sources"][0]["seed"] == 3


def test_train_epochs_zero(tmp_path, synthetic_idx):
    cfg_path = _config(tmp_path, synthetic_idx, epochs=0)
    assert main(["train", "--config", str(cfg_path), "--out", str(tmp_path / "zero")]) == 0
    metrics = json.loads((tmp_path / "zero" / "metrics.json").read_text())
    assert metrics["metrics"]["epochs"] == []


def test_data_dir_from_env(tmp_path, synthetic_idx, monkeypatch):
    cfg_path = _config(tmp_path, "unused", epochs=0)
    raw = json.loads(cfg_path.read_text())
    raw["data"]["dir"] = None
    cfg_path.write_text(json.dumps(raw))
    monkeypatch.setenv("QCONV_DATA_DIR", str(synthetic_idx))
    assert main(["train", "--config", str(cfg_path)]) == 0


def test_missing_data_is_io_error(tmp_path):
    cfg_path = _config(tmp_path, tmp_path / "no-such-dir")
    assert main(["train", "--config", str(cfg_path)]) == 3


def test_missing_config_is_io_error(tmp_path):
    assert main(["train", "--config", str(tmp_path / "absent.json")]) == 3


def test_unknown_key_is_config_error(tmp_path, synthetic_idx):
    cfg_path = _config(tmp_path, synthetic_idx)
    raw = json.loads(cfg_path.read_text())
    raw["train"]["momentum"] = 0.9
    cfg_path.write_text(json.dumps(raw))
    assert main(["train", "--config", str(cfg_path)]) == 2


def test_corrupted_checkpoint(tmp_path, synthetic_idx):
    cfg_path = _config(tmp_path, synthetic_idx, epochs=0)
    assert main(["train", "--config", str(cfg_path)]) == 0
    ckpt_path = tmp_path / "run" / "checkpoint.json"
    text = ckpt_path.read_text()
    ckpt_path.write_text(text[: len(text) // 2])
    assert main(["eval", "--checkpoint", str(ckpt_path)]) == 2
    doc = json.loads(text)
    doc["params"] = doc["params"][:-1]
    ckpt_path.write_text(json.dumps(doc))
    assert main(["eval", "--checkpoint", str(ckpt_path)]) == 2
    doc["kind"] = "metrics"
    ckpt_path.write_text(json.dumps(doc))
    assert main(["eval", "--checkpoint", str(ckpt_path)]) == 2


def test_malformed_metrics_export(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text(json.dumps({"schema_version": 1, "kind": "metrics"}))
    assert main(["export-plots", str(bad), "--out", str(tmp_path / "p")]) == 2
