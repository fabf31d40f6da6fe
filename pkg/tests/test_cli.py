import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from eegemotion.cli import build_parser, main
from eegemotion.config import ConfigError, ExperimentConfig
from eegemotion.evaluation import (ConfusionMatrix, RunReport, ScoreSet, TrialResult,
                                   write_report)

SMALL_MODEL = {"conv_filters": [2, 2], "lstm_units": [4, 4], "dense_units": 4}


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def small_config(tmp_path):
    cfg = {"geometry": {"name": "small", "channels": 4, "samples": 300, "fs": 100.0},
           "classes": 3, "per_class": 4, "snr_db": 0.0, "model": SMALL_MODEL,
           "train": {"max_epochs": 1, "patience": 1, "batch_size": 32},
           "folds": {"k": 2, "repeats": 1}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_help_documents_flags(capsys):
    parser = build_parser()
    for cmd in ("synth", "featurize", "run", "compare", "gradcheck"):
        with pytest.raises(SystemExit) as exc:
            parser.parse_args([cmd, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for flag in ("--config", "--seed", "--out", "--threads"):
            assert flag in out


def test_unknown_flag_is_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--seed", "1", "--nonsense"])
    assert exc.value.code == 2


def test_synth_requires_seed(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path / "x")]) == 2
    assert "seed" in capsys.readouterr().err


def test_synth_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        assert main(["synth", "--geometry", "dens", "--classes", "3", "--per-class", "1",
                     "--seed", "7", "--out", str(tmp_path / name)]) == 0
    out = capsys.readouterr().out
    assert "3 epochs, 128 ch x 1751 samples @ 250 Hz" in out
    for f in ("manifest.json", "data.f32le"):
        assert _digest(tmp_path / "a" / f) == _digest(tmp_path / "b" / f)
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 7


def test_synth_deap_geometry(tmp_path, capsys):
    assert main(["synth", "--geometry", "deap", "--classes", "4", "--per-class", "1",
                 "--seed", "1", "--out", str(tmp_path / "d")]) == 0
    m = json.loads((tmp_path / "d" / "manifest.json").read_text())
    assert (m["n_channels"], m["n_samples"], m["fs_hz"]) == (32, 8064, 128.0)


def test_featurize_summary(tmp_path, capsys):
    main(["synth", "--geometry", "dens", "--per-class", "1", "--seed", "7",
          "--out", str(tmp_path / "es")])
    capsys.readouterr()
    assert main(["featurize", str(tmp_path / "es"), "--out", str(tmp_path / "f")]) == 0
    assert capsys.readouterr().out.strip() == "384 instances of 63×26×3"
    X = np.load(tmp_path / "f" / "features.npy")
    assert X.shape == (384, 63, 26)
    summary = json.loads((tmp_path / "f" / "features.json").read_text())
    assert summary["instances"] == 384 and "config" in summary


def test_featurize_truncates_seed_geometry(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"geometry": {"name": "seed", "channels": 2, "samples": 16500,
                                            "fs": 200.0}}))
    main(["synth", "--config", str(cfg), "--per-class", "1", "--seed", "1",
          "--out", str(tmp_path / "s")])
    capsys.readouterr()
    assert main(["featurize", str(tmp_path / "s"), "--out", str(tmp_path / "f")]) == 0
    assert capsys.readouterr().out.strip().endswith("of 51×319×3")


def test_run_missing_epochset(tmp_path, capsys):
    code = main(["run", str(tmp_path / "missing"), "--seed", "1", "--out", str(tmp_path / "r")])
    assert code == 3
    assert "not found" in capsys.readouterr().err


def test_bad_config_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"seed": 1, "colour": "blue"}))
    assert main(["synth", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert main(["synth", "--config", str(tmp_path / "none.json")]) == 2


def test_flags_override_config(small_config):
    cfg = ExperimentConfig.load(small_config).override(seed=3, folds={"k": 4, "repeats": None})
    assert cfg.seed == 3
    assert cfg.folds == {"k": 4, "repeats": 1}
    assert cfg.resolve_model().conv_filters == (2, 2)
    with pytest.raises(ConfigError):
        cfg.override(nonsense=1)


def test_patience_follows_short_max_epochs():
    cfg = ExperimentConfig(seed=1, train={"max_epochs": 2})
    assert cfg.resolve_train().patience == 2


def test_run_end_to_end_and_rerun_identical(tmp_path, small_config, capsys):
    es = tmp_path / "es"
    assert main(["synth", "--config", str(small_config), "--seed", "7", "--out", str(es)]) == 0
    for name in ("r1", "r2"):
        assert main(["run", str(es), "--config", str(small_config), "--seed", "11",
                     "--out", str(tmp_path / name)]) == 0
    a, b = tmp_path / "r1" / "scores.csv", tmp_path / "r2" / "scores.csv"
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().strip().split("\n")) == 1 + 2
    report = json.loads((tmp_path / "r1" / "report.json").read_text())
    assert report["config"]["seed"] == 11 and report["config"]["model"] == SMALL_MODEL


def _injected(path, scores):
    trials = [TrialResult(i, i // 5, i % 5, i, 100, 25, ConfusionMatrix(np.eye(3, dtype=int) * 8),
                          float(s), 90.0, 90.0, 0.9, 1, 1) for i, s in enumerate(scores)]
    write_report(RunReport(trials, 3, 0, 5, len(scores) // 5), path)


def test_compare_injected_scores(tmp_path, capsys):
    _injected(tmp_path / "a", ScoreSet.with_summary(95.65, 0.38).scores)
    _injected(tmp_path / "b", ScoreSet.with_summary(96.82, 0.18, seed=1).scores)
    assert main(["compare", str(tmp_path / "a"), str(tmp_path / "b"),
                 "--out", str(tmp_path / "cmp")]) == 0
    res = json.loads((tmp_path / "cmp" / "comparison.json").read_text())["ttest"]
    assert 13.5 <= abs(res["t"]) <= 14.0
    assert (tmp_path / "cmp" / "series.csv").read_text().count("\n") == 51


def test_compare_self(tmp_path, capsys):
    _injected(tmp_path / "a", np.linspace(80, 90, 25))
    assert main(["compare", str(tmp_path / "a"), str(tmp_path / "a" / "report.json")]) == 0
    out = capsys.readouterr().out
    assert "= 0.00, p = 1.0000" in out


def test_compare_mismatched_trials(tmp_path, capsys):
    _injected(tmp_path / "a", np.linspace(80, 90, 25))
    _injected(tmp_path / "b", np.linspace(80, 90, 20))
    assert main(["compare", str(tmp_path / "a"), str(tmp_path / "b")]) == 3


def test_compare_malformed(tmp_path, capsys):
    (tmp_path / "a").mkdir()
    (tmp_path / "a" / "report.json").write_text("[]")
    _injected(tmp_path / "b", np.linspace(80, 90, 25))
    assert main(["compare", str(tmp_path / "a"), str(tmp_path / "b")]) == 3


def test_gradcheck_lists_each_kind_once(capsys):
    assert main(["gradcheck"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if "max_rel_err" in l]
    kinds = [l.split()[0] for l in lines]
    assert len(kinds) == len(set(kinds)) == 9
    assert all("PASS" in l for l in lines)


def test_gradcheck_fault_hook(capsys):
    assert main(["gradcheck", "--fault", "Conv2D"]) == 4
    out = capsys.readouterr().out
    assert "FAIL: Conv2D" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "eegemotion.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "synth" in proc.stdout and "gradcheck" in proc.stdout
