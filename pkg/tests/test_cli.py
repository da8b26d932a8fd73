import json

import pytest

from flagwalk.cli import main
from flagwalk.examples import list_examples


def _read(path):
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------- catalog


def test_list_examples_prints_catalog(capsys):
    assert main(["list-examples"]) == 0
    out = capsys.readouterr().out
    names = [ex.name for ex in list_examples()]
    assert len(names) >= 6
    for name in names:
        assert name in out


# ---------------------------------------------------------------- classify


def test_classify_example_writes_artifacts(tmp_path, capsys):
    code = main(["classify", "--example", "ex-reducible",
                 "--out", str(tmp_path)])
    assert code == 0
    report = _read(tmp_path / "report.json")
    assert report["label"] == "Case2_2"
    assert report["passed"] is True
    assert (tmp_path / "series.csv").exists()
    manifest = _read(tmp_path / "manifest.json")
    assert manifest["config"]["kind"] == "classify"
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["label"] == "Case2_2"


@pytest.mark.parametrize("name,label", [
    ("ex-principal-sl3", "Case2_3a"),
    ("ex-2.3.b", "Case2_3b"),       # alias for the obstructed example
    ("ex-case-1", "Case1"),
])
def test_classify_known_examples(tmp_path, name, label):
    assert main(["classify", "--example", name, "--out", str(tmp_path)]) == 0
    assert _read(tmp_path / "report.json")["label"] == label


def test_classify_explicit_geometry(tmp_path):
    cfg = {
        "kind": "classify",
        "flag": {"n": 3, "dims": [1]},
        "embedding": {"e": [[0, 1, 0], [0, 0, 1], [0, 0, 0]],
                      "x": [[2, 0, 0], [0, 0, 0], [0, 0, -2]],
                      "f": [[0, 0, 0], [2, 0, 0], [0, 2, 0]]},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["classify", "--config", str(path),
                 "--out", str(tmp_path)]) == 0
    assert _read(tmp_path / "report.json")["label"] == "Case2_3a"


# ---------------------------------------------------------------- errors


def test_unknown_config_key_named(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"kind": "classify", "bogus": 1}))
    assert main(["classify", "--config", str(path)]) == 1
    assert "bogus" in capsys.readouterr().err


def test_invalid_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    assert main(["classify", "--config", str(path)]) == 1
    assert "error" in capsys.readouterr().err


def test_kind_subcommand_mismatch(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"kind": "classify"}))
    assert main(["lyapunov", "--config", str(path)]) == 1
    assert "does not match" in capsys.readouterr().err


def test_unknown_example_is_config_error(tmp_path, capsys):
    assert main(["classify", "--example", "ex-nope",
                 "--out", str(tmp_path)]) == 1
    assert "ex-nope" in capsys.readouterr().err


# ---------------------------------------------------------------- exit code 2


def test_ldp_tolerance_failure_exits_two(tmp_path):
    # the tame default measure has unobservably rare tails at the default
    # deviation scale, so the fit degenerates and the run fails tolerance
    code = main(["ldp", "--trials", "500", "--seed", "3",
                 "--out", str(tmp_path)])
    assert code == 2
    report = _read(tmp_path / "report.json")
    assert report["passed"] is False


# ---------------------------------------------------------------- manifest


def test_manifest_roundtrip_reproduces_report(tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["lyapunov", "--steps", "2000", "--trials", "100",
                 "--seed", "7", "--out", str(out1)]) == 0
    assert main(["lyapunov", "--config", str(out1 / "manifest.json"),
                 "--out", str(out2)]) == 0
    assert (out1 / "report.json").read_bytes() == \
        (out2 / "report.json").read_bytes()
    assert (out1 / "series.csv").read_bytes() == \
        (out2 / "series.csv").read_bytes()


def test_seed_changes_stochastic_report(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    main(["lyapunov", "--steps", "2000", "--trials", "50", "--seed", "1",
          "--out", str(a)])
    main(["lyapunov", "--steps", "2000", "--trials", "50", "--seed", "2",
          "--out", str(b)])
    assert _read(a / "report.json")["estimate"] != \
        _read(b / "report.json")["estimate"]


def test_drift_runs_with_defaults(tmp_path):
    assert main(["drift", "--out", str(tmp_path)]) == 0
    report = _read(tmp_path / "report.json")
    assert "cross_ratio" in report
