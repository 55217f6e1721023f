import csv
import io
import json
import subprocess
import sys

import pytest

from framelab import diluted_tight_frame, load_frame, save_frame
from framelab.cli import main
from framelab.harness import SUITES, VerifyConfig, run_suite
from framelab.report import CSV_HEADER, TheoremCheck


def test_unknown_suite_lists_choices():
    with pytest.raises(ValueError) as err:
        run_suite("bogus")
    for name in SUITES + ("all",):
        assert name in str(err.value)


def test_unreadable_config(tmp_path):
    with pytest.raises(ValueError):
        VerifyConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"seed": 1, "nonsense": 2}')
    with pytest.raises(ValueError, match="unknown config"):
        VerifyConfig.load(bad)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("FRAMELAB_SEED", "123")
    assert VerifyConfig().seed == 123
    monkeypatch.delenv("FRAMELAB_SEED")
    assert VerifyConfig().seed == 7


def test_check_rows_validate():
    with pytest.raises(ValueError):
        TheoremCheck("Nope", "x", 1, 1, 1e-9, True)
    with pytest.raises(ValueError):
        TheoremCheck("Christensen", "x", 1, 1, 0.0, True)
    row = TheoremCheck("Christensen", "x", 1, 2, 1e-9, False, precondition_satisfied=False)
    assert row.passed is None and not row.failed


def test_thm12_replay_is_byte_identical():
    cfg = VerifyConfig(seed=7)
    a = run_suite("verify-thm12", cfg)
    b = run_suite("verify-thm12", cfg)
    assert a.to_json() == b.to_json()
    assert a.to_csv() == b.to_csv()
    assert a.passed


def test_config_echo_replays_suite():
    cfg = VerifyConfig(seed=3, christensen_trials=20)
    first = run_suite("verify-christensen", cfg)
    echoed = json.loads(first.to_json())["config"]
    again = run_suite("verify-christensen", VerifyConfig.from_dict(echoed))
    assert first.to_json() == again.to_json()
    assert len([c for c in first.checks if c.trial is not None]) == 20


def test_csv_report_layout():
    res = run_suite("verify-christensen", VerifyConfig(seed=1, christensen_trials=10))
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert rows[0] == CSV_HEADER
    assert len(rows) == len(res.checks) + 1


def test_failing_check_drives_exit_status(monkeypatch, capsys):
    from framelab import harness

    def broken(cfg):
        return [TheoremCheck("Christensen", "forced", 1.0, 2.0, 1e-9, False)]

    monkeypatch.setitem(harness.SUITE_FUNCS, "verify-christensen", broken)
    assert main(["verify", "verify-christensen"]) == 1
    capsys.readouterr()


def test_cli_verify_outputs(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "christensen_trials": 10}))
    out_json, out_csv = tmp_path / "r.json", tmp_path / "r.csv"
    rc = main(["verify", "verify-christensen", "--config", str(cfg), "--json", str(out_json),
               "--csv", str(out_csv)])
    printed = capsys.readouterr().out
    assert rc == 0
    assert printed == out_json.read_text()
    assert json.loads(printed)["config"]["seed"] == 5
    assert out_csv.read_text().startswith(",".join(CSV_HEADER))


def test_cli_verify_bad_suite(capsys):
    assert main(["verify", "bogus"]) == 2
    assert "verify-ex33" in capsys.readouterr().err


def test_cli_construct_and_bounds(tmp_path, capsys):
    path = tmp_path / "f.json"
    assert main(["construct", "example33", "--k", "4", "-o", str(path)]) == 0
    f = load_frame(path)
    assert f.m == 12 and f.label == "example33 k=4"
    capsys.readouterr()
    assert main(["bounds", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["l2"]["lower"] == pytest.approx(5.0) and out["l2"]["upper"] == pytest.approx(5.0)
    assert main(["bounds", str(path), "--p", "4", "--restarts", "16"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["p"]["lower"] >= 1 - 1e-6


def test_cli_construct_to_stdout(capsys):
    assert main(["construct", "basis", "--n", "2", "--field", "real"]) == 0
    assert '"field": "real"' in capsys.readouterr().out


def test_cli_stability_and_a0(tmp_path, capsys):
    path = tmp_path / "f.json"
    save_frame(diluted_tight_frame(1), path)
    assert main(["stability", str(path), "--grid"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["certified"] and rep["c_estimate"] == pytest.approx(1.14907669, rel=1e-6)
    assert main(["stability", str(path), "--restarts", "16", "--seed", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["method"] == "multistart"
    assert main(["a0", str(path), "--restarts", "16"]) == 0
    assert json.loads(capsys.readouterr().out)["a0_estimate"] == pytest.approx(0.5, rel=1e-6)


def test_cli_perturb_and_sweep(tmp_path, capsys):
    path, out = tmp_path / "f.json", tmp_path / "y.json"
    save_frame(diluted_tight_frame(1), path)
    assert main(["perturb", str(path), "--eps", "0.01", "--mode", "single-vector",
                 "--seed", "3", "-o", str(out)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["displacement"] == pytest.approx(0.0099, rel=1e-9)
    assert load_frame(out).m == 6
    report = tmp_path / "sweep.csv"
    assert main(["sweep", str(path), "--eps-list", "1e-5", "1e-4", "--trials", "2",
                 "--restarts", "16", "--seed", "1", "-o", str(report)]) == 0
    capsys.readouterr()
    assert report.read_text().startswith("theorem,eps,trial")
    assert json.loads(report.with_suffix(".json").read_text())["trials"] == 2


def test_cli_reports_bad_frame_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"field": "real", "dim": 2, "vectors": [[1]]}')
    assert main(["bounds", str(path)]) == 2
    assert "dimension mismatch" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "framelab.cli", "construct", "example33"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["dim"] == 2
