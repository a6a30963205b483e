import csv
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest
import yaml

from wavestab.cli import SCAN_COLUMNS, main, scan_rows

REF_MODEL = {"kappa": [1], "W": [0, 0, -0.125]}
REFD_MODEL = {"kappa": [1], "W": [0, 0, 0.125]}


def write(tmp_path, cfg, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def run(tmp_path, command, cfg, *extra):
    out = tmp_path / "out"
    return main([command, "--config", write(tmp_path, cfg), "--out", str(out), "--no-timestamp", *extra]), out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_profile_outputs(tmp_path):
    cfg = {"model": REF_MODEL, "wave": {"params": {"mu_x": -0.375, "c_x": 0, "omega_phi": -1, "mu_phi": 0}}}
    code, out = run(tmp_path, "profile", cfg)
    assert code == 0
    rows = read_csv(out / "profile.csv")
    assert rows[0] == ["x", "rho", "v", "theta", "V1", "V2"] and len(rows) > 100
    summary = json.loads((out / "profile.json").read_text())
    assert summary["X_x"] == pytest.approx(4.68568033658708, rel=1e-12)
    assert "generated_at" not in summary
    assert set(summary["averages"]) >= {"m_bar", "q_bar", "sigma1"}


def test_malformed_config(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("model: [\n")
    out = tmp_path / "out"
    assert main(["profile", "--config", str(path), "--out", str(out)]) == 2
    assert json.loads((out / "error.json").read_text())["error"] == "ConfigurationError"


def test_schema_violation(tmp_path):
    code, out = run(tmp_path, "profile", {"model": REF_MODEL})
    assert code == 2


def test_degenerate_well_exit_code(tmp_path):
    cfg = {"model": REF_MODEL, "wave": {"params": {"mu_x": -0.5, "c_x": 0, "omega_phi": -1, "mu_phi": 0}}}
    code, out = run(tmp_path, "profile", cfg)
    assert code == 3
    assert json.loads((out / "error.json").read_text())["error"] == "DegenerateWell"


def test_ref_harmonic_report(tmp_path):
    cfg = {
        "model": REF_MODEL,
        "wave": {"regime": {"side": "harmonic", "c_x": 0, "rho0": 1, "k_phi": 0, "epsilon": 0.0316227766016838}},
        "numerics": {
            "evans": {"xi": [0.05], "eta_sq": [0.0], "rect": [1e-4, 0.05, -0.05, 0.05]},
            "evans_scan": {"lambda_re": [0.01, 0.1, 1.0], "xi": 0.05},
        },
    }
    code, out = run(tmp_path, "stability", cfg)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    schema = json.loads(resources.files("wavestab").joinpath("schemas", "report.schema.json").read_text())
    jsonschema.validate(report, schema)
    assert report["sideband"]["verdict"] == "UNSTABLE"
    assert report["evans"]["counts"][0]["count"] >= 1
    assert report["regime"]["delta_hyp"] == pytest.approx(-0.25)
    rows = read_csv(out / "evans_scan.csv")
    assert rows[0] == ["xi", "eta_sq", "re_lambda", "im_lambda", "re_D", "im_D"] and len(rows) == 4


def test_refd_sample_report(tmp_path):
    cfg = {
        "model": REFD_MODEL,
        "wave": {"params": {"mu_x": 1.25, "c_x": 0, "omega_phi": 1.5, "mu_phi": 1}},
        "numerics": {"evans": {"xi": [0.05], "eta_sq": [0.0], "rect": [1e-4, 0.05, -0.05, 0.05]}},
    }
    code, out = run(tmp_path, "stability", cfg)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["sideband"]["verdict"] == "STABLE_AT_TESTED_RESOLUTION"
    assert report["evans"]["counts"][0]["count"] == 0


def test_mu_x_scan(tmp_path):
    cfg = {
        "model": REF_MODEL,
        "wave": {"params": {"mu_x": -0.4, "c_x": 0, "omega_phi": -1, "mu_phi": 0}},
        "scan": {"axis": "mu_x", "start": -0.499, "stop": -0.01, "num": 20},
    }
    code, out = run(tmp_path, "scan", cfg)
    assert code == 0
    rows = read_csv(out / "scan.csv")
    assert rows[0] == SCAN_COLUMNS and len(rows) == 21
    assert [int(r[0]) for r in rows[1:]] == list(range(20))
    assert all(r[-1] == "" for r in rows[1:])


def test_large_period_scan_signature(tmp_path):
    cfg = {
        "model": REFD_MODEL,
        "wave": {"regime": {"side": "solitary", "c_x": 0, "rho0": 1, "k_phi": 0.5, "epsilon": 1e-3}},
        "scan": {"axis": "epsilon", "values": [1e-2, 1e-3]},
    }
    rows = scan_rows(yaml.safe_load(yaml.safe_dump(cfg)))
    sig = SCAN_COLUMNS.index("negative_signature")
    vk = SCAN_COLUMNS.index("vk_index")
    for r in rows:
        assert r[vk] > 0 and r[sig] == 2
        assert r[SCAN_COLUMNS.index("transverse_full")] == "UNSTABLE"


def test_scan_records_failures(tmp_path):
    cfg = {
        "model": REF_MODEL,
        "wave": {"params": {"mu_x": -0.4, "c_x": 0, "omega_phi": -1, "mu_phi": 0}},
        "scan": {"axis": "mu_x", "values": [-0.45, -0.6]},
    }
    rows = scan_rows(cfg)
    assert rows[0][-1] is None and rows[1][-1].startswith("NoWellFound")


def test_empty_grid(tmp_path):
    cfg = {
        "model": REF_MODEL,
        "wave": {"params": {"mu_x": -0.4, "c_x": 0, "omega_phi": -1, "mu_phi": 0}},
        "scan": {"axis": "mu_x", "values": []},
    }
    assert run(tmp_path, "scan", cfg)[0] == 2


def test_scan_is_deterministic_across_threads(tmp_path, monkeypatch):
    cfg = {
        "model": REF_MODEL,
        "wave": {"params": {"mu_x": -0.4, "c_x": 0, "omega_phi": -1, "mu_phi": 0}},
        "scan": {"axis": "mu_x", "start": -0.49, "stop": -0.1, "num": 6},
    }
    path = write(tmp_path, cfg)
    assert main(["scan", "--config", path, "--out", str(tmp_path / "a")]) == 0
    monkeypatch.setenv("WAVESTAB_THREADS", "3")
    assert main(["scan", "--config", path, "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "scan.csv").read_bytes()
    assert a == (tmp_path / "b" / "scan.csv").read_bytes()
    assert b"\r\n" not in a


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("WAVESTAB_THREADS", "many")
    cfg = {"model": REF_MODEL, "wave": {"params": {"mu_x": -0.4, "c_x": 0, "omega_phi": -1, "mu_phi": 0}}}
    assert run(tmp_path, "profile", cfg)[0] == 2


def test_console_entry_point(tmp_path):
    cfg = {"model": REF_MODEL, "wave": {"params": {"mu_x": -0.375, "c_x": 0, "omega_phi": -1, "mu_phi": 0}}}
    proc = subprocess.run(
        [sys.executable, "-m", "wavestab.cli", "profile", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "profile.csv").exists()
