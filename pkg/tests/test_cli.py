"""Command line surface: config validation, reports, exit codes."""

import csv
import json
import math

import pytest

from ar1fpt.cli import main

GAUSS_CFG = {
    "family": {"name": "gaussian", "m": 0, "var": 1},
    "lambda": 0.5,
    "x": 0,
    "a": 1,
}
DET_CFG = {
    "family": {"name": "deterministic", "c": 1},
    "lambda": 0.5,
    "x": 0,
    "a": 1.5,
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, subcommand, cfg, *extra):
    cfg_path = write_cfg(tmp_path, cfg)
    out = tmp_path / "out"
    code = main([subcommand, "--config", cfg_path, "--out", str(out), *extra])
    report = None
    if (out / "report.json").exists():
        report = json.loads((out / "report.json").read_text())
    return code, report, out


def test_phi_report_and_csv(tmp_path):
    code, report, out = run(tmp_path, "phi", GAUSS_CFG)
    assert code == 0
    assert report["meta"]["tool"] == "ar1fpt"
    with open(out / "table.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["u", "phi", "abs_err"]
    by_u = {float(r[0]): (float(r[1]), float(r[2])) for r in rows[1:]}
    phi1, err1 = by_u[1.0]
    assert abs(phi1 - 2.0 / 3.0) <= 1e-12 and err1 <= 1e-12


def test_csv_full_precision(tmp_path):
    _, _, out = run(tmp_path, "phi", GAUSS_CFG)
    with open(out / "table.csv") as fh:
        rows = list(csv.reader(fh))
    # 17 significant digits survive a text round trip exactly
    val = [r[1] for r in rows if r[0] == "1"][0]
    assert float(val) == 2.0 / 3.0


def test_identity_check_deterministic_zero_discrepancy(tmp_path, capsys):
    code, report, _ = run(tmp_path, "identity-check", DET_CFG, "--paths", "500")
    assert code == 0
    res = report["results"]
    assert abs(res["identity_value"] - 3.0) < 1e-8
    assert res["mc_e_tau_hat"] == 3.0
    assert res["discrepancy"] < 1e-8
    assert "combined std errs" in capsys.readouterr().out


def test_lambda_out_of_range_rejected(tmp_path):
    cfg = dict(GAUSS_CFG, **{"lambda": 1.2})
    code, report, _ = run(tmp_path, "phi", cfg)
    assert code == 2 and report is None


def test_unknown_config_key_rejected(tmp_path):
    cfg = dict(GAUSS_CFG, typo_key=1)
    code, _, _ = run(tmp_path, "phi", cfg)
    assert code == 2


def test_unknown_family_rejected(tmp_path):
    cfg = dict(GAUSS_CFG, family={"name": "cauchy"})
    code, _, _ = run(tmp_path, "phi", cfg)
    assert code == 2


def test_missing_family_field_rejected(tmp_path):
    cfg = dict(GAUSS_CFG, family={"name": "deterministic"})
    code, _, _ = run(tmp_path, "phi", cfg)
    assert code == 2


def test_flag_overrides_file_seed(tmp_path):
    cfg = dict(GAUSS_CFG, seed=42)
    code, report, _ = run(tmp_path, "simulate", cfg, "--seed", "7", "--paths", "1000")
    assert code == 0
    assert report["config"]["seed"] == 7
    assert report["results"]["seed"] == 7


def test_bounds_no_crossing_exit_code(tmp_path):
    cfg = dict(DET_CFG, a=3)
    code, report, _ = run(tmp_path, "bounds", cfg)
    assert code == 3 and report is None


def test_bounds_with_cap(tmp_path):
    cfg = {
        "family": {"name": "two_point", "h_up": 1, "h_down": -1, "p": 0.5},
        "lambda": 0.5,
        "x": 0,
        "a": 1,
    }
    code, report, _ = run(tmp_path, "bounds", cfg, "--cap", "4")
    assert code == 0
    res = report["results"]
    assert res["lower_bound_e_tau"] <= res["upper_bound_e_tau"]


def test_certificate_report(tmp_path):
    code, report, _ = run(tmp_path, "certificate", GAUSS_CFG)
    assert code == 0
    res = report["results"]
    assert res["alpha"] > 0 and res["c_bound"] > 0 and res["v_star"] < 0


def test_validate_all_checks_pass(tmp_path):
    code, report, out = run(tmp_path, "validate", GAUSS_CFG)
    assert code == 0
    assert report["results"]["all_passed"]
    assert (out / "table.csv").exists()


def test_nested_family_config(tmp_path):
    cfg = dict(
        GAUSS_CFG,
        family={
            "name": "capped_above",
            "cap": 1.0,
            "base": {"name": "gaussian", "m": 0, "var": 1},
        },
    )
    code, report, _ = run(tmp_path, "phi", cfg)
    assert code == 0
    assert report["config"]["family"]["base"]["name"] == "gaussian"


def test_reports_reproduce_across_thread_counts(tmp_path, monkeypatch):
    blobs = {}
    for threads in ("1", "8"):
        monkeypatch.setenv("FPT_THREADS", threads)
        _, report, _ = run(tmp_path, "identity-check", GAUSS_CFG, "--paths", "20000")
        blobs[threads] = json.dumps(report["results"], sort_keys=True)
    assert blobs["1"] == blobs["8"]
