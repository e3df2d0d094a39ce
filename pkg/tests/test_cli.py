"""Tests for the report CLI: config layering, CSV artifacts, manifests."""

import csv
import hashlib
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from helios.cli import _fmt, main, resolve_params
from helios.errors import CheckFailed, ConfigError

HEADERS = {
    "mie": ["k", "sigma", "sigma_over_2theta", "optical_residual"],
    "dtn-norms": ["k", "norm_D", "norm_Dinv", "slope_D", "slope_Dinv"],
    "ap-eikonal": ["k", "delta", "sigma", "is_resonant", "is_invisible"],
}


def _read_artifacts(out_dir, sub):
    names = sorted(os.listdir(out_dir))
    csvs = [n for n in names if n.startswith(sub + "-") and n.endswith(".csv")]
    manifests = [n for n in names if n.endswith(".manifest.json")]
    assert len(csvs) == 1 and len(manifests) == 1
    with open(os.path.join(out_dir, csvs[0]), "rb") as f:
        raw = f.read()
    with open(os.path.join(out_dir, manifests[0])) as f:
        manifest = json.load(f)
    return raw, manifest


def test_resolve_params_defaults():
    p = resolve_params("mie", {}, None)
    assert p["radius"] == 1.0 and p["bc"] == "dirichlet" and p["nk"] == 200


def test_resolve_params_flag_overrides_config(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"kmin": 2.0, "kmax": 50.0}))
    p = resolve_params("mie", {"kmax": 70.0}, str(cfg))
    assert p["kmin"] == 2.0 and p["kmax"] == 70.0


def test_resolve_params_flattens_one_level(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"sweep": {"kmin": 3.0}, "nk": 7}))
    p = resolve_params("mie", {}, str(cfg))
    assert p["kmin"] == 3.0 and p["nk"] == 7


def test_resolve_params_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"kmni": 3.0}))
    with pytest.raises(ConfigError, match="kmni"):
        resolve_params("mie", {}, str(cfg))


def test_resolve_params_rejects_duplicate_key(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"sweep": {"nk": 5}, "nk": 7}))
    with pytest.raises(ConfigError, match="nk"):
        resolve_params("mie", {}, str(cfg))


def test_resolve_params_range_checks():
    with pytest.raises(ConfigError):
        resolve_params("mie", {"nk": 0}, None)
    with pytest.raises(ConfigError):
        resolve_params("mie", {"kmin": 50.0, "kmax": 10.0}, None)
    with pytest.raises(ConfigError):
        resolve_params("mie", {"bc": "robin"}, None)


def test_fmt_round_trips_doubles():
    for x in (1.0, math.pi, 1e-17, 7.255197456936871, -3.33e300):
        assert float(_fmt(x)) == x
    assert _fmt(True) == "1" and _fmt(False) == "0"
    assert _fmt(42) == "42"
    with pytest.raises(CheckFailed):
        _fmt(float("nan"))


def test_mie_artifact_and_header(tmp_path):
    rc = main(
        ["mie", "--kmin", "5", "--kmax", "20", "--nk", "16", "--out", str(tmp_path)]
    )
    assert rc == 0
    raw, manifest = _read_artifacts(tmp_path, "mie")
    rows = list(csv.reader(raw.decode("ascii").splitlines()))
    assert rows[0] == HEADERS["mie"]
    assert len(rows) == 1 + 16
    assert manifest["subcommand"] == "mie"
    assert manifest["csv_sha256"] == hashlib.sha256(raw).hexdigest()
    assert manifest["rows"] == 16
    assert all(c["passed"] for c in manifest["checks"].values())


def test_dtn_norms_slopes_last_row_only(tmp_path):
    rc = main(["dtn-norms", "--k", "20,40,80", "--out", str(tmp_path)])
    assert rc == 0
    raw, _ = _read_artifacts(tmp_path, "dtn-norms")
    rows = list(csv.reader(raw.decode("ascii").splitlines()))
    assert rows[0] == HEADERS["dtn-norms"]
    body = rows[1:]
    for r in body[:-1]:
        assert r[3] == "" and r[4] == ""
    assert float(body[-1][3]) <= 1.1
    assert float(body[-1][4]) <= 3.1


def test_ap_eikonal_rows_mark_comb(tmp_path):
    rc = main(
        ["ap-eikonal", "--kmin", "5", "--kmax", "40", "--nk", "200", "--out", str(tmp_path)]
    )
    assert rc == 0
    raw, _ = _read_artifacts(tmp_path, "ap-eikonal")
    rows = list(csv.reader(raw.decode("ascii").splitlines()))
    assert rows[0] == HEADERS["ap-eikonal"]
    res = [r for r in rows[1:] if r[3] == "1"]
    inv = [r for r in rows[1:] if r[4] == "1"]
    assert res and inv
    for r in res:
        assert abs(float(r[2]) - 2.0) <= 1e-12
    for r in inv:
        assert abs(float(r[2])) <= 1e-12


def test_rerun_reproduces_bytes(tmp_path):
    first = tmp_path / "a"
    rc = main(["ap-eikonal", "--kmax", "30", "--nk", "100", "--out", str(first)])
    assert rc == 0
    manifest_name = [n for n in os.listdir(first) if n.endswith(".manifest.json")][0]
    second = tmp_path / "b"
    rc = main(["rerun", str(first / manifest_name), "--out", str(second)])
    assert rc == 0
    raw_a, man_a = _read_artifacts(first, "ap-eikonal")
    raw_b, man_b = _read_artifacts(second, "ap-eikonal")
    assert raw_a == raw_b
    assert man_a["csv_sha256"] == man_b["csv_sha256"]


def test_exit_code_two_on_config_error(tmp_path):
    assert main(["mie", "--nk", "-3", "--out", str(tmp_path)]) == 2
    assert main(["mie", "--nk", "abc", "--out", str(tmp_path)]) == 2


def test_exit_code_one_on_failing_check(tmp_path):
    # a collar far too thin for the requested accuracy
    rc = main(
        [
            "phi-check",
            "--k",
            "20",
            "--delta-frac",
            "0.05",
            "--tol",
            "1e-6",
            "--out",
            str(tmp_path),
        ]
    )
    assert rc == 1


def test_worker_count_env(monkeypatch):
    from helios.cli import _worker_count

    monkeypatch.setenv("HELIOS_THREADS", "3")
    assert _worker_count() == 3
    monkeypatch.setenv("HELIOS_THREADS", "0")
    assert _worker_count() >= 1
    monkeypatch.delenv("HELIOS_THREADS")
    assert _worker_count() >= 1


def test_threads_env_rejected_when_malformed(tmp_path, monkeypatch):
    monkeypatch.setenv("HELIOS_THREADS", "abc")
    assert main(["ap-eikonal", "--kmax", "20", "--nk", "50", "--out", str(tmp_path)]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "helios.cli",
            "ap-eikonal",
            "--kmax",
            "20",
            "--nk",
            "50",
            "--out",
            str(tmp_path),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "pass" in proc.stdout
