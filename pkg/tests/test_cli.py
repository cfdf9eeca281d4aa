import json
import subprocess
import sys

import pytest

from legapprox.cli import main

STANDARD = {"n": 1, "coeffs": {"dw": "1", "dz": "-y"}}


@pytest.fixture
def forms(tmp_path):
    std = tmp_path / "std.json"
    std.write_text(json.dumps(STANDARD))
    bad = tmp_path / "flat.json"
    bad.write_text(json.dumps({"n": 1, "coeffs": {"dw": "1"}}))
    return std, bad


def test_validate_fig1(forms, capsys):
    assert main(["validate", "--set", "fixture:fig1", "--form", str(forms[0])]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["l"] == 2 and data["euler_characteristic"] == -1


def test_basis_without_form(capsys):
    assert main(["basis", "--set", "fixture:pants"]) == 0
    assert json.loads(capsys.readouterr().out)["l"] == 2


def test_spray_output(tmp_path, capsys):
    assert main(["spray", "--set", "fixture:annulus", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "spray.json").read_text())
    assert data["period_matrix_defect"] <= 1e-10


def test_run_disc_writes_outputs(forms, tmp_path):
    out = tmp_path / "o"
    code = main(["run", "--set", "fixture:disc", "--form", str(forms[0]), "--out", str(out), "--emit-csv"])
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["closeness"]["total"] <= 1e-9
    assert (out / "set.png").exists() and (out / "fibers.png").exists() and (out / "curve_00.csv").exists()


def test_run_is_byte_reproducible(forms, tmp_path):
    args = ["run", "--set", "fixture:disc", "--form", str(forms[0]), "--no-figures", "--seed", "4"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_not_contact_exit_code(forms):
    assert main(["validate", "--set", "fixture:disc", "--form", str(forms[1])]) == 2


def test_missing_file_exit_code(tmp_path):
    assert main(["validate", "--set", str(tmp_path / "none.json"), "--form", str(tmp_path / "none.json")]) == 5


def test_unknown_fixture_exit_code(forms):
    assert main(["validate", "--set", "fixture:nope", "--form", str(forms[0])]) == 5


@pytest.mark.parametrize("tol", ["closeness=-1", "closeness", "closeness=abc", "nonsense=1"])
def test_bad_tolerance_exit_code(forms, tol):
    assert main(["run", "--set", "fixture:disc", "--form", str(forms[0]), "--tol", tol]) == 2


def test_budget_exit_code_still_writes(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"set": "fixture:disc", "form": STANDARD, "defect": 1e-4,
                               "tolerances": {"closeness": 1e-6}}))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-figures"]) == 4
    assert (tmp_path / "o" / "report.json").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "legapprox", "basis", "--set", "fixture:disc"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["l"] == 0


def test_demo_annulus(tmp_path):
    assert main(["demo", "annulus", "--eps", "0.1", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["extra"]["annulus"]["isotropy_outer"] <= 1e-10
    assert (tmp_path / "rings.png").exists()
