import json

import pytest

from fiberflow.cli import main
from fiberflow.scenario import (
    scenario_to_dict,
    singleton_constant_scenario,
    two_point_scenario,
    write_scenario,
)


@pytest.fixture()
def two_point_file(tmp_path):
    return str(write_scenario(two_point_scenario(), tmp_path / "two_point.json"))


def _read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return [dict(zip(header, row.split(","))) for row in lines[1:]]


def test_validate_ok(two_point_file, capsys):
    assert main(["validate", two_point_file]) == 0
    assert "valid" in capsys.readouterr().out


def test_evolve_with_time_override(two_point_file, tmp_path):
    out = tmp_path / "rep"
    assert main(["--out", str(out), "evolve", two_point_file, "--times", "0.5,1,2"]) == 0
    rows = _read_csv(out / "two-point_evolution.csv")
    b1 = {float(r["t"]): float(r["u"]) for r in rows if r["base_id"] == "b1"}
    assert b1[0.5] == pytest.approx(1.0, abs=1e-12)
    assert b1[1.0] == pytest.approx(1.0, abs=1e-12)
    assert b1[2.0] == pytest.approx(0.5, abs=1e-12)


def test_slopes_and_transform_commands(two_point_file, tmp_path):
    out = tmp_path / "rep"
    assert main(["--out", str(out), "slopes", two_point_file]) == 0
    rows = _read_csv(out / "two-point_slopes.csv")
    assert {r["base_id"] for r in rows} == {"b0", "b1"}
    assert main(["--out", str(out), "transform", two_point_file, "--y", "b1", "--t", "1.0"]) == 0
    rows = _read_csv(out / "two-point_transform.csv")
    assert rows[0]["lstar"] == rows[0]["hamiltonian"]
    assert any(r["claim_matches"] == "0" for r in rows)


def test_variational_command(two_point_file, tmp_path, capsys):
    out = tmp_path / "rep"
    assert main(["--out", str(out), "variational", two_point_file, "--y", "b1", "--t", "2.0", "--steps", "8"]) == 0
    printed = capsys.readouterr().out
    assert "value=0.5" in printed
    assert "best_z=b0" in printed


def test_check_singleton_all_pass(tmp_path, capsys):
    path = write_scenario(singleton_constant_scenario(), tmp_path / "s.json")
    assert main(["--out", str(tmp_path / "rep"), "check", str(path)]) == 0
    printed = capsys.readouterr().out
    assert "FAIL" not in printed


def test_check_exit_nonzero_on_failure(tmp_path):
    # at t = 0.5 the two-point neighbor slope is order one while the field is
    # still frozen, so the HJ residual verdict fails and check exits nonzero
    doc = scenario_to_dict(two_point_scenario())
    doc["grids"]["times"] = [0.5]
    path = tmp_path / "active.json"
    path.write_text(json.dumps(doc))
    assert main(["--out", str(tmp_path / "rep"), "check", str(path)]) == 1


def test_invalid_scenario_exit_code(tmp_path):
    doc = scenario_to_dict(two_point_scenario())
    doc["section"]["b1"] = [1.0, 1.1]
    path = tmp_path / "offfiber.json"
    path.write_text(json.dumps(doc))
    assert main(["--out", str(tmp_path / "rep"), "check", str(path)]) == 5


def test_paper_example_command(tmp_path, capsys):
    out = tmp_path / "rep"
    assert main(["--out", str(out), "paper-example"]) == 0
    assert (out / "paper_counterexample.json").exists()
    verdicts = json.loads((out / "paper-counterexample_verdicts.json").read_text())
    ref = [v for v in verdicts if v["check"] == "reference_triple_violation"]
    assert ref and ref[0]["status"] == "PASS"
    assert "discrepancy flagged" in ref[0]["note"]


def test_exit_codes(tmp_path):
    assert main(["check", str(tmp_path / "missing.json")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["check", str(bad)]) == 4
    # scenario without params: variational refused with its own exit code
    doc = scenario_to_dict(two_point_scenario())
    for rec in doc["base"]:
        del rec["param"]
    noparam = tmp_path / "noparam.json"
    noparam.write_text(json.dumps(doc))
    assert main(["variational", str(noparam), "--y", "b1", "--t", "1.0"]) == 6


def test_jobs_flag_smoke(two_point_file, tmp_path):
    assert main(["--out", str(tmp_path / "rep"), "--jobs", "2", "evolve", two_point_file]) == 0
