"""Command-line interface: outputs, determinism, exit codes."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ramangn.cli import main


def _run(args):
    return main(list(args))


def test_solve_writes_deterministic_csv(minimal_scenario_path, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        rc = _run(["solve", "--scenario", minimal_scenario_path,
                   "--out", str(out)])
        assert rc == 0
    text_a = (out_a / "power_evolution.csv").read_text()
    text_b = (out_b / "power_evolution.csv").read_text()
    assert text_a == text_b
    assert text_a.splitlines()[0].startswith("z_m,")


def test_steps_override_changes_sampling(minimal_scenario_path, tmp_path):
    rc = _run(["solve", "--scenario", minimal_scenario_path,
               "--out", str(tmp_path), "--steps", "200"])
    assert rc == 0
    lines = (tmp_path / "power_evolution.csv").read_text().splitlines()
    assert len(lines) == 1 + 201


def test_fit_writes_json_report(minimal_scenario_path, tmp_path):
    rc = _run(["fit", "--scenario", minimal_scenario_path,
               "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "fit_report.json").read_text())
    assert len(payload["channels"]) == 1
    assert payload["channels"][0]["converged"] is True


def test_nli_writes_reports(data_dir, tmp_path):
    scenario = os.path.join(data_dir, "lumped_9ch.json")
    rc = _run(["nli", "--scenario", scenario, "--out", str(tmp_path)])
    assert rc == 0
    csv_lines = (tmp_path / "nli_report.csv").read_text().splitlines()
    assert csv_lines[0] == ("f_i_hz,eta_spm_per_w2,eta_xpm_per_w2,"
                            "eta_total_per_w2,snr_nli_db,snr_db")
    assert len(csv_lines) == 1 + 9
    payload = json.loads((tmp_path / "nli_report.json").read_text())
    assert len(payload["channels"]) == 9
    assert payload["degenerate_pairs"] == []


def test_sweep_slope_is_minus_two(data_dir, tmp_path):
    scenario = os.path.join(data_dir, "lumped_9ch.json")
    rc = _run(["sweep", "--scenario", scenario, "--out", str(tmp_path),
               "--sweep=-2:2:2"])
    assert rc == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == ("offset_db,channel,f_i_hz,launch_power_w,"
                        "snr_nli_db,snr_db")
    rows = [line.split(",") for line in lines[1:]]
    offsets = sorted({float(r[0]) for r in rows})
    assert offsets == [-2.0, 0.0, 2.0]
    for channel in range(9):
        per = {float(r[0]): float(r[4]) for r in rows
               if int(r[1]) == channel}
        slopes = np.diff([per[o] for o in offsets]) / np.diff(offsets)
        assert np.allclose(slopes, -2.0, atol=1e-9)


def test_sweep_requires_range(data_dir, tmp_path, capsys):
    scenario = os.path.join(data_dir, "lumped_9ch.json")
    assert _run(["sweep", "--scenario", scenario,
                 "--out", str(tmp_path)]) == 2
    assert _run(["sweep", "--scenario", scenario, "--out", str(tmp_path),
                 "--sweep", "nonsense"]) == 2


def test_missing_scenario_exits_2(tmp_path):
    assert _run(["solve", "--scenario", str(tmp_path / "nope.json")]) == 2


def test_unknown_key_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"what": 1}')
    assert _run(["solve", "--scenario", str(path)]) == 2


def test_validation_failure_exits_3(data_dir, tmp_path):
    base = json.loads(
        open(os.path.join(data_dir, "minimal.json")).read())
    base["pumps"] = [{
        "frequency": {"value": 193.4, "unit": "THz"},  # inside the band
        "power_w": 0.1,
        "direction": "backward",
        "attenuation": {"value": 0.2, "unit": "dB/km"},
    }]
    path = tmp_path / "invalid.json"
    path.write_text(json.dumps(base))
    assert _run(["solve", "--scenario", str(path)]) == 3


@pytest.fixture(scope="module")
def tiny_compare_scenario(tmp_path_factory):
    """A 2-channel pump-free scenario small enough to run the oracle."""
    payload = {
        "span": {
            "length_km": 80.0,
            "attenuation": {"value": 0.2, "unit": "dB/km"},
            "beta2": {"value": -21.7, "unit": "ps^2/km"},
            "gamma": {"value": 1.2, "unit": "1/(W*km)"},
        },
        "grid": {
            "count": 2,
            "first_center": {"value": 193.0, "unit": "THz"},
            "spacing": {"value": 0.1, "unit": "THz"},
            "bandwidth": {"value": 0.1, "unit": "THz"},
            "launch_power": {"value": 0.0, "unit": "dBm"},
        },
        "quadrature": {"max_refinements": 1},
    }
    path = tmp_path_factory.mktemp("cli") / "tiny.json"
    path.write_text(json.dumps(payload))
    return str(path)


def test_compare_gate_pass_and_fail(tiny_compare_scenario, tmp_path):
    rc = _run(["compare", "--scenario", tiny_compare_scenario,
               "--out", str(tmp_path), "--gate-db", "1.0"])
    assert rc == 0
    lines = (tmp_path / "comparison.csv").read_text().splitlines()
    assert lines[0] == ("channel,f_i_hz,eta_closed_per_w2,eta_numeric_per_w2,"
                        "delta_db,quadrature_error_estimate")
    assert len(lines) == 1 + 2
    rc = _run(["compare", "--scenario", tiny_compare_scenario,
               "--out", str(tmp_path), "--gate-db", "1e-9"])
    assert rc == 5


def test_console_script_entry_point(minimal_scenario_path, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ramangn.cli", "solve",
         "--scenario", minimal_scenario_path, "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "solved" in proc.stdout
