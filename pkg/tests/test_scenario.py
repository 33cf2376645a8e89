"""Scenario file parsing: unit conversion, strictness, and defaults."""

import json
import math
import os

import pytest

from ramangn import parse_scenario
from ramangn.domain import Direction
from ramangn.errors import ScenarioError, UnitError, ValidationError

from conftest import ALPHA_02_DB_KM


def _write(tmp_path, payload, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _base_payload():
    return {
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
    }


def test_reference_scenario_parses_and_converts(reference_scenario):
    link = reference_scenario.link
    assert link.grid.n_channels == 40
    assert link.grid.channels[0].center_frequency == pytest.approx(191.45e12)
    assert link.grid.channels[-1].center_frequency == pytest.approx(195.35e12)
    assert link.grid.band_center == pytest.approx(193.4e12)
    assert link.span.length == pytest.approx(80e3)
    assert link.span.attenuation == pytest.approx(ALPHA_02_DB_KM)
    assert link.span.beta2 == pytest.approx(-21.7e-27)
    assert link.span.beta3 == pytest.approx(0.14e-39)
    assert link.span.gamma == pytest.approx(1.2e-3)
    assert link.span.raman_slope == pytest.approx(2.8e-17)
    assert len(link.pumps) == 1
    pump = link.pumps[0]
    assert pump.frequency == pytest.approx(206.6e12)
    assert pump.input_power == pytest.approx(0.6)
    assert pump.direction is Direction.BACKWARD
    ase, trx = reference_scenario.budget.as_arrays(2)
    assert math.isinf(ase[0]) and math.isinf(trx[0])
    assert reference_scenario.solver_steps == 1000


def test_minimal_scenario_defaults(minimal_scenario_path):
    sc = parse_scenario(minimal_scenario_path)
    assert sc.link.span.beta3 == 0.0
    assert sc.link.span.raman_slope == 0.0
    assert sc.link.pumps == ()
    assert sc.link.span_count == 1
    assert sc.fit_overrides == {}


def test_unknown_root_key_rejected(tmp_path):
    payload = _base_payload()
    payload["unexpected"] = 1
    with pytest.raises(ScenarioError, match="unexpected"):
        parse_scenario(_write(tmp_path, payload))


def test_unknown_nested_key_reports_path(tmp_path):
    payload = _base_payload()
    payload["span"]["lenght_km"] = 80.0
    with pytest.raises(ScenarioError, match="span"):
        parse_scenario(_write(tmp_path, payload))


def test_missing_required_key_reports_path(tmp_path):
    payload = _base_payload()
    del payload["span"]["attenuation"]
    with pytest.raises(ScenarioError, match="attenuation"):
        parse_scenario(_write(tmp_path, payload))


def test_bad_unit_tag_rejected(tmp_path):
    payload = _base_payload()
    payload["span"]["attenuation"] = {"value": 0.2, "unit": "dB/mile"}
    # the unit failure is wrapped with the offending key path
    with pytest.raises(ScenarioError, match="span.attenuation.*unit tag"):
        parse_scenario(_write(tmp_path, payload))


def test_invalid_json_rejected_with_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"span": ')
    with pytest.raises(ScenarioError, match="line"):
        parse_scenario(str(path))


def test_missing_file_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("/nonexistent/scenario.json")


def test_budget_conversion(tmp_path):
    payload = _base_payload()
    payload["budget"] = {"snr_ase_db": 20.0, "snr_trx_db": "infinite"}
    sc = parse_scenario(_write(tmp_path, payload))
    ase, trx = sc.budget.as_arrays(2)
    assert ase[0] == pytest.approx(100.0)
    assert math.isinf(trx[0])


def test_explicit_channel_list(tmp_path):
    payload = _base_payload()
    payload["grid"] = {
        "channels": [
            {
                "center": {"value": 193.0, "unit": "THz"},
                "bandwidth": {"value": 0.05, "unit": "THz"},
                "launch_power": {"value": 1.0, "unit": "dBm"},
            },
            {
                "center": {"value": 193.2, "unit": "THz"},
                "bandwidth": {"value": 0.1, "unit": "THz"},
                "launch_power": {"value": 0.0, "unit": "dBm"},
            },
        ]
    }
    sc = parse_scenario(_write(tmp_path, payload))
    chans = sc.link.grid.channels
    assert chans[0].bandwidth == pytest.approx(50e9)
    assert chans[0].launch_power_per_span[0] == pytest.approx(
        1e-3 * 10 ** 0.1)
    assert chans[1].center_frequency == pytest.approx(193.2e12)


def test_solver_fit_quadrature_sections(tmp_path):
    payload = _base_payload()
    payload["solver"] = {"steps": 500}
    payload["fit"] = {"rng_seed": 7, "n_grid": 4}
    payload["quadrature"] = {"rel_tol_eta": 1e-5, "include_window": False}
    sc = parse_scenario(_write(tmp_path, payload))
    assert sc.solver_steps == 500
    assert sc.fit_overrides == {"n_grid": 4, "rng_seed": 7}
    assert sc.quadrature.rel_tol_eta == 1e-5
    assert sc.quadrature.include_window is False


def test_unknown_fit_key_rejected(tmp_path):
    payload = _base_payload()
    payload["fit"] = {"optimizer": "lm"}
    with pytest.raises(ScenarioError, match="fit"):
        parse_scenario(_write(tmp_path, payload))


def test_validation_failure_surfaces(tmp_path):
    payload = _base_payload()
    payload["pumps"] = [{
        "frequency": {"value": 193.05, "unit": "THz"},  # inside the band
        "power_w": 0.5,
        "direction": "backward",
        "attenuation": {"value": 0.2, "unit": "dB/km"},
    }]
    with pytest.raises(ValidationError):
        parse_scenario(_write(tmp_path, payload))


def test_non_mapping_root_rejected(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2, 3]")
    with pytest.raises(ScenarioError):
        parse_scenario(str(path))
