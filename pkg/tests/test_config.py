"""Config parsing: presets, defaults, strict keys, and the echo round trip."""

import json

import pytest

from glantenna.config import RunConfig, effective_config, parse_config
from glantenna.errors import ConfigError


class TestParseConfig:
    def test_preset_loads_reference_geometry(self):
        cfg = parse_config('{"preset": "paper-table1"}')
        a = cfg.antenna
        assert (a.ls, a.ws, a.hs) == (68.0, 56.0, 3.0)
        assert (a.lm, a.wm, a.dm, a.lg) == (46.0, 35.0, 3.0, 12.0)
        assert cfg.states == ("L1", "L2", "L3", "L4", "L5", "L6")
        assert a.materials["substrate"].eps_r == 2.9
        assert a.materials["channel_wall"].tan_delta == 0.002

    def test_empty_document_needs_states(self):
        with pytest.raises(ConfigError, match="states required"):
            parse_config("{}")

    def test_invariant_error_names_path(self):
        doc = {"preset": "paper-table1", "antenna": {"Dm": -1}}
        with pytest.raises(ConfigError, match="antenna.Dm"):
            parse_config(json.dumps(doc))

    def test_unknown_key_rejected_with_path(self):
        doc = {"preset": "paper-table1", "sim": {"delta_nm": 3}}
        with pytest.raises(ConfigError, match=r"sim\.delta_nm"):
            parse_config(json.dumps(doc))
        with pytest.raises(ConfigError, match=r"\$\.turbo"):
            parse_config('{"preset": "paper-table1", "turbo": true}')

    def test_type_mismatch_reported(self):
        doc = {"preset": "paper-table1", "sim": {"max_steps": "many"}}
        with pytest.raises(ConfigError, match="type mismatch at sim.max_steps"):
            parse_config(json.dumps(doc))

    def test_malformed_json(self):
        with pytest.raises(ConfigError, match="invalid JSON"):
            parse_config("{not json")

    def test_user_overrides_preset(self):
        doc = {"preset": "paper-table1", "states": ["L2"], "antenna": {"Lg": 9.0}}
        cfg = parse_config(json.dumps(doc))
        assert cfg.states == ("L2",)
        assert cfg.antenna.lg == 9.0
        assert cfg.antenna.ls == 68.0  # untouched preset value

    def test_unknown_state_rejected(self):
        doc = {"preset": "paper-table1", "states": ["L9"]}
        with pytest.raises(ConfigError, match="unknown state"):
            parse_config(json.dumps(doc))

    def test_kubo_liquid_path(self):
        doc = {
            "preset": "paper-table1",
            "antenna": {
                "materials": {
                    "liquid": {
                        "kubo": {"mu_c_ev": 0.5, "tau_s": 1e-12, "temperature_k": 300.0,
                                 "thickness_mm": 3.0, "bulk_sigma_override": None}
                    }
                }
            },
        }
        cfg = parse_config(json.dumps(doc))
        liquid = cfg.antenna.materials["liquid"]
        assert liquid.kind == "bulk_conductor"
        assert liquid.sigma == pytest.approx(19.595637711093607, rel=1e-9)

    def test_farfield_must_include_5p5(self):
        doc = {"preset": "paper-table1", "farfield": {"frequencies_ghz": [5.0]}}
        with pytest.raises(ConfigError, match="5.5 GHz"):
            parse_config(json.dumps(doc))


class TestEffectiveConfigRoundTrip:
    def test_round_trip_equality(self):
        doc = {
            "preset": "paper-table1",
            "states": ["L2", "L5"],
            "sim": {"delta_mm": 1.0, "max_steps": 1234, "precision": "double"},
            "source": {"f0_ghz": 5.0, "bandwidth_ghz": 3.0},
            "outputs": {"directory": "results"},
            "jobs": 2,
        }
        cfg = parse_config(json.dumps(doc))
        echoed = effective_config(cfg)
        cfg2 = parse_config(json.dumps(echoed))
        assert cfg2 == cfg

    def test_round_trip_of_defaults(self):
        cfg = parse_config('{"preset": "paper-table1"}')
        assert parse_config(json.dumps(effective_config(cfg))) == cfg
