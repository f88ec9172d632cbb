"""Beam matching and report assembly on synthetic state results."""

import numpy as np
import pytest

from glantenna.config import parse_config
from glantenna.farfield import PatternMetrics
from glantenna.runner import StateResult, beam_map_report, match_beam


def cfg_with(states):
    import json

    return parse_config(json.dumps({"preset": "paper-table1", "states": states}))


def fake_result(label, azimuth, f_res=5.5e9, gain=6.0):
    m = PatternMetrics(
        gain_dbi=gain,
        directivity_dbi=gain + 0.2,
        peak=(40.0, azimuth),
        front_to_back_db=12.0,
        radiated_power=1.0,
        accepted_power=1.1,
    )
    return StateResult(
        label=label,
        resonance_hz=f_res,
        metrics={5.5e9: m},
        termination="decayed",
        steps=1000,
    )


class TestMatchBeam:
    def test_nearest_within_tolerance(self):
        assert match_beam(10.0, 15.0) == "B2"
        assert match_beam(352.0, 15.0) == "B2"  # wraps through 0
        assert match_beam(38.0, 15.0) == "B3"
        assert match_beam(308.0, 15.0) == "B1"

    def test_outside_tolerance_unmatched(self):
        assert match_beam(200.0, 15.0) is None
        assert match_beam(90.0, 15.0) is None

    def test_tolerance_knob(self):
        assert match_beam(200.0, 25.0) == "B5"


class TestBeamMapReport:
    def test_full_bijection(self):
        azimuths = {"L2": 8.0, "L3": 44.0, "L4": 130.0, "L5": 186.0, "L6": 222.0, "L1": 310.0}
        results = [fake_result(lb, az, f_res=5.4e9 + i * 1e7) for i, (lb, az) in enumerate(azimuths.items())]
        cfg = cfg_with(list(azimuths))
        report = beam_map_report(results, cfg)
        assert report["bijection"] is True
        matched = {e["state"]: e["matched_beam"] for e in report["entries"]}
        assert matched == {"L2": "B2", "L3": "B3", "L4": "B4", "L5": "B5", "L6": "B6", "L1": "B1"}
        spread = report["stability"]["max_pairwise_deviation_pct"]
        assert spread == pytest.approx(5e7 * 5 / np.mean(list(5.4e9 + np.arange(6) * 1e7)) * 100, rel=1e-9)

    def test_duplicate_beam_breaks_bijection(self):
        azimuths = {"L2": 8.0, "L3": 2.0, "L4": 130.0, "L5": 186.0, "L6": 222.0, "L1": 310.0}
        results = [fake_result(lb, az) for lb, az in azimuths.items()]
        report = beam_map_report(results, cfg_with(list(azimuths)))
        assert report["bijection"] is False

    def test_unmatched_marked(self):
        results = [fake_result("L2", 90.0)]
        report = beam_map_report(results, cfg_with(["L2"]))
        assert report["entries"][0]["matched_beam"] == "unmatched"
        assert report["bijection"] is False

    def test_singleton_has_no_pairwise_stability(self):
        report = beam_map_report([fake_result("L2", 2.0)], cfg_with(["L2"]))
        assert "max_pairwise_deviation_pct" not in report.get("stability", {})

    def test_error_entry_recorded(self):
        bad = StateResult(label="L3", error="GeometryError: boom")
        report = beam_map_report([fake_result("L2", 2.0), bad], cfg_with(["L2", "L3"]))
        errs = [e for e in report["entries"] if "error" in e]
        assert len(errs) == 1 and errs[0]["state"] == "L3"
        assert report["bijection"] is False
