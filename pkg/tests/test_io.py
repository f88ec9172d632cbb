"""Touchstone and pattern-file writer tests."""

import numpy as np
import pytest

from glantenna.farfield import FarFieldPattern, directivity_and_gain, radiated_power
from glantenna.io_files import read_touchstone, write_pattern_csv, write_touchstone
from glantenna.ports import PortSpectra


def spectra(freqs, s11, z_ref=50.0):
    freqs = np.asarray(freqs, dtype=float)
    s11 = np.asarray(s11, dtype=complex)
    ones = np.ones(freqs.size, dtype=complex)
    return PortSpectra(
        freqs=freqs, v=s11.copy(), i=ones, z=ones, s11=s11,
        valid=np.ones(freqs.size, dtype=bool), z_ref=z_ref,
    )


class TestTouchstone:
    def test_option_line_and_zero_row(self, tmp_path):
        s = spectra([5.5e9], [0.0 + 0.0j])
        path = write_touchstone(s, tmp_path / "a.s1p", label="L2")
        lines = path.read_text().splitlines()
        assert "# GHz S RI R 50" in lines
        data = [ln for ln in lines if ln and not ln.startswith(("!", "#"))]
        assert data == ["5.5 0.000000000000e+00 0.000000000000e+00"]
        assert any(ln.startswith("! state: L2") for ln in lines)

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        freqs = np.linspace(2e9, 9e9, 40)
        vals = rng.normal(size=40) * 0.3 + 1j * rng.normal(size=40) * 0.3
        path = write_touchstone(spectra(freqs, vals), tmp_path / "rt.s1p")
        f2, v2, z_ref = read_touchstone(path)
        assert z_ref == 50.0
        assert f2 == pytest.approx(freqs, rel=1e-9)
        assert v2 == pytest.approx(vals, rel=1e-9)

    def test_frequencies_written_ascending(self, tmp_path):
        freqs = np.array([6e9, 2e9, 4e9])
        path = write_touchstone(spectra(freqs, [0.1, 0.2, 0.3]), tmp_path / "o.s1p")
        f2, v2, _ = read_touchstone(path)
        assert list(f2) == sorted(f2)
        assert v2[0] == pytest.approx(0.2)

    def test_byte_determinism(self, tmp_path):
        s = spectra(np.linspace(2e9, 9e9, 11), np.full(11, 0.25 - 0.1j))
        a = write_touchstone(s, tmp_path / "a.s1p", label="x").read_bytes()
        b = write_touchstone(s, tmp_path / "b.s1p", label="x").read_bytes()
        assert a == b


def sin_theta_pattern(theta_step=2.0, phi_step=2.0):
    theta = np.arange(0.0, 180.0 + 0.5 * theta_step, theta_step)
    phi = np.arange(0.0, 360.0, phi_step)
    tt, _ = np.meshgrid(np.radians(theta), np.radians(phi), indexing="ij")
    e = np.sin(tt).astype(complex)
    return FarFieldPattern(f=5.5e9, theta_deg=theta, phi_deg=phi, e_theta=e, e_phi=np.zeros_like(e))


class TestPatternCsv:
    def test_row_count_and_normalization(self, tmp_path):
        p = sin_theta_pattern()
        m = directivity_and_gain(p, accepted_power=radiated_power(p))
        path = write_pattern_csv(p, m, tmp_path / "pat.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "theta_deg,phi_deg,gain_dbi,normalized_db"
        assert len(lines) - 1 == 91 * 180
        norm = np.array([float(ln.split(",")[3]) for ln in lines[1:]])
        assert norm.max() == 0.0
        # theta-major ordering: first 180 rows share theta = 0
        assert all(ln.startswith("0,") for ln in lines[1:181])

    def test_sidecar_summary(self, tmp_path):
        import json

        p = sin_theta_pattern()
        m = directivity_and_gain(p, accepted_power=radiated_power(p))
        write_pattern_csv(p, m, tmp_path / "pat.csv", summary_extra={"matched_beam": "B2"})
        sidecar = json.loads((tmp_path / "pat.json").read_text())
        assert sidecar["matched_beam"] == "B2"
        assert sidecar["directivity_dbi"] == pytest.approx(m.directivity_dbi)
