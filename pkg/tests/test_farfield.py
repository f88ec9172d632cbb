"""Far-field metric tests on synthetic patterns, plus solver-backed
rotation equivariance."""

import math

import numpy as np
import pytest

from glantenna.constants import ETA0
from glantenna.errors import DomainError, ExtractionError
from glantenna.farfield import (
    FarFieldPattern,
    NtffSurface,
    beam_peak,
    directivity_and_gain,
    front_to_back,
    normalize_pattern,
    ntff_transform,
    radiated_power,
)


def make_pattern(e_theta_fn, theta_step=2.0, phi_step=2.0, f=5.5e9):
    theta = np.arange(0.0, 180.0 + 0.5 * theta_step, theta_step)
    phi = np.arange(0.0, 360.0, phi_step)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    e_theta = np.asarray(e_theta_fn(np.radians(tt), np.radians(pp)), dtype=complex)
    return FarFieldPattern(
        f=f, theta_deg=theta, phi_deg=phi, e_theta=e_theta, e_phi=np.zeros_like(e_theta)
    )


class TestQuadratureAndDirectivity:
    def test_isotropic_is_zero_dbi(self):
        p = make_pattern(lambda t, ph: np.ones_like(t))
        m = directivity_and_gain(p, accepted_power=radiated_power(p))
        assert abs(m.directivity_dbi) <= 0.05

    def test_sin_theta_is_1p76_dbi(self):
        p = make_pattern(lambda t, ph: np.sin(t))
        m = directivity_and_gain(p, accepted_power=radiated_power(p))
        assert m.directivity_dbi == pytest.approx(1.7609, abs=0.05)

    def test_quadrature_convergence(self):
        d_coarse = directivity_and_gain(
            make_pattern(lambda t, ph: np.sin(t), 2.0, 2.0), 1.0
        ).directivity_dbi
        d_fine = directivity_and_gain(
            make_pattern(lambda t, ph: np.sin(t), 1.0, 1.0), 1.0
        ).directivity_dbi
        assert abs(d_fine - d_coarse) < 0.02

    def test_gain_uses_accepted_power(self):
        p = make_pattern(lambda t, ph: np.sin(t))
        p_rad = radiated_power(p)
        m = directivity_and_gain(p, accepted_power=2.0 * p_rad)
        assert m.gain_dbi == pytest.approx(m.directivity_dbi - 10.0 * math.log10(2.0), abs=1e-9)
        assert m.gain_dbi <= m.directivity_dbi + 1e-9

    def test_zero_pattern_rejected(self):
        p = make_pattern(lambda t, ph: np.zeros_like(t))
        with pytest.raises(ExtractionError):
            directivity_and_gain(p, accepted_power=1.0)
        with pytest.raises(DomainError):
            directivity_and_gain(make_pattern(lambda t, ph: np.sin(t)), accepted_power=0.0)


class TestBeamPeak:
    def test_sin_theta_tie_breaks_to_phi_zero(self):
        p = make_pattern(lambda t, ph: np.sin(t))
        assert beam_peak(p) == (90.0, 0.0)

    def test_pencil_beam_location(self):
        def pencil(t, ph):
            return np.where(
                (np.abs(np.degrees(t) - 30.0) < 1e-9) & (np.abs(np.degrees(ph) - 135.0) < 1e-9),
                1.0,
                1e-6,
            )

        assert beam_peak(make_pattern(pencil, phi_step=1.0)) == (30.0, 135.0)

    def test_flat_pattern_has_no_peak(self):
        with pytest.raises(ExtractionError, match="no distinct peak"):
            beam_peak(make_pattern(lambda t, ph: np.ones_like(t)))


class TestFrontToBack:
    def test_point_symmetric_pattern_is_zero_db(self):
        # symmetric under (theta, phi) -> (180 - theta, phi + 180)
        p = make_pattern(lambda t, ph: 1.0 + 0.3 * np.sin(t) * np.cos(2.0 * ph))
        assert front_to_back(p) == pytest.approx(0.0, abs=1e-9)

    def test_constructed_back_lobe_ten_db(self):
        def lobes(t, ph):
            out = np.full_like(t, 1e-3)
            front = (np.abs(np.degrees(t) - 40.0) < 1e-9) & (np.abs(np.degrees(ph) - 60.0) < 1e-9)
            back = (np.abs(np.degrees(t) - 140.0) < 1e-9) & (np.abs(np.degrees(ph) - 240.0) < 1e-9)
            out = np.where(front, 1.0, out)
            out = np.where(back, math.sqrt(0.1), out)
            return out

        assert front_to_back(make_pattern(lobes)) == pytest.approx(10.0, abs=1e-9)


class TestNormalizePattern:
    def test_peak_is_exactly_zero_db(self):
        n = normalize_pattern(make_pattern(lambda t, ph: np.sin(t)))
        assert n.db.max() == 0.0
        assert np.count_nonzero(n.db == 0.0) == 1
        assert np.all(n.db <= 0.0)

    def test_scaling_invariance(self):
        a = normalize_pattern(make_pattern(lambda t, ph: np.sin(t)))
        b = normalize_pattern(make_pattern(lambda t, ph: 7.0 * np.sin(t)))
        assert np.allclose(a.db, b.db, atol=1e-12)

    def test_idempotent_through_round_trip(self):
        n = normalize_pattern(make_pattern(lambda t, ph: np.sin(t) + 0.2 * np.cos(ph) ** 2))
        p2 = FarFieldPattern(
            f=n.f,
            theta_deg=n.theta_deg,
            phi_deg=n.phi_deg,
            e_theta=np.sqrt(2 * ETA0) * 10.0 ** (n.db / 20.0),
            e_phi=np.zeros_like(n.db, dtype=complex),
        )
        n2 = normalize_pattern(p2)
        assert np.allclose(n.db, n2.db, atol=1e-9)
        assert n2.peak == n.peak

    def test_cuts_pass_through_peak(self):
        n = normalize_pattern(make_pattern(lambda t, ph: np.sin(t)))
        assert n.phi_cut().max() == 0.0
        assert n.theta_cut().max() == 0.0
        assert len(n.phi_cut()) == len(n.theta_deg)
        assert len(n.theta_cut()) == len(n.phi_deg)

    def test_zero_pattern_rejected(self):
        with pytest.raises(ExtractionError):
            normalize_pattern(make_pattern(lambda t, ph: np.zeros_like(t)))


class TestNtffSurface:
    def test_zero_accumulators_give_zero_pattern(self):
        surf = NtffSurface((4, 12, 4, 12, 4, 12), [5.5e9], dt=1e-12, delta=1e-3)
        pat = ntff_transform(surf, 5.5e9)
        assert not np.abs(pat.e_theta).any()
        assert not np.abs(pat.e_phi).any()

    def test_unrecorded_frequency_raises(self):
        surf = NtffSurface((4, 12, 4, 12, 4, 12), [5.5e9], dt=1e-12, delta=1e-3)
        with pytest.raises(ExtractionError, match="not recorded"):
            ntff_transform(surf, 6.0e9)

    def test_degenerate_box_rejected(self):
        with pytest.raises(DomainError):
            NtffSurface((4, 4, 4, 12, 4, 12), [5.5e9], dt=1e-12, delta=1e-3)


class TestRotationEquivariance:
    def test_quarter_turn_shifts_phi(self):
        # an asymmetric pair of crossed dipoles, then the same sources
        # rotated 90 degrees about z; patterns must match with phi shifted
        from glantenna.fdtd import FieldState, SimConfig, SoftSource, init_coeffs, step
        from glantenna.ports import SourceWaveform
        from glantenna.voxelize import vacuum_grid

        f0 = 10e9
        n = 56

        def pattern(rotated):
            grid = vacuum_grid(n, n, n, delta=1e-3, pml_thickness=10)
            cfg = SimConfig(delta=1e-3, precision="double")
            coeffs = init_coeffs(grid, cfg)
            fields = FieldState.zeros(n, n, n, cfg.resolved_dt, cfg.dtype)
            w = SourceWaveform(f0=f0, f_bw=5e9)
            c = n // 2
            if not rotated:
                sources = [
                    SoftSource("ez", c, c, c, w),
                    SoftSource("ex", c + 3, c, c, w, amplitude=0.6),
                ]
            else:
                # (x, y) -> (-y, x): the x-directed dipole becomes y-directed
                sources = [
                    SoftSource("ez", c, c, c, w),
                    SoftSource("ey", c, c + 3, c, w, amplitude=0.6),
                ]
            surf = NtffSurface((14, 42, 14, 42, 14, 42), [f0], cfg.resolved_dt, grid.delta)
            for _ in range(2800):
                step(fields, coeffs, sources=sources, recorders=[surf])
            return ntff_transform(surf, f0, 5.0, 5.0)

        a = pattern(False)
        b = pattern(True)
        ua, ub = a.intensity(), b.intensity()
        shift = int(round(90.0 / 5.0))
        ub_shifted = np.roll(ub, -shift, axis=1)
        assert np.max(np.abs(ua - ub_shifted)) <= 0.01 * ua.max()
