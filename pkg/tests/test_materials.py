"""Material model tests.

Frozen reference numbers were produced by an independent mpmath evaluation
(50 digits, CODATA 2018 constants) of the closed forms; see the inline
oracle helpers, which re-derive the same values at float precision.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glantenna.constants import EPS0, HBAR, K_B, Q_E
from glantenna.errors import ConfigError, DomainError
from glantenna.materials import (
    DielectricSpec,
    GrapheneSpec,
    MaterialSpec,
    _kubo_intraband_raw,
    dielectric_loss_sigma,
    graphene_material,
    kubo_intraband,
    sheet_to_bulk,
    solver_constants,
)

# mpmath oracle, mu_c=0.5 eV, tau=1 ps, T=300 K, f=5.5 GHz
KUBO_REF = 0.058786913133280822 + 0.0020315298786941e0 * 1j
# KUBO_REF / 3 mm
BULK_REF = 19.595637711093607 + 0.67717662623136667j
# 2*pi*5.5e9*eps0*2.9*0.0025, eps0 per CODATA 2022
SIGMA_EQ_LCP = 0.0022183460495524437


def oracle_kubo(mu_c_ev, tau, temperature, f):
    """Direct float re-evaluation of the closed form, kept independent of
    the implementation's factoring."""
    kt = K_B * temperature
    x = Q_E * mu_c_ev / kt
    bracket = x + 2.0 * math.log1p(math.exp(-x))
    pref = Q_E**2 * kt / (math.pi * HBAR**2)
    w = 2.0 * math.pi * f
    return pref * (tau / (1.0 - 1j * w * tau)) * bracket


class TestKuboIntraband:
    def test_frozen_reference_value(self):
        spec = GrapheneSpec(mu_c=0.5, tau=1e-12, temperature=300.0)
        got = kubo_intraband(spec, 5.5e9)
        assert got == pytest.approx(KUBO_REF, rel=1e-12)
        # the inline oracle reproduces the frozen constant too
        assert oracle_kubo(0.5, 1e-12, 300.0, 5.5e9) == pytest.approx(KUBO_REF, rel=1e-12)

    def test_zero_mu_c_dc_closed_form(self):
        # mu_c = 0 collapses the bracket to 2 ln 2; f = 0 is purely real
        for temperature in (77.0, 300.0, 600.0):
            spec = GrapheneSpec(mu_c=0.0, tau=1e-12, temperature=temperature)
            got = kubo_intraband(spec, 0.0)
            want = Q_E**2 * K_B * temperature * 1e-12 / (math.pi * HBAR**2) * 2.0 * math.log(2.0)
            assert got.imag == 0.0
            assert got.real == pytest.approx(want, rel=1e-12)

    def test_drude_rolloff_monotone(self):
        spec = GrapheneSpec(mu_c=0.5, tau=1e-12, temperature=300.0)
        f_knee = 1.0 / (2.0 * math.pi * spec.tau)
        freqs = np.geomspace(f_knee, 1e4 * f_knee, 40)
        mags = [abs(kubo_intraband(spec, f)) for f in freqs]
        assert all(a > b for a, b in zip(mags, mags[1:]))
        assert mags[-1] < 1e-3 * mags[0]

    def test_dc_value_purely_real(self):
        got = kubo_intraband(GrapheneSpec(mu_c=0.3), 0.0)
        assert got.imag == 0.0
        assert got.real > 0.0

    def test_rejects_bad_inputs(self):
        spec = GrapheneSpec()
        with pytest.raises(DomainError):
            kubo_intraband(spec, float("nan"))
        with pytest.raises(DomainError):
            kubo_intraband(spec, -1.0)
        with pytest.raises(DomainError):
            GrapheneSpec(tau=0.0)
        with pytest.raises(DomainError):
            GrapheneSpec(temperature=-3.0)
        with pytest.raises(DomainError):
            GrapheneSpec(mu_c=-0.1)
        with pytest.raises(DomainError):
            GrapheneSpec(model="bulk", bulk_sigma_override=None, thickness=-1.0)

    @given(
        mu_c=st.floats(0.0, 2.0),
        tau=st.floats(1e-15, 1e-11),
        temperature=st.floats(1.0, 1000.0),
        f=st.floats(0.0, 1e14),
    )
    @settings(max_examples=200)
    def test_passivity(self, mu_c, tau, temperature, f):
        spec = GrapheneSpec(mu_c=mu_c, tau=tau, temperature=temperature)
        assert kubo_intraband(spec, f).real >= 0.0

    @given(
        mu_c=st.floats(0.0, 2.0),
        tau=st.floats(1e-15, 1e-11),
        temperature=st.floats(1.0, 1000.0),
        f=st.floats(1e3, 1e14),
    )
    @settings(max_examples=200)
    def test_hermitian_symmetry(self, mu_c, tau, temperature, f):
        w = 2.0 * math.pi * f
        plus = _kubo_intraband_raw(mu_c, tau, temperature, w)
        minus = _kubo_intraband_raw(mu_c, tau, temperature, -w)
        assert minus == pytest.approx(plus.conjugate(), rel=1e-14)

    def test_low_frequency_limit(self):
        # |sigma| is flat to O((w*tau)^2) near DC; the imaginary part grows
        # linearly in w*tau, so the limit check is on the magnitude.
        spec = GrapheneSpec(mu_c=0.5, tau=1e-12, temperature=300.0)
        s0 = abs(kubo_intraband(spec, 0.0))
        f = 1e-4 / (2.0 * math.pi * spec.tau)  # 2*pi*f*tau = 1e-4
        assert abs(abs(kubo_intraband(spec, f)) - s0) / s0 <= 1e-6

    def test_degenerate_bracket_limit(self):
        # mu_c/(kB*T) >= 40: the log1p term must vanish below 1e-12 relative
        for x in (40.0, 80.0, 400.0):
            temperature = 300.0
            mu_c = x * K_B * temperature / Q_E
            got = _kubo_intraband_raw(mu_c, 1e-12, temperature, 0.0).real
            # extended-precision limit: bracket -> x exactly as exp(-x) -> 0
            want = Q_E**2 * K_B * temperature * 1e-12 / (math.pi * HBAR**2) * x
            assert got == pytest.approx(want, rel=1e-12)


class TestSheetToBulk:
    def test_identity_thickness(self):
        assert sheet_to_bulk(1.0 + 0.0j, 1.0) == 1.0 + 0.0j

    @given(
        re=st.floats(0.0, 1e3),
        im=st.floats(-1e3, 1e3),
        t=st.floats(1e-9, 1.0),
    )
    @settings(max_examples=100)
    def test_round_trip(self, re, im, t):
        s = complex(re, im)
        assert sheet_to_bulk(s, t) * t == pytest.approx(s, rel=1e-15, abs=1e-300)

    def test_frozen_channel_value(self):
        spec = GrapheneSpec(mu_c=0.5, tau=1e-12, temperature=300.0)
        got = sheet_to_bulk(kubo_intraband(spec, 5.5e9), 3e-3)
        assert got == pytest.approx(BULK_REF, rel=1e-12)

    def test_rejects_nonpositive_thickness(self):
        with pytest.raises(DomainError):
            sheet_to_bulk(1.0, 0.0)
        with pytest.raises(DomainError):
            sheet_to_bulk(1.0, -2e-3)


class TestDielectricLossSigma:
    def test_lossless(self):
        spec = DielectricSpec(eps_r=4.0, tan_delta=0.0)
        assert dielectric_loss_sigma(spec, 1e9) == 0.0

    def test_frozen_lcp_value(self):
        spec = DielectricSpec(eps_r=2.9, tan_delta=0.0025)
        assert dielectric_loss_sigma(spec, 5.5e9) == pytest.approx(SIGMA_EQ_LCP, rel=1e-12)

    def test_linear_in_frequency(self):
        spec = DielectricSpec(eps_r=2.55, tan_delta=0.002)
        assert dielectric_loss_sigma(spec, 2e9) == pytest.approx(
            2.0 * dielectric_loss_sigma(spec, 1e9), rel=1e-15
        )

    def test_rejects_nonpositive_frequency(self):
        spec = DielectricSpec(eps_r=2.9, tan_delta=0.0025)
        with pytest.raises(DomainError):
            dielectric_loss_sigma(spec, 0.0)

    def test_spec_invariants(self):
        with pytest.raises(DomainError):
            DielectricSpec(eps_r=0.5)
        with pytest.raises(DomainError):
            DielectricSpec(eps_r=2.0, tan_delta=-0.1)
        with pytest.raises(DomainError):
            DielectricSpec(eps_r=2.0, f_ref=0.0)


class TestMaterialSpec:
    def test_factories_and_invariants(self):
        assert MaterialSpec.vacuum().kind == "vacuum"
        assert MaterialSpec.pec().kind == "pec"
        with pytest.raises(DomainError):
            MaterialSpec.bulk_conductor(0.0)
        with pytest.raises(DomainError):
            MaterialSpec.sheet_conductor(-1.0 + 0.0j)
        with pytest.raises(ConfigError):
            MaterialSpec(kind="plasma")

    def test_solver_constants(self):
        f = 5.5e9
        assert solver_constants(MaterialSpec.vacuum(), f) == (1.0, 0.0, False)
        assert solver_constants(MaterialSpec.pec(), f) == (1.0, 0.0, True)
        eps_r, sig, is_pec = solver_constants(
            MaterialSpec.from_dielectric(DielectricSpec(eps_r=2.9, tan_delta=0.0025)), f
        )
        assert (eps_r, is_pec) == (2.9, False)
        assert sig == pytest.approx(SIGMA_EQ_LCP, rel=1e-12)
        # conductor below / above the PEC collapse threshold
        assert solver_constants(MaterialSpec.bulk_conductor(1e6), f) == (1.0, 1e6, False)
        assert solver_constants(MaterialSpec.bulk_conductor(1e9), f)[2] is True
        with pytest.raises(ConfigError):
            solver_constants(MaterialSpec.sheet_conductor(0.05 + 0.002j), f)

    def test_graphene_material_paths(self):
        # default: pinned bulk conductivity
        assert graphene_material(GrapheneSpec()).sigma == 1.0e6
        # kubo-derived bulk path
        spec = GrapheneSpec(bulk_sigma_override=None, thickness=3e-3)
        mat = graphene_material(spec, 5.5e9)
        assert mat.kind == "bulk_conductor"
        assert mat.sigma == pytest.approx(BULK_REF.real, rel=1e-12)
        # sheet path keeps the complex sheet value
        sheet = graphene_material(GrapheneSpec(model="sheet"), 5.5e9)
        assert sheet.kind == "sheet_conductor"
        assert sheet.sigma_s == pytest.approx(KUBO_REF, rel=1e-12)
