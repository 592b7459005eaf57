"""Detuning maps, dip extraction, LA/LR classification, periodicity."""

import numpy as np
import pytest

import magline as mg
from magline.errors import ScenarioError

OMEGA_C = 10000.0
PHASES = (0.0, np.pi / 2, np.pi, 3 * np.pi / 2, 2 * np.pi)


class TestDetuningMap:
    def test_single_mode_maps_identical_at_phase_and_phase_plus_pi(self):
        cfg = mg.reference_config("single_coupled")
        dc = np.linspace(-600.0, 600.0, 241)
        dm = np.linspace(-150.0, 150.0, 31)
        a = mg.detuning_map(cfg, phase_a=0.0, delta_c=dc, delta_m=dm)
        b = mg.detuning_map(cfg, phase_a=np.pi, delta_c=dc, delta_m=dm)
        assert np.max(np.abs(a.magnitude - b.magnitude)) < 1e-10

    def test_single_delta_m_degenerates_to_spectrum(self):
        cfg = mg.reference_config("multi_coupled")
        dc = np.linspace(-400.0, 400.0, 201)
        grid = mg.detuning_map(cfg, phase_a=0.4, delta_c=dc, delta_m=np.array([25.0]))
        assert grid.magnitude.shape == (201, 1)
        spectrum = mg.transmission_spectrum(
            mg.with_detuning(cfg, 25.0), OMEGA_C + dc, phase_a=0.4
        )
        assert np.allclose(grid.column(0).magnitude, spectrum.magnitude, atol=1e-14)

    def test_map_is_reproducible(self):
        cfg = mg.reference_config("multi_coupled")
        dc = np.linspace(-300.0, 300.0, 101)
        dm = np.linspace(-100.0, 100.0, 21)
        a = mg.detuning_map(cfg, phase_a=np.pi, delta_c=dc, delta_m=dm, critical=True)
        b = mg.detuning_map(cfg, phase_a=np.pi, delta_c=dc, delta_m=dm, critical=True)
        assert np.array_equal(a.magnitude, b.magnitude)

    def test_requires_coupled(self):
        with pytest.raises(ScenarioError):
            mg.detuning_map(mg.reference_config("single_cavity"))


class TestClassification:
    def test_multi_critical_sequence(self):
        cfg = mg.reference_config("multi_coupled")
        labels = {
            phi: mg.classify_coupling(cfg, phase_a=phi, critical=True) for phi in PHASES
        }
        assert labels[0.0].label == "attraction"
        assert labels[np.pi].label == "repulsion"
        assert labels[np.pi].strong is True
        assert labels[2 * np.pi].label == "attraction"

    def test_multi_natural_never_strong(self):
        cfg = mg.reference_config("multi_coupled")
        for phi in PHASES:
            assert mg.classify_coupling(cfg, phase_a=phi).strong is False

    def test_single_mode_never_strong(self):
        cfg = mg.reference_config("single_coupled")
        for phi in PHASES:
            for critical in (False, True):
                cls = mg.classify_coupling(cfg, phase_a=phi, critical=critical)
                assert cls.strong is False

    def test_zero_coupling_unresolved(self):
        cavity = mg.OscillatorParams(OMEGA_C, 17.0, ((350.0, 350.0),))
        magnon = mg.OscillatorParams(OMEGA_C, 1.0, ((0.0, 0.0),))
        cfg = mg.validate(mg.SystemConfig(
            cavity=cavity, magnon=magnon, waveguide=(mg.WaveguideMode(0.0, 1.0),)
        ))
        cls = mg.classify_coupling(cfg, phase_a=0.0)
        assert cls.label == "unresolved"
        assert cls.strong is False

    def test_repulsion_label_matches_map_appearance(self):
        # two resolved dips separating in the drive detuning at the
        # center of the sweep, for the repulsive configuration
        cfg = mg.reference_config("multi_coupled")
        cls = mg.classify_coupling(cfg, phase_a=np.pi, critical=True)
        assert cls.label == "repulsion"
        spectrum = mg.transmission_spectrum(
            mg.with_detuning(cfg, 0.0),
            OMEGA_C + np.linspace(-100, 100, 2001),
            phase_a=np.pi,
            critical=True,
        )
        dips = [d for d in mg.find_dips(spectrum, prominence=0.05)]
        assert len(dips) == 2
        gap = abs(dips[1].freq - dips[0].freq)
        assert gap == pytest.approx(cls.center_gap, rel=0.15)

    def test_requires_coupled_and_enough_points(self):
        with pytest.raises(ScenarioError):
            mg.classify_coupling(mg.reference_config("multi_cavity"), phase_a=0.0)
        with pytest.raises(ScenarioError):
            mg.classify_coupling(
                mg.reference_config("multi_coupled"), phase_a=0.0,
                delta_m=np.array([0.0, 1.0]),
            )


class TestFindDips:
    def test_critical_cavity_has_unit_depth_dip_at_resonance(self):
        cfg = mg.reference_config("single_cavity")
        spectrum = mg.transmission_spectrum(cfg, OMEGA_C + np.linspace(-800, 800, 1601),
                                            critical=True)
        dips = mg.find_dips(spectrum, prominence=0.5)
        assert len(dips) == 1
        assert dips[0].freq == pytest.approx(OMEGA_C, abs=0.1)
        assert dips[0].depth == pytest.approx(1.0, abs=1e-6)

    def test_synthetic_lorentzian_recovery(self):
        freqs = np.linspace(-100.0, 100.0, 2001)
        center, hwhm, depth = 13.0, 17.0, 0.6
        mag = 1.0 - depth * hwhm**2 / ((freqs - center) ** 2 + hwhm**2)
        dips = mg.find_dips(mg.Spectrum(freqs, mag.astype(complex)), prominence=0.3)
        assert len(dips) == 1
        step = freqs[1] - freqs[0]
        assert abs(dips[0].freq - center) < step / 10
        assert dips[0].linewidth == pytest.approx(2 * hwhm, rel=0.02)
        assert dips[0].depth == pytest.approx(depth, rel=0.02)

    def test_flat_spectrum_has_no_dips(self):
        freqs = np.linspace(0.0, 1.0, 101)
        spectrum = mg.Spectrum(freqs, np.ones(101, dtype=complex))
        assert mg.find_dips(spectrum, prominence=0.01) == []


class TestPhasePeriodicity:
    def test_single_mode_period_pi(self):
        cfg = mg.reference_config("single_coupled", delta_m=30.0)
        period, residual = mg.phase_periodicity(
            cfg,
            omegas=OMEGA_C + np.linspace(-600, 600, 401),
            phi_grid=np.linspace(0.0, 2 * np.pi, 9),
        )
        assert period == pytest.approx(np.pi)
        assert residual < 1e-10

    def test_multi_mode_rejects_pi(self):
        cfg = mg.reference_config("multi_coupled", delta_m=30.0)
        period, residual = mg.phase_periodicity(
            cfg,
            omegas=OMEGA_C + np.linspace(-600, 600, 401),
            phi_grid=np.linspace(0.0, 2 * np.pi, 9),
            candidates=(np.pi,),
        )
        assert residual > 0.01

    def test_fully_decoupled_line_accepts_any_period(self):
        cavity = mg.OscillatorParams(OMEGA_C, 17.0, ((0.0, 0.0),))
        magnon = mg.OscillatorParams(OMEGA_C, 1.0, ((0.0, 0.0),))
        cfg = mg.validate(mg.SystemConfig(
            cavity=cavity, magnon=magnon, waveguide=(mg.WaveguideMode(0.0, 1.0),)
        ))
        period, residual = mg.phase_periodicity(
            cfg,
            omegas=OMEGA_C + np.linspace(-100, 100, 51),
            phi_grid=np.linspace(0.0, 2 * np.pi, 5),
        )
        assert period == pytest.approx(np.pi)
        assert residual < 1e-12
