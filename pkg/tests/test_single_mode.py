"""Single-mode engine: bare-cavity transmission, the coupled system,
pi-periodicity, and the cooperativity bound."""

import numpy as np
import pytest

import magline as mg
from magline.errors import ScenarioError

OMEGA_C = 10000.0
GRID = OMEGA_C + np.linspace(-800.0, 800.0, 1601)


def test_critical_zero_on_resonance():
    cfg = mg.reference_config("single_cavity")
    assert abs(mg.s21_cavity_single(OMEGA_C, cfg, critical=True)) < 1e-12


def test_decoupled_resonator_transmits_unity():
    cavity = mg.OscillatorParams(OMEGA_C, 17.0, ((0.0, 0.0),))
    cfg = mg.validate(mg.SystemConfig(cavity=cavity, waveguide=(mg.WaveguideMode(0.0, 1.0),)))
    values = mg.s21_cavity_single(GRID, cfg)
    assert np.allclose(values, 1.0, rtol=0, atol=0)


def test_on_resonance_reference_value():
    # direct evaluation: 1 - 350/(17 + 350) = 17/367
    cfg = mg.reference_config("single_cavity")
    assert mg.s21_cavity_single(OMEGA_C, cfg) == pytest.approx(17.0 / 367.0, abs=1e-12)


def test_cavity_phase_is_overall_factor():
    cfg0 = mg.reference_config("single_cavity", phase_a=0.0)
    cfg1 = mg.reference_config("single_cavity", phase_a=1.23)
    a = mg.s21_cavity_single(GRID, cfg0)
    b = mg.s21_cavity_single(GRID, cfg1)
    assert np.max(np.abs(np.abs(a) - np.abs(b))) < 1e-14


def test_scenario_guards():
    coupled = mg.reference_config("single_coupled")
    with pytest.raises(ScenarioError):
        mg.s21_cavity_single(OMEGA_C, coupled)
    multi = mg.reference_config("multi_cavity")
    with pytest.raises(ScenarioError):
        mg.s21_cavity_single(OMEGA_C, multi)
    with pytest.raises(ScenarioError):
        mg.build_coupled_single(mg.reference_config("single_cavity"), 0.0)


def test_build_coupled_reference_offdiagonals():
    cfg = mg.reference_config("single_coupled")
    system = mg.build_coupled_single(cfg, 0.0)
    expected = -np.sqrt(8.0 * 350.0)  # direct arithmetic from the reference rates
    assert system.matrix[0, 1] == pytest.approx(expected, abs=1e-12)
    assert system.matrix[1, 0] == pytest.approx(expected, abs=1e-12)
    assert system.matrix[0, 0] == pytest.approx(1j * OMEGA_C - 9.0, abs=1e-12)
    assert system.matrix[1, 1] == pytest.approx(1j * OMEGA_C - 367.0, abs=1e-12)
    assert system.drive[0] == pytest.approx(np.sqrt(8.0))
    assert system.drive[1] == pytest.approx(np.sqrt(350.0))


def test_build_coupled_decoupled_magnon_row():
    cavity = mg.OscillatorParams(OMEGA_C, 17.0, ((350.0, 350.0),))
    magnon = mg.OscillatorParams(OMEGA_C, 1.0, ((0.0, 0.0),))
    cfg = mg.validate(
        mg.SystemConfig(cavity=cavity, magnon=magnon, waveguide=(mg.WaveguideMode(0.0, 1.0),))
    )
    system = mg.build_coupled_single(cfg, 0.4)
    assert system.matrix[0, 1] == 0
    assert system.matrix[1, 0] == 0
    assert system.drive[0] == 0


def test_build_coupled_phase_pi_flips_offdiagonal_sign():
    cfg = mg.reference_config("single_coupled")
    s0 = mg.build_coupled_single(cfg, 0.0)
    s1 = mg.build_coupled_single(cfg, np.pi)
    assert s1.matrix[0, 1] == pytest.approx(-s0.matrix[0, 1], abs=1e-10)
    assert s1.matrix[1, 0] == pytest.approx(-s0.matrix[1, 0], abs=1e-10)


def test_offdiagonals_share_propagation_factor_for_asymmetric_rates():
    # forward/backward asymmetry keeps the common phase factor intact
    cavity = mg.OscillatorParams(OMEGA_C, 17.0, ((370.0, 326.0),))
    magnon = mg.OscillatorParams(OMEGA_C, 0.8, ((7.0, 8.0),))
    cfg = mg.validate(
        mg.SystemConfig(cavity=cavity, magnon=magnon, waveguide=(mg.WaveguideMode(0.0, 1.0),))
    )
    phase = 0.77
    system = mg.build_coupled_single(cfg, phase)
    p = np.exp(-1j * phase)
    assert system.matrix[0, 1] == pytest.approx(-p * np.sqrt(326.0 * 8.0), abs=1e-10)
    assert system.matrix[1, 0] == pytest.approx(-p * np.sqrt(7.0 * 370.0), abs=1e-10)
    assert cfg.kappa_m == pytest.approx((7.0 + 8.0) / 2)
    assert cfg.kappa_c == pytest.approx((326.0 + 370.0) / 2)


def test_coupled_decoupled_limit_equals_cavity_only():
    cavity = mg.OscillatorParams(OMEGA_C, 17.0, ((350.0, 350.0),))
    magnon = mg.OscillatorParams(OMEGA_C + 30.0, 1.0, ((0.0, 0.0),))
    phase = 1.1
    coupled = mg.validate(
        mg.SystemConfig(cavity=cavity, magnon=magnon,
                        waveguide=(mg.WaveguideMode(phase, 1.0),))
    )
    bare = mg.reference_config("single_cavity", phase_a=phase)
    system = mg.build_coupled_single(coupled, phase)
    a = mg.s21_coupled(system, GRID)
    b = mg.s21_cavity_single(GRID, bare)
    rel = np.abs(a - b) / np.maximum(np.abs(b), 1e-30)
    assert np.max(rel) < 1e-12


def test_pi_periodicity_of_magnitude():
    cfg = mg.reference_config("single_coupled", delta_m=40.0)
    rng = np.random.default_rng(3)
    worst = 0.0
    for phi in rng.uniform(0.0, 2 * np.pi, 8):
        a = np.abs(mg.s21_coupled(mg.build_coupled_single(cfg, phi), GRID))
        b = np.abs(mg.s21_coupled(mg.build_coupled_single(cfg, phi + np.pi), GRID))
        worst = max(worst, float(np.max(np.abs(a - b))))
    assert worst < 1e-10


def test_cooperativity_reference_value():
    cfg = mg.reference_config("single_coupled")
    coop = mg.cooperativity_single(cfg, 0.3)
    assert abs(coop) == pytest.approx(2800.0 / 3303.0, abs=1e-12)


def test_cooperativity_zero_without_magnon_line_coupling():
    cavity = mg.OscillatorParams(OMEGA_C, 17.0, ((350.0, 350.0),))
    magnon = mg.OscillatorParams(OMEGA_C, 1.0, ((0.0, 0.0),))
    cfg = mg.validate(
        mg.SystemConfig(cavity=cavity, magnon=magnon, waveguide=(mg.WaveguideMode(0.0, 1.0),))
    )
    assert mg.cooperativity_single(cfg, 0.0) == 0


def test_cooperativity_below_unity_for_positive_rates():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        km0, kc0 = rng.uniform(1e-3, 100.0, 2)
        k1, k2 = rng.uniform(1e-3, 1000.0, 2)
        cavity = mg.OscillatorParams(OMEGA_C, kc0, ((k2, k2),))
        magnon = mg.OscillatorParams(OMEGA_C, km0, ((k1, k1),))
        cfg = mg.validate(
            mg.SystemConfig(cavity=cavity, magnon=magnon,
                            waveguide=(mg.WaveguideMode(0.0, 1.0),))
        )
        assert abs(mg.cooperativity_single(cfg, rng.uniform(0, 2 * np.pi))) < 1.0


def test_lossless_network_passivity():
    cavity = mg.OscillatorParams(OMEGA_C, 0.0, ((350.0, 350.0),))
    magnon = mg.OscillatorParams(OMEGA_C + 20.0, 0.0, ((8.0, 8.0),))
    cfg = mg.validate(
        mg.SystemConfig(cavity=cavity, magnon=magnon, waveguide=(mg.WaveguideMode(0.0, 1.0),))
    )
    for phi in (0.0, 0.31, np.pi / 2, 2.2):
        mags = np.abs(mg.s21_coupled(mg.build_coupled_single(cfg, phi), GRID))
        assert np.max(mags) <= 1.0 + 1e-9
