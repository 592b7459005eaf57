"""Steady-state solve, closed-form eigenpairs, and the time-domain oracle."""

import numpy as np
import pytest

import magline as mg
from magline.errors import ConvergenceError, NumericalError

OMEGA_C = 10000.0


class TestSteadyState:
    def test_diagonal_solve(self):
        X = mg.solve_steady_state(np.zeros((2, 2), dtype=complex), np.array([1.0, 0.0]), 1.0)
        assert X[0] == pytest.approx(-1j, abs=1e-15)
        assert X[1] == 0

    def test_zero_drive_gives_zero_state(self):
        cfg = mg.reference_config("single_coupled")
        system = mg.build_coupled_single(cfg, 0.2)
        X = mg.solve_steady_state(system.matrix, np.zeros(2, dtype=complex), OMEGA_C)
        assert np.all(X == 0)

    def test_random_instances_satisfy_residual(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            matrix = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            matrix -= 3.0 * np.eye(2)  # keep it decaying / well-conditioned
            drive = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            omega = rng.uniform(0.1, 10.0)
            X = mg.solve_steady_state(matrix, drive, omega)
            residual = (1j * omega * np.eye(2) - matrix) @ X - drive
            assert np.linalg.norm(residual) < 1e-10 * np.linalg.norm(drive)

    def test_singular_system_raises(self):
        # lossless resonator driven exactly on resonance
        matrix = np.array([[1j * 5.0, 0.0], [0.0, 1j * 7.0]])
        with pytest.raises(NumericalError, match="degenerate"):
            mg.solve_steady_state(matrix, np.array([1.0, 1.0]), 5.0)

    def test_vectorized_over_omega(self):
        cfg = mg.reference_config("single_coupled")
        system = mg.build_coupled_single(cfg, 0.9)
        omegas = OMEGA_C + np.linspace(-10, 10, 7)
        batch = mg.steady_state_s21(system, omegas)
        singles = [mg.steady_state_s21(system, w) for w in omegas]
        assert np.allclose(batch, singles, rtol=0, atol=1e-15)


class TestEigenpairs:
    def test_diagonal_matrix(self):
        pair = mg.eigenpairs(np.diag([3.0 + 1j, -2.0 + 5j]))
        assert pair.values[0] == pytest.approx(3.0 + 1j)
        assert pair.values[1] == pytest.approx(-2.0 + 5j)

    def test_residual_and_trace_det_identities(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            matrix = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            pair = mg.eigenpairs(matrix)
            scale = np.linalg.norm(matrix)
            for lam, vec in zip(pair.values, pair.vectors.T):
                assert np.linalg.norm(matrix @ vec - lam * vec) < 1e-10 * scale
            assert pair.values.sum() == pytest.approx(np.trace(matrix), rel=1e-10)
            assert pair.values.prod() == pytest.approx(np.linalg.det(matrix), rel=1e-10)

    def test_reference_splitting_against_polynomial_roots(self):
        cfg = mg.reference_config("single_coupled")
        system = mg.build_coupled_single(cfg, 0.0)
        pair = mg.eigenpairs(system.matrix)
        # independent oracle: roots of the characteristic polynomial
        tr = np.trace(system.matrix)
        det = np.linalg.det(system.matrix)
        roots = np.roots([1.0, -tr, det])
        assert sorted(pair.values, key=lambda z: z.real) == pytest.approx(
            sorted(roots, key=lambda z: z.real), rel=1e-10
        )
        # splitting follows the damping-mismatch form at zero detuning
        splitting = abs(pair.values[0] - pair.values[1])
        expected = 2 * np.sqrt(8.0 * 350.0 + ((1.0 + 8.0) - (17.0 + 350.0)) ** 2 / 4)
        assert splitting == pytest.approx(expected, rel=1e-12)

    def test_degenerate_eigenvalues(self):
        pair = mg.eigenpairs(np.array([[2.0, 0.0], [0.0, 2.0]], dtype=complex))
        assert pair.values[0] == pair.values[1] == 2.0


class TestTransmissionZeros:
    def test_single_mode_zeros_sit_at_bare_frequencies(self):
        # closed-form factorisation: dips at the bare oscillator
        # frequencies, widths set by the intrinsic losses alone
        cfg = mg.reference_config("single_coupled", delta_m=37.0)
        for phi in (0.0, 0.6, np.pi):
            system = mg.build_coupled_single(cfg, phi)
            zeros = np.sort_complex(-1j * mg.eigenpairs(
                mg.transmission_zero_matrix(system)).values)
            expect = np.sort_complex(np.array([OMEGA_C + 1j * 17.0,
                                               OMEGA_C + 37.0 + 1j * 1.0]))
            assert np.allclose(zeros, expect, atol=1e-6)


class TestTimeDomainOracle:
    def test_cavity_only_matches_closed_form(self):
        cfg = mg.reference_config("single_cavity")
        system = mg.assemble_system(cfg)
        for omega in (OMEGA_C, OMEGA_C + 211.0):
            td = mg.time_domain_s21(system, omega)
            fd = mg.s21_cavity_single(omega, cfg)
            assert abs(td - fd) / max(abs(fd), 0.01) < 1e-6

    def test_zero_drive_returns_pure_propagation(self):
        cfg = mg.reference_config("single_coupled", phase_a=0.8)
        system = mg.build_coupled_single(cfg, 0.8)
        quiet = mg.CoupledSystem(
            matrix=system.matrix,
            drive=np.zeros(2, dtype=complex),
            output_weights=system.output_weights,
            output_const=system.output_const,
            input_norm=system.input_norm,
        )
        td = mg.time_domain_s21(quiet, OMEGA_C + 5.0)
        assert td == pytest.approx(np.exp(-0.8j), abs=1e-12)

    def test_random_cross_validation(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            omega_c = rng.uniform(300.0, 600.0)
            scale = rng.uniform(0.8, 1.2, 4)
            phi = rng.uniform(0.0, 2 * np.pi)
            cavity = mg.OscillatorParams(omega_c, 17.0 * scale[0],
                                         ((350.0 * scale[1],) * 2,))
            magnon = mg.OscillatorParams(omega_c + rng.uniform(-40, 40), 1.0 * scale[2],
                                         ((8.0 * scale[3],) * 2,))
            cfg = mg.validate(mg.SystemConfig(
                cavity=cavity, magnon=magnon, waveguide=(mg.WaveguideMode(phi, 1.0),)
            ))
            system = mg.build_coupled_single(cfg, phi)
            for omega in omega_c + rng.uniform(-0.5, 0.5, 5) * omega_c:
                fd = mg.steady_state_s21(system, omega)
                td = mg.time_domain_s21(system, omega)
                assert abs(td - fd) / max(abs(fd), 0.01) < 1e-6

    def test_step_halving_fourth_order(self):
        cfg = mg.reference_config("multi_coupled")
        loading = mg.critical_condition_multi(cfg, phase_a=np.pi).effective_loading
        system = mg.build_coupled_multi(cfg, phase_a=np.pi, loading=loading)
        omega = OMEGA_C + 30.0
        fd = mg.steady_state_s21(system, omega)
        err_coarse = abs(mg.time_domain_s21(system, omega, steps_per_period=64,
                                            rtol=1e-12) - fd)
        err_fine = abs(mg.time_domain_s21(system, omega, steps_per_period=128,
                                          rtol=1e-12) - fd)
        assert err_coarse / err_fine >= 8.0

    def test_unstable_matrix_rejected(self):
        system = mg.CoupledSystem(
            matrix=np.array([[1j * 10.0 + 0.5, 0.0], [0.0, 1j * 12.0 - 1.0]]),
            drive=np.array([1.0, 1.0], dtype=complex),
            output_weights=np.array([1.0, 1.0], dtype=complex),
            output_const=1.0,
            input_norm=1.0,
        )
        with pytest.raises(NumericalError, match="unstable"):
            mg.time_domain_s21(system, 10.0)

    def test_budget_exhaustion_raises(self):
        cfg = mg.reference_config("single_coupled")
        system = mg.build_coupled_single(cfg, 0.0)
        with pytest.raises(ConvergenceError, match="did not settle"):
            mg.time_domain_s21(system, OMEGA_C, settle_periods=3)
