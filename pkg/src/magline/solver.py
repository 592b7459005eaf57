"""Numerical backbone: system assembly, 2x2 complex steady-state solve,
closed-form eigendecomposition, and an independent time-domain
integrator used as a brute-force oracle for every frequency-domain
result.

The steady state of ``dx/dt = M x + b exp(j omega t)`` is ``X`` with
``(j omega I - M) X = b``; the 2x2 solve uses Cramer's rule, which is
exact and branch-free, with the determinant magnitude monitored against
``1e-14`` of the matrix scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, NumericalError, ScenarioError
from .model import SystemConfig, phases_for

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

DET_FLOOR = 1e-14


@dataclass(frozen=True)
class CoupledSystem:
    """Assembled dynamical system for one drive scenario.

    ``matrix`` is the 2x2 complex dynamical matrix (rows/columns ordered
    magnon, cavity), ``drive`` the coefficient vector of the unit input,
    and the transmitted wave for state ``X`` is
    ``(output_const - output_weights . X) / input_norm``.
    """

    matrix: np.ndarray
    drive: np.ndarray
    output_weights: np.ndarray
    output_const: complex
    input_norm: complex

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "drive", np.asarray(self.drive, dtype=complex))
        object.__setattr__(self, "output_weights", np.asarray(self.output_weights, dtype=complex))

    def output(self, state) -> complex:
        """Transmission for steady-state amplitudes ``state = (m, c)``."""
        state = np.asarray(state, dtype=complex)
        return (
            self.output_const
            - self.output_weights[0] * state[..., 0]
            - self.output_weights[1] * state[..., 1]
        ) / self.input_norm


def assemble_system(
    config: SystemConfig,
    phases: Optional[np.ndarray] = None,
    phase_a: Optional[float] = None,
    loading: Optional[complex] = None,
) -> CoupledSystem:
    """Build the dynamical matrix, drive and output functional.

    Sums the per-waveguide-mode coupling pathways: with propagation
    factors ``p_i = exp(-j phase_i)`` the off-diagonal elements are
    ``-sum_i p_i sqrt(cav_bwd_i * mag_bwd_i)`` (magnon row) and
    ``-sum_i p_i sqrt(mag_fwd_i * cav_fwd_i)`` (cavity row), the drive
    collects ``(sqrt(mag_fwd_i), p_i sqrt(cav_fwd_i))`` weighted by each
    mode's incident fraction, and the transmitted wave is
    ``sum_i p_i s_i - sum_i p_i sqrt(mag_fwd_i) m - sum_i sqrt(cav_fwd_i) c``
    normalised by the total incident amplitude.

    ``loading`` replaces the total cavity loading (intrinsic plus
    external damping) on the cavity diagonal; its imaginary part acts as
    a cavity frequency shift.  Cavity-only configurations produce an
    inert magnon row (zero drive and output weight).
    """
    if phases is None:
        phases = phases_for(config, phase_a)
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (config.n_modes,):
        raise ScenarioError(
            f"expected {config.n_modes} phases, got array of shape {phases.shape}"
        )

    p = np.exp(-1j * phases)
    s_in = config.input_fractions
    cav = config.cavity
    gc = loading if loading is not None else cav.kappa0 + config.kappa_c

    cav_fwd = cav.forward_rates
    cav_bwd = cav.backward_rates

    if config.magnon is None:
        # Inert first row: decays like the cavity, never driven, never observed.
        m_diag = -(cav.kappa0 + config.kappa_c)
        matrix = np.array([[m_diag, 0.0], [0.0, 1j * cav.omega - gc]], dtype=complex)
        drive = np.array([0.0, (p * np.sqrt(cav_fwd) * s_in).sum()], dtype=complex)
        weights = np.array([0.0, np.sqrt(cav_fwd).sum()], dtype=complex)
    else:
        mag = config.magnon
        mag_fwd = mag.forward_rates
        mag_bwd = mag.backward_rates
        gm = mag.kappa0 + config.kappa_m
        matrix = np.array(
            [
                [1j * mag.omega - gm, -(p * np.sqrt(cav_bwd * mag_bwd)).sum()],
                [-(p * np.sqrt(mag_fwd * cav_fwd)).sum(), 1j * cav.omega - gc],
            ],
            dtype=complex,
        )
        drive = np.array(
            [(np.sqrt(mag_fwd) * s_in).sum(), (p * np.sqrt(cav_fwd) * s_in).sum()],
            dtype=complex,
        )
        weights = np.array([(p * np.sqrt(mag_fwd)).sum(), np.sqrt(cav_fwd).sum()], dtype=complex)

    return CoupledSystem(
        matrix=matrix,
        drive=drive,
        output_weights=weights,
        output_const=(p * s_in).sum(),
        input_norm=s_in.sum(),
    )


def _shifted_elements(matrix: np.ndarray, omega):
    """Elements of ``j omega I - M`` broadcast over ``omega``."""
    omega = np.asarray(omega, dtype=float)
    a00 = 1j * omega - matrix[0, 0]
    a11 = 1j * omega - matrix[1, 1]
    a01 = -matrix[0, 1] * np.ones_like(a00)
    a10 = -matrix[1, 0] * np.ones_like(a00)
    return a00, a01, a10, a11


def solve_steady_state(matrix: np.ndarray, drive: np.ndarray, omega):
    """Steady-state amplitudes ``X`` with ``(j omega I - M) X = b``.

    Accepts a scalar or an array of drive frequencies; the state vector
    is stacked on the last axis.  Raises :class:`NumericalError` when
    the shifted matrix is singular to within ``1e-14`` of its scale.
    """
    matrix = np.asarray(matrix, dtype=complex)
    drive = np.asarray(drive, dtype=complex)
    a00, a01, a10, a11 = _shifted_elements(matrix, omega)
    det = a00 * a11 - a01 * a10
    scale = np.maximum.reduce([np.abs(a00), np.abs(a01), np.abs(a10), np.abs(a11)])
    bad = np.abs(det) < DET_FLOOR * scale**2
    if np.any(bad):
        omega_bad = np.asarray(omega, dtype=float)[bad] if np.ndim(omega) else omega
        raise NumericalError(
            f"degenerate drive frequency: (j omega I - M) is singular near omega={omega_bad}"
        )
    m = (drive[0] * a11 - a01 * drive[1]) / det
    c = (a00 * drive[1] - a10 * drive[0]) / det
    return np.stack([m, c], axis=-1)


def steady_state_s21(system: CoupledSystem, omega):
    """Frequency-domain transmission at drive frequency ``omega`` (MHz).

    Scalar in, scalar out; array in, array out.
    """
    state = solve_steady_state(system.matrix, system.drive, omega)
    out = system.output(state)
    return complex(out) if np.ndim(omega) == 0 else out


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalues and eigenvectors of a 2x2 complex matrix.

    Sorted by descending real part, ties broken by descending imaginary
    part; ``vectors[:, k]`` belongs to ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def eigenpairs(matrix: np.ndarray) -> EigenPair:
    """Closed-form eigendecomposition via the characteristic quadratic."""
    matrix = np.asarray(matrix, dtype=complex)
    a, b = matrix[0, 0], matrix[0, 1]
    c, d = matrix[1, 0], matrix[1, 1]
    tr = a + d
    disc = np.sqrt((a - d) ** 2 + 4 * b * c)
    lams = np.array([(tr + disc) / 2, (tr - disc) / 2])
    order = np.lexsort((-lams.imag, -lams.real))
    lams = lams[order]

    vecs = np.empty((2, 2), dtype=complex)
    for k, lam in enumerate(lams):
        # Pick the better-conditioned row to form the null vector.
        v1 = np.array([b, lam - a])
        v2 = np.array([lam - d, c])
        v = v1 if np.abs(v1).sum() >= np.abs(v2).sum() else v2
        norm = np.linalg.norm(v)
        vecs[:, k] = v / norm if norm > 0 else np.eye(2)[:, k]
    return EigenPair(values=lams, vectors=vecs)


def transmission_zero_matrix(system: CoupledSystem) -> np.ndarray:
    """2x2 matrix whose eigenvalues (divided by j) are the complex
    frequencies where the transmitted wave vanishes.

    The transmission is ``(E - w . (j omega I - M)^{-1} b) / norm``; by
    the rank-one determinant identity its zeros are the eigenvalues of
    ``M + b w^T / E``.  The dip positions and dip widths of |S21| trace
    the real and imaginary parts of these zero frequencies.
    """
    E = system.output_const
    if abs(E) < 1e-12:
        raise NumericalError("direct transmission amplitude vanishes; zero dynamics undefined")
    return system.matrix + np.outer(system.drive, system.output_weights) / E


def _rk4_drive(m00, m01, m10, m11, b0, b1, d0, dh, d1, dt, max_periods, rtol):
    """Integrate dx/dt = M x + b * drive(t) from rest, period by period,
    until the state at the period boundary settles.

    ``d0``/``dh``/``d1`` hold the drive phase factors at the start,
    midpoint and end of every step of one period; reusing them each
    period makes the per-period update an exactly constant affine map,
    so the boundary state converges to a machine-precision fixed point
    (the envelope, since the drive phase returns to unity there).
    Returns the final state, the period count, and a convergence flag.
    """
    n_sub = d0.shape[0]
    x0 = 0.0 + 0.0j
    x1 = 0.0 + 0.0j
    e0_prev = 0.0 + 0.0j
    e1_prev = 0.0 + 0.0j
    for period in range(max_periods):
        for k in range(n_sub):
            k10 = m00 * x0 + m01 * x1 + b0 * d0[k]
            k11 = m10 * x0 + m11 * x1 + b1 * d0[k]
            y0 = x0 + 0.5 * dt * k10
            y1 = x1 + 0.5 * dt * k11
            k20 = m00 * y0 + m01 * y1 + b0 * dh[k]
            k21 = m10 * y0 + m11 * y1 + b1 * dh[k]
            y0 = x0 + 0.5 * dt * k20
            y1 = x1 + 0.5 * dt * k21
            k30 = m00 * y0 + m01 * y1 + b0 * dh[k]
            k31 = m10 * y0 + m11 * y1 + b1 * dh[k]
            y0 = x0 + dt * k30
            y1 = x1 + dt * k31
            k40 = m00 * y0 + m01 * y1 + b0 * d1[k]
            k41 = m10 * y0 + m11 * y1 + b1 * d1[k]
            x0 = x0 + dt / 6.0 * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
            x1 = x1 + dt / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        scale = max(abs(x0), abs(x1), 1e-300)
        if period > 0 and max(abs(x0 - e0_prev), abs(x1 - e1_prev)) < rtol * scale:
            return x0, x1, period + 1, True
        e0_prev = x0
        e1_prev = x1
    return e0_prev, e1_prev, max_periods, False


if njit is not None:
    _rk4_drive = njit(cache=True)(_rk4_drive)


def time_domain_s21(
    system: CoupledSystem,
    omega: float,
    steps_per_period: int = 512,
    rtol: float = 1e-10,
    settle_factor: float = 50.0,
    settle_periods: Optional[int] = None,
) -> complex:
    """Brute-force transmission: integrate the driven equations of
    motion with classical fixed-step RK4 from rest and read the settled
    envelope.

    Never touches the frequency-domain solve, so agreement between the
    two is a genuine cross-check.  The integration runs in the lab
    frame with step ``(2 pi / omega) / steps_per_period``; convergence
    is declared when the envelope ``x(t) exp(-j omega t)`` changes by
    less than ``rtol`` over one drive period.  The budget is
    ``settle_factor`` times the slowest decay time of the system
    (``settle_periods`` overrides it directly).

    Raises
    ------
    NumericalError
        If the dynamical matrix has a non-decaying eigenvalue.
    ConvergenceError
        If the envelope has not settled within the budget.
    """
    if omega <= 0:
        raise NumericalError(f"drive frequency must be positive, got {omega}")
    lams = eigenpairs(system.matrix).values
    slowest = -np.max(lams.real)
    if slowest <= 0:
        raise NumericalError(
            f"unstable dynamical matrix: eigenvalue with real part {np.max(lams.real):+.3g}"
        )
    period = 2 * np.pi / omega
    if settle_periods is None:
        settle_periods = int(np.ceil(settle_factor / slowest / period)) + 2
    dt = period / steps_per_period
    k_grid = np.arange(steps_per_period, dtype=float)
    d0 = np.exp(1j * omega * dt * k_grid)
    dh = np.exp(1j * omega * dt * (k_grid + 0.5))
    d1 = np.exp(1j * omega * dt * (k_grid + 1.0))
    m = system.matrix
    b = system.drive
    e0, e1, used, ok = _rk4_drive(
        m[0, 0], m[0, 1], m[1, 0], m[1, 1], b[0], b[1],
        d0, dh, d1, dt, int(settle_periods), float(rtol),
    )
    if not ok:
        raise ConvergenceError(
            f"time-domain envelope did not settle within {used} drive periods "
            f"(rtol={rtol:g}, slowest decay rate {slowest:.3g} MHz)"
        )
    return complex(system.output(np.array([e0, e1])))
