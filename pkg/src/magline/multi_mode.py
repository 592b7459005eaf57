"""Multi-mode-waveguide physics: per-mode input-output, the critical
loading that nulls the bare-cavity transmission, the coupled system with
summed coupling pathways, a dominant-terms analytic transmission, and
the multi-mode cooperativity.

Each propagation mode contributes its own phase factor to the
off-diagonal coupling, so the spectrum is no longer pi-periodic in the
dominant phase and the extra pathways can push the system from the
attractive (dissipative) to the repulsive (coherent) regime.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NumericalError, ScenarioError
from .model import SystemConfig, phases_for, without_magnon
from .solver import CoupledSystem, assemble_system, steady_state_s21

#: How a complex critical loading is inserted into the cavity diagonal.
LOADING_MODES = ("complex", "real", "abs")


@dataclass(frozen=True)
class CriticalSolution:
    """Cavity loading (intrinsic + external damping, MHz) that nulls the
    bare-cavity transmission at resonance.

    The two-mode closed form is complex for general phase differences;
    its real part is the loading proper and its imaginary part acts as a
    cavity frequency shift.  ``resolve`` selects how the value is
    inserted into the dynamical matrix.
    """

    effective_loading: complex

    @property
    def real_part(self) -> float:
        return self.effective_loading.real

    @property
    def imag_part(self) -> float:
        return self.effective_loading.imag

    def resolve(self, mode: str = "complex") -> complex:
        if mode not in LOADING_MODES:
            raise ValueError(f"loading mode must be one of {LOADING_MODES}, got {mode!r}")
        if mode == "real":
            return complex(self.effective_loading.real)
        if mode == "abs":
            return complex(abs(self.effective_loading))
        return self.effective_loading


def _require_multi(config: SystemConfig, *, coupled: Optional[bool], op: str) -> None:
    if config.n_modes < 2:
        raise ScenarioError(f"{op} requires at least two waveguide modes, got {config.n_modes}")
    if coupled is True and config.magnon is None:
        raise ScenarioError(f"{op} requires a magnon; configuration is cavity-only")
    if coupled is False and config.magnon is not None:
        raise ScenarioError(f"{op} requires a cavity-only configuration")


def critical_loading(
    config: SystemConfig,
    phase_a: Optional[float] = None,
    phase_b: Optional[float] = None,
    eta: Optional[float] = None,
) -> CriticalSolution:
    """Total cavity loading that makes the bare-cavity transmission
    vanish exactly at resonance.

    For two modes with cavity forward rates ``k_a``, ``k_b``, incident
    ratio ``eta`` and phase difference ``dphi = phase_a - phase_b``:

        loading = (k_a + sqrt(k_a k_b) + (k_b + sqrt(k_a k_b)) eta e^{j dphi})
                  / (1 + eta e^{j dphi})

    With more than two modes the loading is found numerically as the
    real value minimising |S21| at the cavity frequency.

    Raises :class:`NumericalError` when ``eta e^{j dphi}`` lands within
    1e-12 of -1 (vanishing total incident amplitude).
    """
    _require_multi(config, coupled=None, op="critical_loading")
    phases = phases_for(config, phase_a)
    if phase_b is not None:
        if config.n_modes != 2:
            raise ScenarioError("phase_b override is only meaningful for two-mode waveguides")
        phases = np.array([phases[0], float(phase_b)])

    k4 = config.cavity.forward_rates
    fractions = config.input_fractions.copy()
    if eta is not None:
        others = [i for i in range(config.n_modes) if i != config.dominant_index]
        if config.n_modes != 2:
            raise ScenarioError("eta override is only meaningful for two-mode waveguides")
        fractions[others[0]] = eta

    if config.n_modes == 2:
        dom = config.dominant_index
        oth = 1 - dom
        z = fractions[oth] * np.exp(1j * (phases[dom] - phases[oth]))
        if abs(1.0 + z) < 1e-12:
            raise NumericalError(
                "critical loading is singular: total incident amplitude vanishes "
                f"(eta e^(j dphi) = {z:.6g})"
            )
        root = np.sqrt(k4[dom] * k4[oth])
        value = (k4[dom] + root + (k4[oth] + root) * z) / (1.0 + z)
        return CriticalSolution(complex(value))

    # N > 2: scan the real loading for the deepest on-resonance null.
    omega_c = config.cavity.omega
    bare = without_magnon(config)

    def depth(loading: float) -> float:
        return abs(s21_cavity(omega_c, bare, loading=complex(loading), phases=phases))

    upper = 4.0 * (config.cavity.kappa0 + float(k4.sum())) + 1.0
    res = minimize_scalar(depth, bounds=(1e-9, upper), method="bounded",
                          options={"xatol": 1e-10})
    return CriticalSolution(complex(res.x))


def s21_cavity(
    omega,
    config: SystemConfig,
    loading: Optional[complex] = None,
    phases: Optional[np.ndarray] = None,
    phase_a: Optional[float] = None,
):
    """Transmission of the bare cavity on a multi-mode waveguide.

    Every mode injects ``input_fraction * exp(-j phase)`` at the cavity
    and collects its share of the radiated field; the quoted value is
    the summed outgoing amplitude over the summed incident amplitude.
    """
    _require_multi(config, coupled=False, op="s21_cavity (multi)")
    system = assemble_system(config, phases=phases, phase_a=phase_a, loading=loading)
    return steady_state_s21(system, omega)


def build_coupled(
    config: SystemConfig,
    phases: Optional[Sequence[float]] = None,
    phase_a: Optional[float] = None,
    loading: Optional[complex] = None,
) -> CoupledSystem:
    """Assemble the coupled system with per-mode propagation phases.

    ``loading`` (typically ``critical_loading(...).resolve()``) replaces
    the total cavity loading on the diagonal.
    """
    _require_multi(config, coupled=True, op="build_coupled (multi)")
    arr = None if phases is None else np.asarray(phases, dtype=float)
    return assemble_system(config, phases=arr, phase_a=phase_a, loading=loading)


def s21_coupled(system: CoupledSystem, omega):
    """Steady-state transmission of an assembled multi-mode system."""
    return steady_state_s21(system, omega)


def _recipe_rates(config: SystemConfig):
    """Per-mode (magnon, cavity) rates entering the dominant-terms
    expressions, which are written for direction-symmetric coupling."""
    k1 = config.magnon.forward_rates
    k2 = config.cavity.backward_rates
    return k1, k2


def s21_analytic(
    config: SystemConfig,
    omega,
    phases: Optional[Sequence[float]] = None,
    phase_a: Optional[float] = None,
    loading: Optional[complex] = None,
):
    """Dominant-terms analytic transmission of the two-mode coupled system.

    Decomposes the response into the direct wave, a magnon-mediated and a
    cavity-mediated channel, plus the four cavity-output and four
    magnon-output pathway terms that mix the two propagation modes, all
    over the determinant of the frequency-shifted dynamical matrix.
    Exact when the higher-order mode decouples; otherwise accurate to
    the dominant order in the mode-B loading.
    """
    _require_multi(config, coupled=True, op="s21_analytic")
    if config.n_modes != 2:
        raise ScenarioError("the dominant-terms expansion is derived for exactly two modes")
    if phases is None:
        phases = phases_for(config, phase_a)
    phases = np.asarray(phases, dtype=float)
    dom = config.dominant_index
    oth = 1 - dom

    k1, k2 = _recipe_rates(config)
    k1a, k1b = k1[dom], k1[oth]
    k2a, k2b = k2[dom], k2[oth]
    pa = np.exp(-1j * phases[dom])
    pb = np.exp(-1j * phases[oth])

    gm = config.magnon.kappa0 + config.kappa_m
    gc = loading if loading is not None else config.cavity.kappa0 + config.kappa_c

    omega = np.asarray(omega, dtype=float)
    # j*omega minus the matrix diagonals, exactly as in the full solve.
    am = 1j * (omega - config.magnon.omega) + gm
    ac = 1j * omega - 1j * config.cavity.omega + gc
    coupling = pa * np.sqrt(k1a * k2a) + pb * np.sqrt(k1b * k2b)
    det = am * ac - coupling**2
    bad = np.abs(det) < 1e-14 * np.maximum(np.abs(am * ac), 1.0)
    if np.any(bad):
        raise NumericalError("dominant-terms determinant vanishes on the requested grid")

    direct = pa
    magnon_channel = -np.sqrt(k1a) * (pa * np.sqrt(k1a) + pb * np.sqrt(k1b)) * ac / det
    cavity_channel = -np.sqrt(k2a) * pa * (np.sqrt(k2a) + np.sqrt(k2b)) * am / det
    cavity_paths = (
        k1a * k2a * pa
        + k1a * np.sqrt(k2a * k2b) * pa
        + np.sqrt(k1a * k2a * k1b * k2b) * pb
        + k2b * np.sqrt(k1a * k1b) * pb
    ) / det
    magnon_paths = (
        k1a * k2a * pa**3
        + np.sqrt(k1a * k2a * k1b * k2b) * pa**2 * pb
        + k2a * np.sqrt(k1a * k1b) * pa**2 * pb
        + k1b * np.sqrt(k2a * k2b) * pa * pb**2
    ) / det
    value = direct + magnon_channel + cavity_channel + cavity_paths + magnon_paths
    return complex(value) if value.ndim == 0 else value


def analytic_channels(
    config: SystemConfig,
    omega: float,
    phases: Optional[Sequence[float]] = None,
    phase_a: Optional[float] = None,
    loading: Optional[complex] = None,
) -> dict:
    """Magnitudes of the four cavity-output pathway terms at one frequency.

    Keys name the legs: ``a_a`` travels to and from the cavity on the
    dominant mode, ``a_b``/``b_a`` mix the two modes, and ``b_b`` uses
    the higher-order mode on both legs.  All but ``a_a`` vanish when the
    higher-order mode carries no coupling.
    """
    _require_multi(config, coupled=True, op="analytic_channels")
    if config.n_modes != 2:
        raise ScenarioError("the dominant-terms expansion is derived for exactly two modes")
    if phases is None:
        phases = phases_for(config, phase_a)
    phases = np.asarray(phases, dtype=float)
    dom = config.dominant_index
    oth = 1 - dom
    k1, k2 = _recipe_rates(config)
    k1a, k1b = k1[dom], k1[oth]
    k2a, k2b = k2[dom], k2[oth]
    pa = np.exp(-1j * phases[dom])
    pb = np.exp(-1j * phases[oth])

    gm = config.magnon.kappa0 + config.kappa_m
    gc = loading if loading is not None else config.cavity.kappa0 + config.kappa_c
    am = 1j * (omega - config.magnon.omega) + gm
    ac = 1j * (omega - config.cavity.omega) + gc
    coupling = pa * np.sqrt(k1a * k2a) + pb * np.sqrt(k1b * k2b)
    det = am * ac - coupling**2

    return {
        "a_a": abs(k1a * k2a * pa / det),
        "a_b": abs(k1a * np.sqrt(k2a * k2b) * pa / det),
        "b_a": abs(np.sqrt(k1a * k2a * k1b * k2b) * pb / det),
        "b_b": abs(k2b * np.sqrt(k1a * k1b) * pb / det),
    }


def cooperativity(
    config: SystemConfig,
    phases: Optional[Sequence[float]] = None,
    phase_a: Optional[float] = None,
) -> complex:
    """Two-mode cooperativity under critical loading.

    Dominant-terms form: the summed pathway coupling squared over the
    product of the magnon's external damping and the critically loaded
    cavity damping,

        C = e^{-2j phi_a} (k1a k2a + 2 e^{j(phi_a - phi_b)} sqrt(k1a k2a k1b k2b))
            / ((k1a + k1b) (k2a + sqrt(k2a k2b)))

    The extra mode-B pathway raises |C| toward one but cannot exceed it.
    """
    _require_multi(config, coupled=True, op="cooperativity (multi)")
    if config.n_modes != 2:
        raise ScenarioError("the cooperativity expression is derived for exactly two modes")
    if phases is None:
        phases = phases_for(config, phase_a)
    phases = np.asarray(phases, dtype=float)
    dom = config.dominant_index
    oth = 1 - dom
    k1, k2 = _recipe_rates(config)
    k1a, k1b = k1[dom], k1[oth]
    k2a, k2b = k2[dom], k2[oth]
    phi_a, phi_b = phases[dom], phases[oth]

    numerator = k1a * k2a + 2 * np.exp(1j * (phi_a - phi_b)) * np.sqrt(k1a * k2a * k1b * k2b)
    denominator = (k1a + k1b) * (k2a + np.sqrt(k2a * k2b))
    return np.exp(-2j * phi_a) * numerator / denominator


def matrix_cooperativity(system: CoupledSystem) -> float:
    """Cooperativity magnitude read off an assembled dynamical matrix:
    |off-diagonal product| over the product of the two diagonal damping
    rates.  Serves as the independent cross-check for the closed-form
    expressions."""
    m = system.matrix
    gm = -m[0, 0].real
    gc = -m[1, 1].real
    if gm <= 0 or gc <= 0:
        raise NumericalError("matrix cooperativity requires positive dampings on the diagonal")
    return float(abs(m[0, 1] * m[1, 0]) / (gm * gc))
