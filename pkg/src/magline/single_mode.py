"""Single-mode-waveguide physics: cavity-only transmission, the coupled
magnon-cavity system, and the single-mode cooperativity.

With one propagation mode the transmitted amplitude of the bare cavity
has the closed form

    S21 = exp(-j phase) * (1 - kappa_c / (j (omega - omega_c) + kappa_c0 + kappa_c))

so zero intrinsic loss gives an exact null on resonance (the critical
coupling condition), and the propagation phase is an overall factor that
never moves the dip.  |S21| of the coupled system is pi-periodic in the
propagation phase because the response depends on the phase only through
its doubled exponential.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import ScenarioError
from .model import SystemConfig, phases_for
from .solver import CoupledSystem, assemble_system, steady_state_s21


def _require_single(config: SystemConfig, *, coupled: bool, op: str) -> None:
    if config.n_modes != 1:
        raise ScenarioError(f"{op} requires a single-mode waveguide, got {config.n_modes} modes")
    if coupled and config.magnon is None:
        raise ScenarioError(f"{op} requires a magnon; configuration is cavity-only")
    if not coupled and config.magnon is not None:
        raise ScenarioError(f"{op} requires a cavity-only configuration")


def s21_cavity(omega, config: SystemConfig, critical: bool = False):
    """Transmission of the bare cavity on a single-mode waveguide.

    ``critical=True`` zeroes the intrinsic loss, which pins an exact
    transmission null at the cavity frequency.
    """
    _require_single(config, coupled=False, op="s21_cavity (single)")
    kappa_c0 = 0.0 if critical else config.cavity.kappa0
    kappa_c = config.kappa_c
    phase = phases_for(config)[0]
    omega = np.asarray(omega, dtype=float)
    value = np.exp(-1j * phase) * (
        1.0 - kappa_c / (1j * (omega - config.cavity.omega) + kappa_c0 + kappa_c)
    )
    return complex(value) if value.ndim == 0 else value


def build_coupled(
    config: SystemConfig,
    phase: float,
    loading: Optional[complex] = None,
) -> CoupledSystem:
    """Assemble the coupled magnon-cavity system for one propagation phase.

    ``loading`` replaces the total cavity loading on the diagonal;
    passing ``config.kappa_c`` realises the critically coupled cavity
    (zero intrinsic loss).
    """
    _require_single(config, coupled=True, op="build_coupled (single)")
    return assemble_system(config, phases=np.array([float(phase)]), loading=loading)


def s21_coupled(system: CoupledSystem, omega):
    """Steady-state transmission of an assembled coupled system."""
    return steady_state_s21(system, omega)


def cooperativity(config: SystemConfig, phase: float) -> complex:
    """Magnon-photon cooperativity of the single-mode coupled system.

    Ratio of the squared through-line coupling to the product of the two
    oscillators' total dampings:

        C = exp(-2j phase) * k1 k2 / ((kappa_m0 + k1) (kappa_c0 + k2))

    with ``k1`` the magnon's forward rate and ``k2`` the cavity's
    backward rate.  |C| < 1 for any strictly positive rates, so a
    single-mode line only ever supports weak coupling.
    """
    _require_single(config, coupled=True, op="cooperativity (single)")
    k1 = float(config.magnon.forward_rates[0])
    k2 = float(config.cavity.backward_rates[0])
    denom = (config.magnon.kappa0 + k1) * (config.cavity.kappa0 + k2)
    return np.exp(-2j * phase) * k1 * k2 / denom
