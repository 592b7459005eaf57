"""Domain types and configuration handling for waveguide-mediated
magnon-photon systems.

Conventions used throughout the package:

* All frequencies and rates are plain MHz.  Only detunings matter
  physically (the model is invariant under a common shift of the drive,
  cavity and magnon frequencies), so the reference configurations pick
  an arbitrary-but-realistic carrier of 10 GHz.
* Propagation enters only through the accumulated phase ``beta * L`` of
  each waveguide mode; the propagation constant and the travel distance
  are never needed separately, so configurations store the product.
* Time dependence is ``exp(+j omega t)`` with ``exp(-j phase)``
  propagation, and steady states solve ``(j omega I - M) X = b``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import ConfigError, ScenarioError

Scenario = Literal["single_cavity", "single_coupled", "multi_cavity", "multi_coupled"]

#: Carrier frequency used by the reference configurations (MHz).
DEFAULT_OMEGA_C = 10_000.0

#: Reference parameter set (MHz): magnon intrinsic/external, cavity
#: intrinsic/external rates for the dominant waveguide mode.
REFERENCE_RATES = {
    "kappa_m0": 1.0,
    "kappa_m_ext": 8.0,
    "kappa_c0": 17.0,
    "kappa_c_ext": 350.0,
}


@dataclass(frozen=True)
class ModeCoupling:
    """External coupling rates (MHz) of one oscillator to one waveguide mode.

    ``forward`` couples the oscillator to the wave travelling from the
    input port toward the output port; ``backward`` couples it to the
    counter-propagating wave.  For the magnon the forward rate feeds it
    from the incident wave, while the backward rate picks up the wave
    returning from the cavity.  For the cavity the forward rate both
    absorbs the arriving wave and radiates into the output port, and
    the backward rate radiates toward the magnon.
    """

    forward: float
    backward: float

    def __post_init__(self):
        if self.forward < 0 or self.backward < 0:
            raise ConfigError(
                f"coupling rates must be non-negative, got "
                f"forward={self.forward}, backward={self.backward}"
            )


@dataclass(frozen=True)
class OscillatorParams:
    """One resonant mode (magnon or cavity photon).

    Parameters
    ----------
    omega : float
        Resonance frequency, MHz.
    kappa0 : float
        Intrinsic damping rate, MHz.
    couplings : sequence of ModeCoupling
        One entry per waveguide mode, in waveguide order.
    """

    omega: float
    kappa0: float
    couplings: tuple[ModeCoupling, ...]

    def __post_init__(self):
        coerced = tuple(
            c if isinstance(c, ModeCoupling) else ModeCoupling(*c) for c in self.couplings
        )
        object.__setattr__(self, "couplings", coerced)
        if self.omega <= 0:
            raise ConfigError(f"resonance frequency must be positive, got omega={self.omega}")
        if self.kappa0 < 0:
            raise ConfigError(f"intrinsic damping must be non-negative, got kappa0={self.kappa0}")

    @property
    def forward_rates(self) -> np.ndarray:
        return np.array([c.forward for c in self.couplings])

    @property
    def backward_rates(self) -> np.ndarray:
        return np.array([c.backward for c in self.couplings])

    @property
    def external_damping(self) -> float:
        """Radiative damping from coupling in both directions:
        half the sum of forward and backward rates over all modes."""
        return float(sum((c.forward + c.backward) / 2 for c in self.couplings))


@dataclass(frozen=True)
class WaveguideMode:
    """One propagation mode of the waveguide.

    Parameters
    ----------
    phase : float
        Accumulated propagation phase over the magnon-cavity separation,
        radians.
    input_fraction : complex
        Amplitude of this mode's incident wave relative to the dominant
        mode's (exactly 1 for the dominant mode).
    phase_ratio : float, optional
        When a sweep overrides the dominant mode's phase, this mode's
        phase follows as ``phase_ratio * dominant_phase``.  ``None``
        keeps the stored phase fixed during sweeps.
    """

    phase: float
    input_fraction: complex = 1.0
    phase_ratio: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "input_fraction", complex(self.input_fraction))


@dataclass(frozen=True)
class SystemConfig:
    """Full scenario description.

    A config is *cavity-only* when ``magnon`` is ``None`` and
    *single-mode* when the waveguide holds exactly one mode.  The
    ``symmetric`` flag forces backward couplings equal to forward
    couplings on validation, which is the regime all reference
    calculations use.
    """

    cavity: OscillatorParams
    magnon: Optional[OscillatorParams] = None
    waveguide: tuple[WaveguideMode, ...] = (WaveguideMode(0.0, 1.0, 1.0),)
    symmetric: bool = False

    def __post_init__(self):
        object.__setattr__(self, "waveguide", tuple(self.waveguide))

    # -- scenario predicates -------------------------------------------------
    @property
    def is_coupled(self) -> bool:
        return self.magnon is not None

    @property
    def n_modes(self) -> int:
        return len(self.waveguide)

    @property
    def scenario(self) -> Scenario:
        prefix = "single" if self.n_modes == 1 else "multi"
        suffix = "coupled" if self.is_coupled else "cavity"
        return f"{prefix}_{suffix}"  # type: ignore[return-value]

    # -- derived dampings ----------------------------------------------------
    @property
    def kappa_c(self) -> float:
        """Total external cavity damping, MHz.

        The two standard loading conventions differ between scenarios:
        with no magnon on the line the cavity only loads the forward
        wave, so the external damping is the plain sum of forward rates;
        with a magnon present both directions carry energy away and the
        damping is the mean of forward and backward sums.
        """
        if self.magnon is None:
            return float(self.cavity.forward_rates.sum())
        return self.cavity.external_damping

    @property
    def kappa_m(self) -> float:
        """Total external magnon damping, MHz (coupled scenarios only)."""
        if self.magnon is None:
            raise ScenarioError("kappa_m is undefined for cavity-only configurations")
        return self.magnon.external_damping

    @property
    def dominant_index(self) -> int:
        for i, m in enumerate(self.waveguide):
            if m.input_fraction == 1:
                return i
        raise ConfigError("no dominant waveguide mode (input_fraction == 1)")

    @property
    def input_fractions(self) -> np.ndarray:
        return np.array([m.input_fraction for m in self.waveguide], dtype=complex)


def validate(config: SystemConfig) -> SystemConfig:
    """Check a configuration and return its validated form.

    Applies the ``symmetric`` flag (copying forward rates onto backward
    rates), verifies rate signs, coupling-entry counts and the dominant
    waveguide mode, and warns about settings outside the validated
    regime.  Raises :class:`ConfigError` on any violation.
    """
    if not config.waveguide:
        raise ConfigError("waveguide must define at least one propagation mode")

    n = config.n_modes
    dominant = [i for i, m in enumerate(config.waveguide) if m.input_fraction == 1]
    if not dominant:
        raise ConfigError("exactly one waveguide mode must have input_fraction == 1; found none")
    if len(dominant) > 1:
        raise ConfigError(
            f"exactly one waveguide mode may have input_fraction == 1; "
            f"found {len(dominant)} (indices {dominant})"
        )
    for i, m in enumerate(config.waveguide):
        if abs(m.input_fraction) > 1 + 1e-12:
            raise ConfigError(
                f"waveguide mode {i}: |input_fraction| = {abs(m.input_fraction):.6g} exceeds 1"
            )
        if m.input_fraction.imag != 0:
            warnings.warn(
                f"waveguide mode {i}: complex input_fraction "
                f"{m.input_fraction} is outside the validated regime "
                "(treated as a complex amplitude ratio)",
                UserWarning,
                stacklevel=2,
            )

    def check_oscillator(name: str, osc: OscillatorParams) -> OscillatorParams:
        if len(osc.couplings) != n:
            raise ConfigError(
                f"{name}: {len(osc.couplings)} coupling entries for {n} waveguide modes"
            )
        if config.symmetric:
            osc = replace(
                osc,
                couplings=tuple(ModeCoupling(c.forward, c.forward) for c in osc.couplings),
            )
        return osc

    cavity = check_oscillator("cavity", config.cavity)
    magnon = check_oscillator("magnon", config.magnon) if config.magnon is not None else None
    return replace(config, cavity=cavity, magnon=magnon)


def reference_config(
    scenario: Scenario,
    eta: float = 0.1,
    xi: float = 0.2,
    phase_a: float = 0.0,
    omega_c: float = DEFAULT_OMEGA_C,
    delta_m: float = 0.0,
) -> SystemConfig:
    """Build the standard parameter set for one of the four scenarios.

    Single-mode scenarios use the reference rates directly.  Multi-mode
    scenarios add a higher-order waveguide mode whose coupling rates are
    ``eta`` times the dominant ones, whose incident amplitude fraction
    is ``eta``, and whose propagation phase is ``xi`` times the dominant
    phase.

    Parameters
    ----------
    scenario : one of single_cavity, single_coupled, multi_cavity, multi_coupled
    eta : amplitude fraction of the higher-order mode, in [0, 1]
    xi : propagation-phase ratio of the higher-order mode, in [0, 1]
    phase_a : dominant-mode propagation phase, radians
    omega_c : cavity frequency, MHz
    delta_m : magnon detuning from the cavity, MHz
    """
    if scenario not in ("single_cavity", "single_coupled", "multi_cavity", "multi_coupled"):
        raise ConfigError(f"unknown scenario {scenario!r}")
    if not 0 <= eta <= 1:
        raise ConfigError(f"eta must lie in [0, 1], got {eta}")
    if not 0 <= xi <= 1:
        raise ConfigError(f"xi must lie in [0, 1], got {xi}")

    kc = REFERENCE_RATES["kappa_c_ext"]
    km = REFERENCE_RATES["kappa_m_ext"]
    multi = scenario.startswith("multi")
    coupled = scenario.endswith("coupled")

    if multi:
        modes = (
            WaveguideMode(phase_a, 1.0, phase_ratio=1.0),
            WaveguideMode(xi * phase_a, eta, phase_ratio=xi),
        )
        cavity_couplings = ((kc, kc), (eta * kc, eta * kc))
        magnon_couplings = ((km, km), (eta * km, eta * km))
    else:
        modes = (WaveguideMode(phase_a, 1.0, phase_ratio=1.0),)
        cavity_couplings = ((kc, kc),)
        magnon_couplings = ((km, km),)

    cavity = OscillatorParams(omega_c, REFERENCE_RATES["kappa_c0"], cavity_couplings)
    magnon = (
        OscillatorParams(omega_c + delta_m, REFERENCE_RATES["kappa_m0"], magnon_couplings)
        if coupled
        else None
    )
    return validate(SystemConfig(cavity=cavity, magnon=magnon, waveguide=modes, symmetric=True))


def phases_for(config: SystemConfig, phase_a: Optional[float] = None) -> np.ndarray:
    """Per-mode propagation phases, optionally overriding the dominant one.

    With ``phase_a`` given, the dominant mode takes it directly, modes
    with a ``phase_ratio`` scale along, and the rest keep their stored
    phases.
    """
    if phase_a is None:
        return np.array([m.phase for m in config.waveguide])
    dom = config.dominant_index
    out = []
    for i, m in enumerate(config.waveguide):
        if i == dom:
            out.append(float(phase_a))
        elif m.phase_ratio is not None:
            out.append(m.phase_ratio * float(phase_a))
        else:
            out.append(m.phase)
    return np.array(out)


def with_detuning(config: SystemConfig, delta_m: float) -> SystemConfig:
    """Copy of ``config`` with the magnon placed at ``omega_c + delta_m``."""
    if config.magnon is None:
        raise ScenarioError("cannot detune the magnon of a cavity-only configuration")
    magnon = replace(config.magnon, omega=config.cavity.omega + delta_m)
    return replace(config, magnon=magnon)


def without_magnon(config: SystemConfig) -> SystemConfig:
    """Cavity-only copy of a coupled configuration."""
    return replace(config, magnon=None)


@dataclass(frozen=True)
class Spectrum:
    """Complex transmission sampled on a strictly increasing frequency grid."""

    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if freqs.ndim != 1 or values.shape != freqs.shape:
            raise ValueError("freqs and values must be 1-D arrays of equal length")
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ValueError("frequency grid must be strictly increasing")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class DetuningMap:
    """|S21| on a (drive detuning, magnon detuning) grid.

    ``magnitude[i, j]`` holds |S21| at ``delta_c[i]``, ``delta_m[j]``;
    each column is one spectrum over the drive detuning.
    """

    delta_c: np.ndarray
    delta_m: np.ndarray
    magnitude: np.ndarray

    def __post_init__(self):
        dc = np.asarray(self.delta_c, dtype=float)
        dm = np.asarray(self.delta_m, dtype=float)
        mag = np.asarray(self.magnitude, dtype=float)
        if mag.shape != (dc.size, dm.size):
            raise ValueError(
                f"magnitude shape {mag.shape} does not match grids ({dc.size}, {dm.size})"
            )
        object.__setattr__(self, "delta_c", dc)
        object.__setattr__(self, "delta_m", dm)
        object.__setattr__(self, "magnitude", mag)

    def column(self, j: int) -> Spectrum:
        """Spectrum over the drive grid at magnon detuning index ``j``."""
        return Spectrum(self.delta_c, self.magnitude[:, j].astype(complex))
