"""Observables built on the engines: spectra, detuning maps, dip
extraction, coupling-regime classification, and phase-periodicity
measurement.

The level-attraction / level-repulsion call is made on the transmission
*zeros* (the complex frequencies where the transmitted wave vanishes),
because those are what the dips in a |S21| map trace.  On a single-mode
line the zeros factor out and sit exactly at the bare oscillator
frequencies with widths set by the intrinsic losses, so the dips simply
cross; mixing two propagation modes hybridises the zeros and opens the
possibility of a resolved avoided crossing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.signal import find_peaks, peak_widths

from . import multi_mode, single_mode
from .errors import NumericalError, ScenarioError
from .model import DetuningMap, Spectrum, SystemConfig, phases_for, with_detuning
from .solver import assemble_system, steady_state_s21, transmission_zero_matrix

DEFAULT_DELTA_C = np.linspace(-800.0, 800.0, 1601)
DEFAULT_DELTA_M = np.linspace(-300.0, 300.0, 241)


def resolve_loading(
    config: SystemConfig,
    phase_a: Optional[float] = None,
    critical: bool = False,
    loading_mode: str = "complex",
) -> Optional[complex]:
    """Total cavity loading implied by the critical-coupling flag.

    Single-mode: critical coupling means zero intrinsic loss, so the
    loading equals the external damping.  Multi-mode: the closed-form
    critical value, inserted per ``loading_mode``.  Returns ``None``
    when ``critical`` is not requested (natural loading).
    """
    if not critical:
        return None
    if config.n_modes == 1:
        return complex(config.kappa_c)
    return multi_mode.critical_loading(config, phase_a=phase_a).resolve(loading_mode)


def transmission_spectrum(
    config: SystemConfig,
    omegas: np.ndarray,
    phase_a: Optional[float] = None,
    critical: bool = False,
    loading: Optional[complex] = None,
    loading_mode: str = "complex",
) -> Spectrum:
    """Complex transmission over a drive-frequency grid for any scenario."""
    if loading is None:
        loading = resolve_loading(config, phase_a, critical, loading_mode)
    omegas = np.asarray(omegas, dtype=float)
    if config.magnon is None and config.n_modes == 1 and loading is None and phase_a is None:
        values = single_mode.s21_cavity(omegas, config)
    else:
        system = assemble_system(config, phase_a=phase_a, loading=loading)
        values = steady_state_s21(system, omegas)
    return Spectrum(omegas, np.asarray(values, dtype=complex))


def detuning_map(
    config: SystemConfig,
    phase_a: Optional[float] = None,
    delta_c: Optional[np.ndarray] = None,
    delta_m: Optional[np.ndarray] = None,
    critical: bool = False,
    loading_mode: str = "complex",
) -> DetuningMap:
    """|S21| over a (drive detuning, magnon detuning) grid.

    For each magnon detuning the magnon is placed at ``omega_c +
    delta_m`` and the spectrum evaluated over ``omega_c + delta_c``.
    The critical loading depends only on the phases, so it is computed
    once for the whole map.
    """
    if config.magnon is None:
        raise ScenarioError("detuning_map requires a coupled configuration")
    delta_c = DEFAULT_DELTA_C if delta_c is None else np.asarray(delta_c, dtype=float)
    delta_m = DEFAULT_DELTA_M if delta_m is None else np.asarray(delta_m, dtype=float)
    if delta_c.size == 0 or delta_m.size == 0:
        raise ScenarioError("detuning grids must not be empty")

    loading = resolve_loading(config, phase_a, critical, loading_mode)
    omegas = config.cavity.omega + delta_c
    magnitude = np.empty((delta_c.size, delta_m.size))
    for j, dm in enumerate(delta_m):
        system = assemble_system(with_detuning(config, dm), phase_a=phase_a, loading=loading)
        magnitude[:, j] = np.abs(steady_state_s21(system, omegas))
    return DetuningMap(delta_c, delta_m, magnitude)


@dataclass(frozen=True)
class CouplingClassification:
    """Outcome of the level-attraction / level-repulsion analysis.

    ``real_gap`` / ``imag_gap`` are the minimum separations of the
    transmission-zero positions / widths over the magnon sweep;
    ``center_gap`` is the position separation at zero detuning,
    ``mean_linewidth`` the mean dip linewidth (twice the zero's distance
    from the real axis) there.  ``strong`` flags a resolved splitting:
    ``center_gap > mean_linewidth``.
    """

    label: str  # "repulsion" | "attraction" | "unresolved"
    real_gap: float
    imag_gap: float
    center_gap: float
    mean_linewidth: float
    strong: bool


def _zero_branches(z0: np.ndarray, delta_m: np.ndarray) -> np.ndarray:
    """Continuity-paired transmission-zero frequencies over the sweep.

    Only the magnon diagonal moves with the detuning, so the zero matrix
    at each point is a rank-zero update of the base plus ``j delta_m``
    in the (0, 0) slot; the quadratic eigenvalues are evaluated
    vectorised and then paired branch by branch.
    """
    t = z0[0, 0] + z0[1, 1] + 1j * delta_m
    d = (z0[0, 0] + 1j * delta_m) * z0[1, 1] - z0[0, 1] * z0[1, 0]
    disc = np.sqrt(t * t - 4 * d)
    lam_plus = (t + disc) / 2
    lam_minus = (t - disc) / 2
    zeros = np.stack([-1j * lam_plus, -1j * lam_minus], axis=1)

    paired = np.empty_like(zeros)
    order = np.argsort(zeros[0].real)
    paired[0] = zeros[0][order]
    for i in range(1, len(zeros)):
        a, b = zeros[i]
        keep = abs(a - paired[i - 1, 0]) + abs(b - paired[i - 1, 1])
        swap = abs(b - paired[i - 1, 0]) + abs(a - paired[i - 1, 1])
        paired[i] = (a, b) if keep <= swap else (b, a)
    return paired


def classify_coupling(
    config: SystemConfig,
    phase_a: Optional[float] = None,
    delta_m: Optional[np.ndarray] = None,
    critical: bool = False,
    loading_mode: str = "complex",
) -> CouplingClassification:
    """Classify the coupling regime from the transmission-zero branches.

    Operational rule: if the zero positions cross during the sweep the
    branches pass through each other (level attraction); if they avoid
    crossing, the avoided gap at zero detuning is compared against the
    mean dip linewidth there - a resolved gap is level repulsion, an
    unresolved one still looks like merging dips and is labelled
    attraction.  Negligible magnon-cavity coupling gives "unresolved".
    """
    if config.magnon is None:
        raise ScenarioError("classify_coupling requires a coupled configuration")
    delta_m = DEFAULT_DELTA_M if delta_m is None else np.asarray(delta_m, dtype=float)
    if delta_m.size < 3:
        raise ScenarioError("classification needs at least three magnon detunings")

    loading = resolve_loading(config, phase_a, critical, loading_mode)
    base = assemble_system(with_detuning(config, 0.0), phase_a=phase_a, loading=loading)

    m = base.matrix
    scale = max(abs(m[0, 0]), abs(m[1, 1]), 1.0)
    if np.sqrt(abs(m[0, 1] * m[1, 0])) < 1e-9 * scale:
        return CouplingClassification("unresolved", 0.0, 0.0, 0.0, 0.0, False)

    z0 = transmission_zero_matrix(base)
    branches = _zero_branches(z0, delta_m)
    diff = branches[:, 0] - branches[:, 1]
    dre, dim = diff.real, diff.imag

    tiny = 1e-9 * max(1.0, float(np.max(np.abs(diff))))
    real_crossed = bool(
        np.any(np.abs(dre) <= tiny) or np.any(np.sign(dre[:-1]) * np.sign(dre[1:]) < 0)
    )

    i0 = int(np.argmin(np.abs(delta_m)))
    center_gap = float(abs(dre[i0]))
    mean_linewidth = float(np.mean(2.0 * np.abs(branches[i0].imag)))
    strong = center_gap > mean_linewidth

    if real_crossed:
        label = "attraction"
    elif strong:
        label = "repulsion"
    else:
        label = "attraction"

    return CouplingClassification(
        label=label,
        real_gap=float(np.min(np.abs(dre))),
        imag_gap=float(np.min(np.abs(dim))),
        center_gap=center_gap,
        mean_linewidth=mean_linewidth,
        strong=strong,
    )


class Dip(NamedTuple):
    freq: float
    depth: float
    linewidth: float


def find_dips(spectrum: Spectrum, prominence: float = 0.05) -> list[Dip]:
    """Local minima of |S21| with sub-grid position refinement.

    Candidate dips must rise by at least ``prominence`` above the
    surrounding signal.  The reported depth is measured from the unit
    incident amplitude (``1 - min|S21|``); the linewidth is the full
    width at half that depth, and positions are refined by a parabola
    through the minimum and its neighbours.
    """
    mag = spectrum.magnitude
    freqs = spectrum.freqs
    if mag.size < 3:
        return []
    inverted = -mag
    peaks, props = find_peaks(inverted, prominence=prominence)
    if peaks.size == 0:
        return []
    depths = 1.0 - mag[peaks]
    # Dips that never duck below unity fall back to the local prominence
    # so the half-depth level stays meaningful.
    level_span = np.where(depths > 0, depths, props["prominences"])
    widths, _, left_ips, right_ips = peak_widths(
        inverted, peaks, rel_height=0.5,
        prominence_data=(level_span, props["left_bases"], props["right_bases"]),
    )
    index = np.arange(mag.size)
    out = []
    for pk, depth, li, ri in zip(peaks, depths, left_ips, right_ips):
        if 0 < pk < mag.size - 1:
            y0, y1, y2 = mag[pk - 1], mag[pk], mag[pk + 1]
            curv = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / curv if curv != 0 else 0.0
            pos = float(np.interp(pk + np.clip(shift, -0.5, 0.5), index, freqs))
        else:
            pos = float(freqs[pk])
        width = float(np.interp(ri, index, freqs) - np.interp(li, index, freqs))
        out.append(Dip(freq=pos, depth=float(depth), linewidth=width))
    return out


def phase_periodicity(
    config: SystemConfig,
    omegas: Optional[np.ndarray] = None,
    phi_grid: Optional[np.ndarray] = None,
    candidates: Sequence[float] = (np.pi, 2 * np.pi),
    critical: bool = False,
    accept: float = 1e-6,
) -> tuple[float, float]:
    """Measure the period of |S21| in the dominant propagation phase.

    For each candidate period the residual is the largest change of
    |S21| under the shift, over the phase grid and the frequency grid.
    Returns the smallest candidate whose residual is below ``accept``,
    otherwise the candidate with the minimal residual, together with
    that residual.
    """
    if omegas is None:
        omegas = config.cavity.omega + DEFAULT_DELTA_C
    omegas = np.asarray(omegas, dtype=float)
    if phi_grid is None:
        phi_grid = np.linspace(0.0, 2 * np.pi, 17)
    phi_grid = np.asarray(phi_grid, dtype=float)

    def magnitudes(phi: float) -> np.ndarray:
        return transmission_spectrum(config, omegas, phase_a=phi, critical=critical).magnitude

    base = [magnitudes(phi) for phi in phi_grid]
    residuals = []
    for period in candidates:
        worst = 0.0
        for phi, ref in zip(phi_grid, base):
            worst = max(worst, float(np.max(np.abs(magnitudes(phi + period) - ref))))
        residuals.append(worst)
        if worst < accept:
            return float(period), worst
    best = int(np.argmin(residuals))
    return float(candidates[best]), residuals[best]
