"""Parameter recovery from measured or synthetic transmission spectra.

A :class:`FitProblem` pairs observed data (|S21| or complex S21 on a
frequency grid) with a named parameter vector that rebuilds a
:class:`~magline.model.SystemConfig` through the standard recipe:
direction-symmetric rates, with the higher-order waveguide mode tied to
the dominant one through the amplitude fraction ``eta`` and phase ratio
``xi``.  The loss is the plain sum of squared residuals on |S21|
(magnitude data) or on real and imaginary parts (complex data).

The optimizer is a bounded derivative-free simplex search (Nelder-Mead)
with deterministic restart-on-stall; rate-like parameters are searched
in log space, frequencies and phases linearly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .analysis import transmission_spectrum
from .errors import ConfigError, MaglineError, ScenarioError
from .model import (
    ModeCoupling,
    OscillatorParams,
    Scenario,
    SystemConfig,
    WaveguideMode,
    validate,
)

#: Parameter names understood by the scenario builders.
PARAMETER_NAMES = (
    "omega_c", "omega_m", "kappa_c0", "kappa_m0",
    "kappa_c_ext", "kappa_m_ext", "eta", "xi", "phase_a",
)

_LOG_SCALED_PREFIXES = ("kappa",)


class FlatDirectionWarning(UserWarning):
    """A fitted parameter does not influence the loss (flat direction)."""


@dataclass(frozen=True)
class Parameter:
    """One fit parameter with box bounds and an optional freeze flag."""

    name: str
    value: float
    lower: float
    upper: float
    frozen: bool = False

    def __post_init__(self):
        if not self.lower <= self.value <= self.upper:
            raise ConfigError(
                f"parameter {self.name}: initial value {self.value} outside "
                f"bounds [{self.lower}, {self.upper}]"
            )

    @property
    def log_scaled(self) -> bool:
        return self.name.startswith(_LOG_SCALED_PREFIXES) and self.lower > 0


def _build_config(scenario: Scenario, values: Mapping[str, float]) -> tuple[SystemConfig, float]:
    """Recipe from named parameters to a validated config plus phase."""
    multi = scenario.startswith("multi")
    coupled = scenario.endswith("coupled")
    phase_a = float(values.get("phase_a", 0.0))
    eta = float(values.get("eta", 0.0))
    xi = float(values.get("xi", 0.0))

    kc = float(values["kappa_c_ext"])
    if multi:
        modes = (
            WaveguideMode(phase_a, 1.0, phase_ratio=1.0),
            WaveguideMode(xi * phase_a, eta, phase_ratio=xi),
        )
        cav_couplings = ((kc, kc), (eta * kc, eta * kc))
    else:
        modes = (WaveguideMode(phase_a, 1.0, phase_ratio=1.0),)
        cav_couplings = ((kc, kc),)
    cavity = OscillatorParams(float(values["omega_c"]), float(values["kappa_c0"]), cav_couplings)

    magnon = None
    if coupled:
        km = float(values["kappa_m_ext"])
        mag_couplings = tuple((eta * km, eta * km) if i else (km, km) for i in range(len(modes)))
        magnon = OscillatorParams(float(values["omega_m"]), float(values["kappa_m0"]), mag_couplings)

    return validate(SystemConfig(cavity=cavity, magnon=magnon, waveguide=modes,
                                 symmetric=True)), phase_a


_REQUIRED = {
    "single_cavity": ("omega_c", "kappa_c0", "kappa_c_ext", "phase_a"),
    "single_coupled": ("omega_c", "omega_m", "kappa_c0", "kappa_m0",
                       "kappa_c_ext", "kappa_m_ext", "phase_a"),
    "multi_cavity": ("omega_c", "kappa_c0", "kappa_c_ext", "eta", "xi", "phase_a"),
    "multi_coupled": ("omega_c", "omega_m", "kappa_c0", "kappa_m0",
                      "kappa_c_ext", "kappa_m_ext", "eta", "xi", "phase_a"),
}


@dataclass(frozen=True)
class FitProblem:
    """Observed spectrum plus the parameter vector to recover.

    ``data`` may be real (|S21|) or complex; the loss adapts
    accordingly.  Parameters appear in a fixed order; frozen ones never
    move.
    """

    freqs: np.ndarray
    data: np.ndarray
    scenario: Scenario
    parameters: tuple[Parameter, ...]

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        data = np.asarray(self.data)
        data = data.astype(complex) if np.iscomplexobj(data) else data.astype(float)
        if freqs.ndim != 1 or data.shape != freqs.shape:
            raise ConfigError("freqs and data must be 1-D arrays of equal length")
        if self.scenario not in _REQUIRED:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate parameter names")
        missing = [n for n in _REQUIRED[self.scenario] if n not in names]
        if missing:
            raise ConfigError(f"scenario {self.scenario} is missing parameters {missing}")
        unknown = [n for n in names if n not in PARAMETER_NAMES]
        if unknown:
            raise ConfigError(f"unknown parameter names {unknown}")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "parameters", tuple(self.parameters))

    @property
    def magnitude_only(self) -> bool:
        return not np.iscomplexobj(self.data)

    def values(self) -> dict:
        return {p.name: p.value for p in self.parameters}

    @classmethod
    def for_scenario(
        cls,
        scenario: Scenario,
        freqs: np.ndarray,
        data: np.ndarray,
        init: Mapping[str, float],
        bounds: Optional[Mapping[str, tuple[float, float]]] = None,
        frozen: Sequence[str] = (),
    ) -> "FitProblem":
        """Problem with default box bounds around the initial guess.

        Rates get a factor-of-30 box (floored away from zero), frequency
        parameters a window of five total linewidths, ratios their
        natural [0, 1] range, and phases a full turn.
        """
        bounds = dict(bounds or {})
        width = 5.0 * (init["kappa_c0"] + init["kappa_c_ext"]) if "kappa_c_ext" in init else 500.0
        params = []
        for name in _REQUIRED[scenario]:
            if name not in init:
                raise ConfigError(f"initial guess is missing parameter {name!r}")
            value = float(init[name])
            if name in bounds:
                lo, hi = bounds[name]
            elif name.startswith("omega"):
                lo, hi = value - width, value + width
            elif name in ("eta", "xi"):
                lo, hi = 0.0, 1.0
            elif name == "phase_a":
                lo, hi = value - 2 * np.pi, value + 2 * np.pi
            else:  # rates
                lo, hi = max(value / 30.0, 1e-6), max(value * 30.0, 1e-3)
            params.append(Parameter(name, value, lo, hi, frozen=name in frozen))
        return cls(freqs=freqs, data=data, scenario=scenario, parameters=tuple(params))


@dataclass(frozen=True)
class FitResult:
    values: dict
    loss: float
    n_eval: int
    converged: bool


def residual(problem: FitProblem, values: Optional[Mapping[str, float]] = None) -> float:
    """Sum of squared residuals for one parameter assignment.

    Magnitude data compares |S21|; complex data compares real and
    imaginary parts.  Engine failures count as an infinite loss so the
    optimizer backs away from invalid corners.
    """
    assignment = dict(problem.values())
    if values is not None:
        assignment.update(values)
    for p in problem.parameters:
        v = assignment[p.name]
        if not (p.lower - 1e-12 <= v <= p.upper + 1e-12):
            raise ConfigError(
                f"parameter {p.name}={v} outside bounds [{p.lower}, {p.upper}]"
            )
    try:
        config, phase_a = _build_config(problem.scenario, assignment)
        model = transmission_spectrum(config, problem.freqs, phase_a=phase_a).values
    except MaglineError:
        return float("inf")
    if problem.magnitude_only:
        res = np.abs(model) - problem.data
        return float(np.sum(res * res))
    diff = model - problem.data
    return float(np.sum(diff.real**2 + diff.imag**2))


def _to_internal(p: Parameter, value: float) -> float:
    return float(np.log10(value)) if p.log_scaled else float(value)


def _from_internal(p: Parameter, x: float) -> float:
    return float(10.0**x) if p.log_scaled else float(x)


def fit(
    problem: FitProblem,
    max_evals: int = 20000,
    tol: float = 1e-10,
    seed: int = 0,
    restarts: int = 2,
) -> FitResult:
    """Minimise the residual with bounded Nelder-Mead plus restarts.

    The incumbent (best-so-far) loss is monotone by construction; the
    same seed and problem reproduce the identical trajectory.  Returns
    ``converged=False`` when the evaluation budget runs out first.

    Fitting magnitude-only data cannot determine the overall propagation
    phase of a bare single-mode cavity; a free ``phase_a`` in that
    scenario triggers a :class:`FlatDirectionWarning`.
    """
    free = [p for p in problem.parameters if not p.frozen]
    if (
        problem.magnitude_only
        and problem.scenario == "single_cavity"
        and any(p.name == "phase_a" for p in free)
    ):
        warnings.warn(
            "phase_a is a flat direction when fitting |S21| of a bare "
            "single-mode cavity; freeze it or supply complex data",
            FlatDirectionWarning,
            stacklevel=2,
        )

    start = problem.values()
    if not free:
        return FitResult(values=start, loss=residual(problem), n_eval=1, converged=True)

    counter = {"n": 0}
    best = {"x": None, "loss": float("inf")}

    def loss_internal(x: np.ndarray) -> float:
        counter["n"] += 1
        assignment = dict(start)
        for p, xv in zip(free, x):
            assignment[p.name] = min(max(_from_internal(p, xv), p.lower), p.upper)
        value = residual(problem, assignment)
        if value < best["loss"]:
            best["loss"] = value
            best["x"] = np.array(x)
        return value

    x0 = np.array([_to_internal(p, p.value) for p in free])
    bounds = [(_to_internal(p, p.lower), _to_internal(p, p.upper)) for p in free]
    spans = np.array([hi - lo for lo, hi in bounds])
    rng = np.random.default_rng(seed)

    converged = False
    for attempt in range(restarts + 1):
        remaining = max_evals - counter["n"]
        if remaining <= 0:
            break
        result = minimize(
            loss_internal,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxfev": remaining, "xatol": tol, "fatol": tol, "adaptive": True},
        )
        converged = converged or bool(result.success)
        # Restart from the incumbent with a small deterministic kick.
        kick = 0.01 * spans * rng.standard_normal(len(free))
        x0 = np.clip(best["x"] + kick, [b[0] for b in bounds], [b[1] for b in bounds])

    if best["x"] is None:
        loss_internal(x0)

    values = dict(start)
    for p, xv in zip(free, best["x"]):
        values[p.name] = min(max(_from_internal(p, xv), p.lower), p.upper)
    return FitResult(values=values, loss=best["loss"], n_eval=counter["n"], converged=converged)


def load_spectrum(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a delimited-text spectrum.

    Columns: frequency (MHz), |S21| and, optionally, phase (radians);
    with the third column present the data is reconstructed as complex.
    Comma, whitespace and ``#`` comments are accepted; a non-numeric
    first line is treated as a header.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.replace(",", " ").split()
            try:
                rows.append([float(x) for x in parts])
            except ValueError:
                if lineno == 1:
                    continue  # header line
                raise ConfigError(f"{path}: line {lineno}: cannot parse {line.strip()!r}")
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    ncols = {len(r) for r in rows}
    if len(ncols) != 1 or ncols.pop() not in (2, 3):
        raise ConfigError(f"{path}: expected 2 or 3 numeric columns on every row")
    table = np.array(rows)
    freqs = table[:, 0]
    if table.shape[1] == 2:
        return freqs, table[:, 1]
    return freqs, table[:, 1] * np.exp(1j * table[:, 2])
