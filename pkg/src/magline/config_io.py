"""Configuration files: a TOML schema mirroring SystemConfig.

Schema (all rates in MHz, phases in radians)::

    symmetric = true                  # optional, default false

    [cavity]                          # required
    omega = 10000.0                   # resonance frequency, MHz
    kappa0 = 17.0                     # intrinsic damping, MHz
    couplings = [                     # one entry per waveguide mode
        {forward = 350.0, backward = 350.0},
        {forward = 35.0, backward = 35.0},
    ]

    [magnon]                          # optional: omit for cavity-only
    omega = 10000.0
    kappa0 = 1.0
    couplings = [{forward = 8.0, backward = 8.0}, {forward = 0.8, backward = 0.8}]

    [[waveguide]]                     # one block per propagation mode
    phase = 0.0                       # radians, or a "pi:X" string
    input_fraction = 1.0              # exactly 1 marks the dominant mode
    phase_ratio = 1.0                 # optional: scales with swept phase

    [[waveguide]]
    phase = "pi:0.2"
    input_fraction = 0.1
    phase_ratio = 0.2

Angles may be written as multiples of pi with a ``pi:`` prefix
(e.g. ``"pi:0.5"``) to avoid decimal-pi rounding.
"""

from __future__ import annotations

import math
import sys
from typing import Union

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .errors import ConfigError
from .model import ModeCoupling, OscillatorParams, SystemConfig, WaveguideMode, validate

SCHEMA_VERSION = "1"


def parse_angle(value: Union[str, float, int]) -> float:
    """Angle in radians from a number or a ``pi:X`` multiple-of-pi string."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        if text.startswith("pi:"):
            try:
                return math.pi * float(text[3:])
            except ValueError:
                raise ConfigError(f"cannot parse pi-multiple angle {value!r}") from None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"cannot parse angle {value!r}") from None
    raise ConfigError(f"cannot parse angle {value!r}")


def _number(section: str, key: str, raw: dict) -> float:
    if key not in raw:
        raise ConfigError(f"{section}: missing required key '{key}'")
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}: expected a number, got {value!r}")
    return float(value)


def _oscillator(section: str, raw: dict) -> OscillatorParams:
    allowed = {"omega", "kappa0", "couplings"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{section}: unknown key '{sorted(unknown)[0]}'")
    couplings = raw.get("couplings")
    if not isinstance(couplings, list) or not couplings:
        raise ConfigError(f"{section}: 'couplings' must be a non-empty array of tables")
    entries = []
    for i, entry in enumerate(couplings):
        if not isinstance(entry, dict):
            raise ConfigError(f"{section}.couplings[{i}]: expected a table")
        extra = set(entry) - {"forward", "backward"}
        if extra:
            raise ConfigError(f"{section}.couplings[{i}]: unknown key '{sorted(extra)[0]}'")
        entries.append(
            ModeCoupling(
                _number(f"{section}.couplings[{i}]", "forward", entry),
                _number(f"{section}.couplings[{i}]", "backward", entry),
            )
        )
    return OscillatorParams(
        omega=_number(section, "omega", raw),
        kappa0=_number(section, "kappa0", raw),
        couplings=tuple(entries),
    )


def config_from_dict(raw: dict) -> SystemConfig:
    """Validated SystemConfig from parsed TOML data."""
    allowed = {"symmetric", "cavity", "magnon", "waveguide"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level key '{sorted(unknown)[0]}'")
    if "cavity" not in raw:
        raise ConfigError("missing required section [cavity]")
    if "waveguide" not in raw:
        raise ConfigError("missing required section [[waveguide]]")

    symmetric = raw.get("symmetric", False)
    if not isinstance(symmetric, bool):
        raise ConfigError(f"symmetric: expected a boolean, got {symmetric!r}")

    modes = []
    blocks = raw["waveguide"]
    if not isinstance(blocks, list) or not blocks:
        raise ConfigError("waveguide: expected at least one [[waveguide]] block")
    for i, block in enumerate(blocks):
        extra = set(block) - {"phase", "input_fraction", "phase_ratio"}
        if extra:
            raise ConfigError(f"waveguide[{i}]: unknown key '{sorted(extra)[0]}'")
        if "phase" not in block:
            raise ConfigError(f"waveguide[{i}]: missing required key 'phase'")
        ratio = block.get("phase_ratio")
        if ratio is not None and (isinstance(ratio, bool) or not isinstance(ratio, (int, float))):
            raise ConfigError(f"waveguide[{i}].phase_ratio: expected a number, got {ratio!r}")
        fraction = block.get("input_fraction", 1.0)
        if isinstance(fraction, bool) or not isinstance(fraction, (int, float)):
            raise ConfigError(
                f"waveguide[{i}].input_fraction: expected a number, got {fraction!r}"
            )
        modes.append(
            WaveguideMode(
                phase=parse_angle(block["phase"]),
                input_fraction=float(fraction),
                phase_ratio=None if ratio is None else float(ratio),
            )
        )

    cavity = _oscillator("cavity", raw["cavity"])
    magnon = _oscillator("magnon", raw["magnon"]) if "magnon" in raw else None
    return validate(
        SystemConfig(cavity=cavity, magnon=magnon, waveguide=tuple(modes), symmetric=symmetric)
    )


def load_config(path) -> SystemConfig:
    """Parse and validate a TOML configuration file.

    Syntax errors surface with the line/column reported by the TOML
    parser; semantic errors name the offending key.
    """
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"configuration file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    try:
        return config_from_dict(raw)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def config_to_dict(config: SystemConfig) -> dict:
    out: dict = {"symmetric": config.symmetric}
    out["cavity"] = {
        "omega": config.cavity.omega,
        "kappa0": config.cavity.kappa0,
        "couplings": [
            {"forward": c.forward, "backward": c.backward} for c in config.cavity.couplings
        ],
    }
    if config.magnon is not None:
        out["magnon"] = {
            "omega": config.magnon.omega,
            "kappa0": config.magnon.kappa0,
            "couplings": [
                {"forward": c.forward, "backward": c.backward} for c in config.magnon.couplings
            ],
        }
    out["waveguide"] = [
        {
            "phase": m.phase,
            "input_fraction": m.input_fraction.real
            if m.input_fraction.imag == 0
            else [m.input_fraction.real, m.input_fraction.imag],
            **({} if m.phase_ratio is None else {"phase_ratio": m.phase_ratio}),
        }
        for m in config.waveguide
    ]
    return out


def dump_config(config: SystemConfig) -> str:
    """Render a configuration back to TOML text."""
    data = config_to_dict(config)
    lines = [f"symmetric = {'true' if data['symmetric'] else 'false'}", ""]
    for section in ("cavity", "magnon"):
        if section not in data:
            continue
        osc = data[section]
        lines.append(f"[{section}]")
        lines.append(f"omega = {osc['omega']!r}")
        lines.append(f"kappa0 = {osc['kappa0']!r}")
        entries = ", ".join(
            f"{{forward = {c['forward']!r}, backward = {c['backward']!r}}}"
            for c in osc["couplings"]
        )
        lines.append(f"couplings = [{entries}]")
        lines.append("")
    for mode in data["waveguide"]:
        lines.append("[[waveguide]]")
        lines.append(f"phase = {mode['phase']!r}")
        lines.append(f"input_fraction = {mode['input_fraction']!r}")
        if "phase_ratio" in mode:
            lines.append(f"phase_ratio = {mode['phase_ratio']!r}")
        lines.append("")
    return "\n".join(lines)
