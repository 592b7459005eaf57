"""Command-line interface: sweep orchestration and numeric exports.

All outputs are plain delimited text with a single header line; complex
values are split into real/imaginary columns.  Each output file gets a
JSON run manifest alongside it so a run can be reproduced bit-for-bit.

Exit codes: 0 success, 2 configuration/usage error, 3 scenario error,
4 numerical error, 5 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__, analysis, fitting, multi_mode, single_mode
from .config_io import SCHEMA_VERSION, config_to_dict, load_config, parse_angle
from .errors import ConfigError, ConvergenceError, NumericalError, ScenarioError
from .model import ModeCoupling, Spectrum, SystemConfig, phases_for
from .solver import assemble_system, steady_state_s21, time_domain_s21

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SCENARIO = 3
EXIT_NUMERIC = 4
EXIT_ORACLE = 5


class OracleMismatch(Exception):
    """Time-domain and frequency-domain transmissions disagree."""


def _write_table(path, header: list[str], rows: np.ndarray) -> None:
    rows = np.atleast_2d(rows)
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def _write_manifest(out_path, subcommand: str, args: argparse.Namespace,
                    config: SystemConfig, outputs: list[str], grids: dict,
                    started: float) -> None:
    manifest = {
        "tool": "magline",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "arguments": {
            k: v for k, v in sorted(vars(args).items()) if k not in ("func",)
        },
        "config": config_to_dict(config),
        "grids": grids,
        "outputs": outputs,
        "seed": getattr(args, "seed", None),
        "wall_clock_s": round(time.time() - started, 6),
    }
    with open(str(out_path) + ".manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True, default=str)
        handle.write("\n")


def _angle(text: str) -> float:
    try:
        return parse_angle(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_spectrum(args: argparse.Namespace) -> int:
    started = time.time()
    config = load_config(args.config)
    lo, hi = args.freq_range
    if args.points < 1:
        raise ConfigError("--points must be at least 1")
    if args.points == 1:
        delta_c = np.array([(lo + hi) / 2.0])
    else:
        if hi <= lo:
            raise ConfigError("--freq-range must satisfy LO < HI")
        delta_c = np.linspace(lo, hi, args.points)
    omega_c = config.cavity.omega
    omegas = omega_c + delta_c

    if args.phase_b is not None:
        if config.n_modes != 2:
            raise ScenarioError("--phase-b applies to two-mode waveguides only")
        base = phases_for(config, args.phase_a)
        phases = base.copy()
        phases[1 - config.dominant_index] = args.phase_b
        work = replace(config, waveguide=tuple(
            replace(mode, phase=ph) for mode, ph in zip(config.waveguide, phases)
        ))
        loading = analysis.resolve_loading(work, None, args.critical, args.critical_mode)
        system = assemble_system(work, loading=loading)
        spectrum = Spectrum(omegas, steady_state_s21(system, omegas))
    else:
        spectrum = analysis.transmission_spectrum(
            config, omegas, phase_a=args.phase_a,
            critical=args.critical, loading_mode=args.critical_mode,
        )
    table = np.column_stack([
        spectrum.freqs, spectrum.freqs - omega_c,
        spectrum.values.real, spectrum.values.imag, spectrum.magnitude,
    ])
    _write_table(args.out, ["omega_MHz", "delta_c_MHz", "re_S21", "im_S21", "abs_S21"], table)
    grids = {"delta_c": [float(delta_c[0]), float(delta_c[-1]), int(delta_c.size)]}
    _write_manifest(args.out, "spectrum", args, config, [str(args.out)], grids, started)
    print(f"wrote {args.out} ({delta_c.size} rows)")
    return EXIT_OK


def cmd_map(args: argparse.Namespace) -> int:
    started = time.time()
    config = load_config(args.config)
    if config.magnon is None:
        raise ScenarioError("map requires a coupled configuration (magnon present)")
    dm_lo, dm_hi = args.dm_range
    dc_lo, dc_hi = args.dc_range
    if args.dm_points < 1 or dm_hi < dm_lo:
        raise ConfigError("empty magnon-detuning range")
    if args.dc_points < 2 or dc_hi <= dc_lo:
        raise ConfigError("empty drive-detuning range")
    delta_m = np.linspace(dm_lo, dm_hi, args.dm_points)
    delta_c = np.linspace(dc_lo, dc_hi, args.dc_points)

    grid = analysis.detuning_map(
        config, phase_a=args.phase_a, delta_c=delta_c, delta_m=delta_m,
        critical=args.critical, loading_mode=args.critical_mode,
    )
    rows = np.column_stack([
        np.repeat(delta_c, delta_m.size),
        np.tile(delta_m, delta_c.size),
        grid.magnitude.ravel(),
    ])
    _write_table(args.out, ["delta_c_MHz", "delta_m_MHz", "abs_S21"], rows)

    label = analysis.classify_coupling(
        config, phase_a=args.phase_a, delta_m=delta_m,
        critical=args.critical, loading_mode=args.critical_mode,
    )
    if config.n_modes == 1:
        coop = abs(single_mode.cooperativity(config, phases_for(config, args.phase_a)[0]))
    else:
        coop = abs(multi_mode.cooperativity(config, phase_a=args.phase_a))
    sidecar = str(args.out) + ".classification.json"
    with open(sidecar, "w", encoding="utf-8") as handle:
        json.dump(
            {
                "label": label.label,
                "strong": label.strong,
                "real_gap_MHz": label.real_gap,
                "imag_gap_MHz": label.imag_gap,
                "center_gap_MHz": label.center_gap,
                "mean_linewidth_MHz": label.mean_linewidth,
                "abs_cooperativity": coop,
            },
            handle,
            indent=2,
            sort_keys=True,
        )
        handle.write("\n")
    grids = {
        "delta_c": [float(dc_lo), float(dc_hi), int(args.dc_points)],
        "delta_m": [float(dm_lo), float(dm_hi), int(args.dm_points)],
    }
    _write_manifest(args.out, "map", args, config, [str(args.out), sidecar], grids, started)
    print(f"wrote {args.out} ({rows.shape[0]} rows) and {sidecar}")
    return EXIT_OK


def cmd_phase_sweep(args: argparse.Namespace) -> int:
    started = time.time()
    config = load_config(args.config)
    if config.magnon is None:
        raise ScenarioError("phase-sweep requires a coupled configuration")
    lo, hi = args.phi_range
    if args.steps < 1:
        raise ConfigError("--steps must be at least 1")
    phis = np.array([(lo + hi) / 2.0]) if args.steps == 1 else np.linspace(lo, hi, args.steps)
    omega_c = config.cavity.omega
    delta_c = np.linspace(args.dc_range[0], args.dc_range[1], args.dc_points)

    header = [
        "phi_a_rad", "dip1_freq_MHz", "dip1_depth", "dip1_width_MHz",
        "dip2_freq_MHz", "dip2_depth", "dip2_width_MHz",
        "center_gap_MHz", "label", "strong", "abs_C",
    ]
    lines = [",".join(header)]
    for phi in phis:
        spectrum = analysis.transmission_spectrum(
            config, omega_c + delta_c, phase_a=phi,
            critical=args.critical, loading_mode=args.critical_mode,
        )
        dips = sorted(analysis.find_dips(spectrum, prominence=args.prominence),
                      key=lambda d: -d.depth)[:2]
        dips = sorted(dips, key=lambda d: d.freq)
        cls = analysis.classify_coupling(
            config, phase_a=phi, critical=args.critical, loading_mode=args.critical_mode,
        )
        if config.n_modes == 1:
            coop = abs(single_mode.cooperativity(config, phi))
        else:
            coop = abs(multi_mode.cooperativity(config, phase_a=phi))
        cells = [f"{phi:.17g}"]
        for k in range(2):
            if k < len(dips):
                cells += [f"{dips[k].freq:.17g}", f"{dips[k].depth:.17g}",
                          f"{dips[k].linewidth:.17g}"]
            else:
                cells += ["nan", "nan", "nan"]
        cells += [f"{cls.center_gap:.17g}", cls.label, str(cls.strong).lower(), f"{coop:.17g}"]
        lines.append(",".join(cells))
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    grids = {
        "phi": [float(phis[0]), float(phis[-1]), int(phis.size)],
        "delta_c": [float(delta_c[0]), float(delta_c[-1]), int(delta_c.size)],
    }
    _write_manifest(args.out, "phase-sweep", args, config, [str(args.out)], grids, started)
    print(f"wrote {args.out} ({phis.size} rows)")
    return EXIT_OK


def _perturbed(config: SystemConfig, rng: np.random.Generator) -> SystemConfig:
    """Scale every rate by a uniform factor in [0.8, 1.2]."""

    def scale_osc(osc):
        couplings = tuple(
            ModeCoupling(c.forward * rng.uniform(0.8, 1.2), c.backward * rng.uniform(0.8, 1.2))
            for c in osc.couplings
        )
        return replace(osc, kappa0=osc.kappa0 * rng.uniform(0.8, 1.2), couplings=couplings)

    cavity = scale_osc(config.cavity)
    magnon = scale_osc(config.magnon) if config.magnon is not None else None
    return replace(config, cavity=cavity, magnon=magnon, symmetric=False)


def cmd_oracle_check(args: argparse.Namespace) -> int:
    started = time.time()
    config = load_config(args.config)
    if args.samples < 1:
        raise ConfigError("--samples must be at least 1")
    rng = np.random.default_rng(args.seed)
    failures = []
    worst = 0.0
    for i in range(args.samples):
        sample = _perturbed(config, rng)
        phase_a = rng.uniform(0.0, 2 * np.pi)
        span = 2.0 * (sample.cavity.kappa0 + sample.kappa_c)
        omega = sample.cavity.omega + rng.uniform(-span, span)
        system = assemble_system(sample, phase_a=phase_a)
        s_fd = steady_state_s21(system, omega)
        try:
            s_td = time_domain_s21(system, omega, steps_per_period=args.steps_per_period)
        except (NumericalError, ConvergenceError) as exc:
            failures.append((i, float("nan"), str(exc)))
            continue
        rel = abs(s_td - s_fd) / max(abs(s_fd), 0.01)
        worst = max(worst, rel)
        if rel > args.tolerance:
            failures.append((i, rel, f"omega={omega:.6g}, phase_a={phase_a:.6g}"))
    print(f"oracle check: {args.samples} samples, worst relative deviation {worst:.3e}")
    if failures:
        for i, rel, info in failures:
            print(f"  FAIL sample {i}: rel={rel:.3e} ({info})")
        raise OracleMismatch(f"{len(failures)} of {args.samples} samples exceeded tolerance")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(
                f"samples,{args.samples}\nworst_rel,{worst:.17g}\ntolerance,{args.tolerance:.17g}\n"
            )
        _write_manifest(args.out, "oracle-check", args, config, [str(args.out)], {}, started)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    started = time.time()
    config = load_config(args.config)
    freqs, data = fitting.load_spectrum(args.data)

    dom = config.dominant_index
    init = {
        "omega_c": config.cavity.omega,
        "kappa_c0": config.cavity.kappa0,
        "kappa_c_ext": float(config.cavity.forward_rates[dom]),
        "phase_a": float(phases_for(config)[dom]),
    }
    if config.magnon is not None:
        init["omega_m"] = config.magnon.omega
        init["kappa_m0"] = config.magnon.kappa0
        init["kappa_m_ext"] = float(config.magnon.forward_rates[dom])
    if config.n_modes > 1:
        others = [i for i in range(config.n_modes) if i != dom]
        init["eta"] = abs(config.input_fractions[others[0]])
        ratio = config.waveguide[others[0]].phase_ratio
        init["xi"] = float(ratio) if ratio is not None else 0.0

    frozen = tuple(x for x in (args.freeze or "").split(",") if x)
    problem = fitting.FitProblem.for_scenario(
        config.scenario, freqs, data, init, frozen=frozen
    )
    result = fitting.fit(problem, max_evals=args.max_evals, seed=args.seed)

    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(f"# fitted parameters ({config.scenario})\n")
        for name in sorted(result.values):
            handle.write(f"{name} = {result.values[name]:.17g}\n")
        handle.write(f"# loss = {result.loss:.17g}\n")
        handle.write(f"# evaluations = {result.n_eval}\n")
        handle.write(f"# converged = {str(result.converged).lower()}\n")
    _write_manifest(args.out, "fit", args, config, [str(args.out)], {}, started)
    print(f"wrote {args.out} (loss {result.loss:.3e}, {result.n_eval} evaluations)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magline",
        description="Coupled-mode transmission of magnon-photon systems on microwave lines",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"magline {__version__} (config schema {SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, critical=True):
        p.add_argument("config", help="TOML configuration file")
        if critical:
            p.add_argument("--critical", action="store_true",
                           help="apply the critical cavity loading")
            p.add_argument("--critical-mode", choices=multi_mode.LOADING_MODES,
                           default="complex",
                           help="how a complex critical loading enters the matrix")

    p = sub.add_parser("spectrum", help="transmission over a drive-frequency grid")
    add_common(p)
    p.add_argument("--phase-a", type=_angle, default=None,
                   help="dominant propagation phase (radians or pi:X)")
    p.add_argument("--phase-b", type=_angle, default=None,
                   help="second-mode phase override (two-mode only)")
    p.add_argument("--freq-range", type=float, nargs=2, default=(-800.0, 800.0),
                   metavar=("LO", "HI"), help="drive detuning range around the cavity, MHz")
    p.add_argument("--points", type=int, default=1601)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("map", help="|S21| over a (drive, magnon) detuning grid")
    add_common(p)
    p.add_argument("--phase-a", type=_angle, default=None)
    p.add_argument("--dm-range", type=float, nargs=2, default=(-300.0, 300.0),
                   metavar=("LO", "HI"))
    p.add_argument("--dm-points", type=int, default=241)
    p.add_argument("--dc-range", type=float, nargs=2, default=(-800.0, 800.0),
                   metavar=("LO", "HI"))
    p.add_argument("--dc-points", type=int, default=1601)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("phase-sweep", help="per-phase dips, classification and cooperativity")
    add_common(p)
    p.add_argument("--phi-range", type=_angle, nargs=2, default=(0.0, 2 * np.pi),
                   metavar=("LO", "HI"))
    p.add_argument("--steps", type=int, default=9)
    p.add_argument("--dc-range", type=float, nargs=2, default=(-800.0, 800.0),
                   metavar=("LO", "HI"))
    p.add_argument("--dc-points", type=int, default=1601)
    p.add_argument("--prominence", type=float, default=0.02)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phase_sweep)

    p = sub.add_parser("oracle-check", help="time-domain vs frequency-domain cross-validation")
    add_common(p, critical=False)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--steps-per-period", type=int, default=512)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("fit", help="recover parameters from a measured spectrum")
    p.add_argument("data", help="delimited text: frequency, |S21| [, phase]")
    p.add_argument("config", help="TOML configuration file with the initial guess")
    p.add_argument("--freeze", default="", help="comma-separated parameter names to hold fixed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-evals", type=int, default=20000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (NumericalError, ConvergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OracleMismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_ORACLE


if __name__ == "__main__":
    sys.exit(main())
