"""Command-line workbench.

Subcommands cover the full pipeline: mode tables, phase shifts, inelastic
rates, the Fock-space oracle check, reflection-trace synthesis and
fitting, observable extraction, parameter sweeps, and the bundled
figure-style recipes.  Exit codes: 0 success, 2 invalid configuration,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .boundary import (
    phase_shift_curve,
    renormalized_junction,
    second_order_phase_shift,
)
from .circuit import FluxPoint, build_modes, load_device_config
from .constants import CONSTANTS, RATE_PREFACTOR
from .errors import ConfigError, JJLineError, NumericsError
from .fock import calibrate_rate_prefactor
from .inelastic import rate_curve
from .pe import pe_finite_T, pe_zero_T
from .spectroscopy import extract_observables, fit_modes, synthesize_s11, trace_from_csv
from .sweep import (
    DEFAULT_BUDGET,
    SweepSpec,
    reproduce,
    rows_to_csv,
    run_sweep,
    run_table_sweep,
)


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _write(args, name: str, text: str) -> None:
    path = _out_path(args, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _default_pe(line):
    e_c = CONSTANTS.h * line.f_cutoff
    if line.T == 0:
        return pe_zero_T(line.alpha(), e_c)
    return pe_finite_T(line.alpha(), e_c, line.T)


def _cmd_modes(args) -> int:
    line, _ = load_device_config(args.config)
    modes = build_modes(line)
    rows = ["n,f_GHz,lambda_sq"]
    for n, f, lam in zip(modes.indices, modes.frequencies, modes.couplings):
        rows.append(f"{n},{f/1e9!r},{lam**2!r}")
    _write(args, "modes.csv", "\n".join(rows) + "\n")
    print(f"alpha = {line.alpha():.6f}, {len(modes)} modes")
    return 0


def _cmd_phase_shift(args) -> int:
    line, junction = load_device_config(args.config)
    ej = args.ej * 1e9 if args.ej is not None else junction.ej_max
    freqs = np.geomspace(line.f_min, 0.95 * line.f_cutoff, args.n_points)
    if args.method == "boundary":
        rj = renormalized_junction(line, junction, ej, use_renormalized=not args.bare_ej)
        curve = phase_shift_curve(line, rj, freqs)
    else:
        curve = second_order_phase_shift(line, junction, ej, freqs)
    _write(args, "phase_shift.csv", curve.to_csv())
    return 0


def _cmd_inelastic(args) -> int:
    line, junction = load_device_config(args.config)
    ej = args.ej * 1e9 if args.ej is not None else junction.ej_max
    modes = build_modes(line)
    result = rate_curve(modes, junction, ej, _default_pe(line))
    _write(args, "inelastic.csv", result.to_csv())
    return 0


def _cmd_oracle_check(args) -> int:
    record = calibrate_rate_prefactor()
    print("mode count | oracle/analytic ratio | deviation from frozen prefactor")
    worst = 0.0
    for n, r in zip(record["mode_counts"], record["ratios"]):
        dev = abs(r / RATE_PREFACTOR - 1.0)
        worst = max(worst, dev)
        print(f"{n:10d} | {r:.8f} | {dev*100:6.2f} %")
    print(f"frozen prefactor {RATE_PREFACTOR:.8f}, fresh fit {record['prefactor']:.8f}")
    if abs(record["prefactor"] / RATE_PREFACTOR - 1.0) > 1e-6:
        raise NumericsError("calibration drifted from the frozen prefactor")
    return 0


def _cmd_s11_synth(args) -> int:
    line, junction = load_device_config(args.config)
    for i, phi in enumerate(args.flux):
        trace = synthesize_s11(
            line,
            junction,
            FluxPoint(phi),
            kappa_ext=args.kappa_ext * 1e6,
            kappa_bg=args.kappa_bg * 1e6,
            noise_sigma=args.noise,
            f_window=(args.f_lo * 1e9, args.f_hi * 1e9),
            n_points=args.n_points,
            seed=args.seed + i,
        )
        _write(args, f"s11_flux_{phi:+.4f}.csv", trace.to_csv())
    return 0


def _cmd_s11_fit(args) -> int:
    with open(args.trace, "r", encoding="utf-8") as fh:
        trace = trace_from_csv(fh.read())
    guesses = [g * 1e9 for g in args.guess] if args.guess else None
    report = fit_modes(trace, guesses=guesses)
    name = os.path.splitext(os.path.basename(args.trace))[0] + "_fit.json"
    _write(args, name, report.to_json())
    return 0


def _cmd_extract(args) -> int:
    from .spectroscopy import FitReport, ModeFit

    def load(path):
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return FitReport(
            flux=FluxPoint(data["flux_ratio"]),
            noise_sigma=data["noise_sigma"],
            modes=tuple(
                ModeFit(
                    f0=m["f0_GHz"] * 1e9,
                    kappa_ext=m["kappa_ext_MHz"] * 1e6,
                    kappa_int=m["kappa_int_MHz"] * 1e6,
                    residual=m["residual"],
                    accepted=m["accepted"],
                    message=m.get("message", ""),
                )
                for m in data["modes"]
            ),
        )

    points = extract_observables(
        load(args.integer), load(args.half), delta=args.delta * 1e9,
        area_um2=args.area,
    )
    rows = ["f_baseline_GHz,delta_over_pi,gamma_in_MHz"]
    for p in points:
        rows.append(f"{p.f_baseline/1e9!r},{p.delta_over_pi!r},{p.gamma_in/1e6!r}")
    _write(args, "observables.csv", "\n".join(rows) + "\n")
    return 0


def _cmd_sweep(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if "table" in raw:
        rows = run_table_sweep(
            raw.get("base", {}), raw["table"], f_probe_ghz=raw.get("f_probe_GHz", 7.0)
        )
    else:
        spec = SweepSpec(
            base=raw.get("base", {}),
            axes=raw.get("axes", {}),
            outputs=tuple(raw.get("outputs", ("delta", "gamma_in", "side"))),
            budget=args.budget,
            seed=args.seed,
        )
        rows = run_sweep(spec, jobs=args.jobs)
    _write(args, "sweep.csv", rows_to_csv(rows))
    return 0


def _cmd_reproduce(args) -> int:
    manifest = reproduce(args.figure, args.out, seed=args.seed)
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jjline",
        description="Photon scattering at a junction-terminated high-impedance line",
    )
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="noise seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")
    parser.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="maximum sweep grid points")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", help="baseline mode ladder from a device config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_modes)

    p = sub.add_parser("phase-shift", help="elastic phase shift curve")
    p.add_argument("--config", required=True)
    p.add_argument("--method", choices=("boundary", "kk"), default="boundary")
    p.add_argument("--ej", type=float, default=None, help="working E_J in GHz")
    p.add_argument("--bare-ej", action="store_true",
                   help="skip the fluctuation renormalization in the inductive branch")
    p.add_argument("--n-points", type=int, default=200)
    p.set_defaults(func=_cmd_phase_shift)

    p = sub.add_parser("inelastic", help="down-conversion rates for all modes")
    p.add_argument("--config", required=True)
    p.add_argument("--ej", type=float, default=None, help="working E_J in GHz")
    p.set_defaults(func=_cmd_inelastic)

    p = sub.add_parser("oracle-check", help="compare analytic rates to the Fock oracle")
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("s11-synth", help="synthesize reflection traces")
    p.add_argument("--config", required=True)
    p.add_argument("--flux", type=float, nargs="+", default=[0.0, 0.5])
    p.add_argument("--kappa-ext", type=float, default=1.0, help="MHz")
    p.add_argument("--kappa-bg", type=float, default=0.1, help="MHz")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--f-lo", type=float, required=True, help="GHz")
    p.add_argument("--f-hi", type=float, required=True, help="GHz")
    p.add_argument("--n-points", type=int, default=2001)
    p.set_defaults(func=_cmd_s11_synth)

    p = sub.add_parser("s11-fit", help="fit a reflection trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--guess", type=float, nargs="*", help="mode guesses in GHz")
    p.set_defaults(func=_cmd_s11_fit)

    p = sub.add_parser("extract", help="observables from two fit reports")
    p.add_argument("--integer", required=True, help="fit JSON at integer flux")
    p.add_argument("--half", required=True, help="fit JSON at half-integer flux")
    p.add_argument("--delta", type=float, required=True, help="free spectral range, GHz")
    p.add_argument("--area", type=float, default=None, help="junction area, um^2")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("sweep", help="run a sweep described by a JSON spec")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("reproduce", help="emit a bundled figure-style dataset")
    p.add_argument("--figure", required=True)
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except JJLineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
