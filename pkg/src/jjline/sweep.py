"""Parameter sweeps and figure-style reproduction recipes.

Sweeps evaluate the core observables on a cartesian grid of circuit
parameters; every grid point is independent, failures are recorded in-row
and never abort the sweep, and identical specs produce byte-identical
output.  The reproduce recipes bundle representative device parameters
(the published device tables live outside the main text, so these are
labeled representative, not authoritative).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .boundary import (
    classify_side,
    phase_shift_curve,
    renormalized_junction,
    second_order_phase_shift,
)
from .circuit import JunctionSpec, LineSpec, build_modes
from .constants import CONSTANTS
from .errors import ConfigError, JJLineError
from .inelastic import rate_curve, scaling_exponent
from .pe import pe_finite_T, pe_zero_T

AXIS_NAMES = ("Z", "E_J", "E_C", "T", "phi", "f")
OUTPUT_NAMES = ("delta", "gamma_in", "slope", "side")

DEFAULT_BUDGET = 20_000


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("jjline")
    except Exception:
        return "0.1.0"


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian sweep description.

    ``base`` holds the defaults (Z ohm; E_J, E_C, f in GHz; T in K; phi
    dimensionless; Delta GHz); ``axes`` maps a subset of the axis names to
    value lists that override the base point by point.
    """

    base: dict
    axes: dict = field(default_factory=dict)
    outputs: tuple[str, ...] = ("delta", "gamma_in", "side")
    budget: int = DEFAULT_BUDGET
    seed: int = 0

    def __post_init__(self) -> None:
        for name in self.axes:
            if name not in AXIS_NAMES:
                raise ConfigError(f"unknown sweep axis {name!r}; allowed: {AXIS_NAMES}")
        for out in self.outputs:
            if out not in OUTPUT_NAMES:
                raise ConfigError(f"unknown output {out!r}; allowed: {OUTPUT_NAMES}")
        n = 1
        for vals in self.axes.values():
            if len(vals) == 0:
                raise ConfigError("sweep axis with no values")
            n *= len(vals)
        if n > self.budget:
            raise ConfigError(f"sweep has {n} points, over the budget {self.budget}")

    def grid(self) -> list[dict]:
        names = list(self.axes)
        points = []
        for combo in product(*(self.axes[n] for n in names)):
            points.append(dict(zip(names, combo)))
        return points


def _specs_for_point(base: dict, overrides: dict) -> tuple[LineSpec, JunctionSpec, float, float]:
    """Build line/junction specs and the working-point (E_J, f_probe)."""
    p = dict(base)
    p.update(overrides)
    ec = p.get("E_C", 40.0) * 1e9
    ej_max = p.get("E_J_max", p.get("E_J", 3.0)) * 1e9
    junction = JunctionSpec(ej_max=ej_max, ec=ec)
    z = p.get("Z", CONSTANTS.R_Q)
    delta = p.get("Delta", 0.2) * 1e9
    f_cut_physical = 1.0 / (2.0 * math.pi * z * junction.cj)
    f_cutoff = min(p["f_cutoff"] * 1e9, f_cut_physical) if "f_cutoff" in p else f_cut_physical
    line = LineSpec(
        Z=z, delta=delta, f_min=p.get("f_min", p.get("Delta", 0.2)) * 1e9,
        f_cutoff=f_cutoff, T=p.get("T", 0.0),
    )
    if "phi" in p:
        ej = ej_max * abs(math.cos(math.pi * p["phi"]))
    else:
        ej = p.get("E_J", ej_max / 1e9) * 1e9
    f_probe = p.get("f", 7.0) * 1e9
    return line, junction, ej, f_probe


def _evaluate_task(task: tuple) -> tuple[int, dict]:
    index, base, overrides, outputs = task
    row = {f"axis_{k}": v for k, v in overrides.items()}
    try:
        line, junction, ej, f_probe = _specs_for_point(base, overrides)
        alpha = line.alpha()
        row["alpha"] = alpha
        row["EJ_GHz"] = ej / 1e9
        e_c = CONSTANTS.h * line.f_cutoff
        pe = None
        if {"delta", "gamma_in", "slope"} & set(outputs):
            pe = pe_zero_T(alpha, e_c) if line.T == 0 else pe_finite_T(alpha, e_c, line.T)
        if "side" in outputs:
            row["side"] = classify_side(alpha)
        if "delta" in outputs:
            curve = second_order_phase_shift(line, junction, ej, [f_probe], pe=pe)
            row["delta_over_pi"] = float(curve.delta_over_pi[0])
        if "gamma_in" in outputs or "slope" in outputs:
            modes = build_modes(line)
            rates = rate_curve(modes, junction, ej, pe)
            if "gamma_in" in outputs:
                i = int(np.argmin(np.abs(modes.frequencies - f_probe)))
                row["gamma_in_MHz"] = rates.gamma_in[i] / 1e6
                row["gamma_over_Delta"] = float(rates.gamma_over_delta[i])
            if "slope" in outputs:
                f_hi = line.f_cutoff / 3.0
                slope, err = scaling_exponent(rates, f_hi / 10.0, f_hi)
                row["slope"] = slope
                row["slope_stderr"] = err
        row["status"] = "ok"
    except JJLineError as exc:
        row["status"] = f"error: {exc}"
    return index, row


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Evaluate the sweep grid; one output row per point, in grid order."""
    tasks = [
        (i, spec.base, overrides, spec.outputs)
        for i, overrides in enumerate(spec.grid())
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_task, tasks, chunksize=8))
    else:
        results = [_evaluate_task(t) for t in tasks]
    results.sort(key=lambda pair: pair[0])
    return [row for _, row in results]


def run_table_sweep(base: dict, table: list[dict], f_probe_ghz: float = 7.0) -> list[dict]:
    """Single-device sweep driven by a measured-style (B, Z, E_J) table.

    Each table row supplies the field coordinate ``B``, the wave impedance
    ``Z_ohm`` and the working-point ``EJ_GHz``; the observables are
    evaluated at ``f_probe_ghz``.
    """
    rows = []
    for i, entry in enumerate(table):
        overrides = {"Z": float(entry["Z_ohm"]), "E_J": float(entry["EJ_GHz"]),
                     "f": f_probe_ghz}
        _, row = _evaluate_task((i, base, overrides, ("delta", "gamma_in", "side")))
        row["B"] = float(entry["B"])
        rows.append(row)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    """Render rows with a stable union-of-keys column order."""
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k, "")) for k in columns})
    return buf.getvalue()


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


# Representative devices spanning both sides of the transition.  The probe
# band and spacings mimic a GHz-range experiment; these are bundled
# defaults, not measured-device values.
DEVICE_PRESETS = {
    "inductive": {"Z": 0.45 * CONSTANTS.R_Q, "E_J": 3.0, "E_C": 40.0, "Delta": 0.2},
    "capacitive": {"Z": 2.92 * CONSTANTS.R_Q, "E_J": 3.0, "E_C": 40.0, "Delta": 0.2},
    "critical": {"Z": CONSTANTS.R_Q, "E_J": 3.0, "E_C": 40.0, "Delta": 0.2},
}

FIG3_ALPHAS = (0.3, 0.45, 0.75, 1.0, 1.5, 2.0, 2.92)

# Default field-sweep table for the single-device recipe: impedance rises
# linearly through the critical value while E_J stays modulated but finite.
DEFAULT_B_TABLE = [
    {
        "B": round(b, 3),
        "Z_ohm": (0.5 + b) * CONSTANTS.R_Q,
        "EJ_GHz": 2.0 + math.cos(2.0 * math.pi * b),
    }
    for b in np.arange(0.0, 1.0001, 0.05)
]

FIGURE_IDS = ("fig1c", "fig1d_shape", "fig3a", "fig3b", "fig4a", "fig4b")


def reproduce(figure_id: str, out_dir: str, seed: int = 0) -> dict:
    """Emit plot-ready CSV data plus a manifest for one bundled recipe.

    The manifest carries every parameter, the package version, provenance
    labels, and a sha256 of each data file; rerunning a recipe reproduces
    the hashes bit for bit.
    """
    if figure_id not in FIGURE_IDS:
        raise ConfigError(f"unknown figure id {figure_id!r}; allowed: {FIGURE_IDS}")
    os.makedirs(out_dir, exist_ok=True)
    recipe = {
        "fig1c": _recipe_fig1c,
        "fig1d_shape": _recipe_fig1d,
        "fig3a": _recipe_fig3a,
        "fig3b": _recipe_fig3b,
        "fig4a": _recipe_fig4a,
        "fig4b": _recipe_fig4b,
    }[figure_id]
    files, params, labels = recipe(seed)

    manifest = {
        "figure": figure_id,
        "package_version": _package_version(),
        "seed": seed,
        "parameters": params,
        "provenance": labels,
        "files": {},
    }
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        manifest["files"][name] = hashlib.sha256(text.encode()).hexdigest()
    mpath = os.path.join(out_dir, f"{figure_id}_manifest.json")
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _preset_specs(preset: dict) -> tuple[LineSpec, JunctionSpec, float]:
    line, junction, ej, _ = _specs_for_point(preset, {})
    return line, junction, ej


def _recipe_fig1c(seed: int):
    rows = []
    for name in ("inductive", "capacitive"):
        preset = DEVICE_PRESETS[name]
        line, junction, ej = _preset_specs(preset)
        rj = renormalized_junction(line, junction, ej)
        freqs = np.geomspace(line.f_min, 0.95 * line.f_cutoff, 200)
        curve = phase_shift_curve(line, rj, freqs)
        for f, d in zip(freqs, curve.delta_over_pi):
            rows.append(
                {"branch": name, "alpha": line.alpha(), "f_GHz": f / 1e9,
                 "delta_over_pi": float(d)}
            )
    return (
        {"fig1c_phase_shift.csv": rows_to_csv(rows)},
        {"devices": {k: DEVICE_PRESETS[k] for k in ("inductive", "capacitive")}},
        ["linear-boundary phase shift, renormalized Josephson energy"],
    )


def _recipe_fig1d(seed: int):
    rows = []
    for alpha in (0.75, 1.0, 1.25):
        base = dict(DEVICE_PRESETS["critical"])
        base["Z"] = alpha * CONSTANTS.R_Q
        line, junction, ej = _preset_specs(base)
        pe = pe_zero_T(line.alpha(), CONSTANTS.h * line.f_cutoff)
        modes = build_modes(line)
        rates = rate_curve(modes, junction, ej, pe)
        for f, p in zip(rates.frequencies, rates.p_inelastic):
            rows.append(
                {"alpha": line.alpha(), "f_GHz": f / 1e9, "p_inelastic": float(p)}
            )
    return (
        {"fig1d_shape_inelastic_probability.csv": rows_to_csv(rows)},
        {"E_J_GHz": 3.0, "E_C_GHz": 40.0, "alphas": [0.75, 1.0, 1.25]},
        ["perturbative stand-in, structural comparison only"],
    )


def _recipe_fig3a(seed: int):
    rows = []
    f_probe = 6.7e9
    for alpha in FIG3_ALPHAS:
        base = dict(DEVICE_PRESETS["critical"])
        base["Z"] = alpha * CONSTANTS.R_Q
        line, junction, ej = _preset_specs(base)
        area = ej / 1e9 / junction.area_scale_ghz_um2
        curve = second_order_phase_shift(line, junction, ej, [f_probe])
        rows.append(
            {
                "alpha": line.alpha(),
                "f_GHz": f_probe / 1e9,
                "delta_over_pi": float(curve.delta_over_pi[0]),
                "delta_over_pi_per_um4": float(curve.delta_over_pi[0]) / area**2,
            }
        )
    return (
        {"fig3a_phase_shift_vs_alpha.csv": rows_to_csv(rows)},
        {"alphas": list(FIG3_ALPHAS), "f_probe_GHz": 6.7},
        ["area-squared normalized elastic response; representative devices"],
    )


def _recipe_fig3b(seed: int):
    rows = []
    for alpha in FIG3_ALPHAS:
        base = dict(DEVICE_PRESETS["critical"])
        base["Z"] = alpha * CONSTANTS.R_Q
        line, junction, ej = _preset_specs(base)
        area = ej / 1e9 / junction.area_scale_ghz_um2
        pe = pe_zero_T(line.alpha(), CONSTANTS.h * line.f_cutoff)
        modes = build_modes(line)
        rates = rate_curve(modes, junction, ej, pe)
        keep = rates.frequencies <= 0.3 * line.f_cutoff
        for f, g in zip(rates.frequencies[keep], rates.gamma_in[keep]):
            rows.append(
                {
                    "alpha": line.alpha(),
                    "f_GHz": f / 1e9,
                    "gamma_in_MHz_per_um4": g / 1e6 / area**2,
                }
            )
    return (
        {"fig3b_inelastic_vs_frequency.csv": rows_to_csv(rows)},
        {"alphas": list(FIG3_ALPHAS)},
        ["area-squared normalized inelastic response; representative devices"],
    )


def _recipe_fig4a(seed: int):
    base = {"E_C": 40.0, "Delta": 0.2}
    rows = run_table_sweep(base, DEFAULT_B_TABLE, f_probe_ghz=7.0)
    return (
        {"fig4a_single_device_sweep.csv": rows_to_csv(rows)},
        {"table": "bundled default B table", "f_probe_GHz": 7.0},
        ["single-device sweep with a synthetic Z(B), E_J(B) table"],
    )


def _recipe_fig4b(seed: int):
    rows = []
    for ratio in (0.75, 1.0, 1.3):
        base = dict(DEVICE_PRESETS["critical"])
        base["Z"] = ratio * CONSTANTS.R_Q
        base["E_J"] = 2.0
        line, junction, ej = _preset_specs(base)
        pe = pe_zero_T(line.alpha(), CONSTANTS.h * line.f_cutoff)
        modes = build_modes(line)
        rates = rate_curve(modes, junction, ej, pe)
        keep = (rates.frequencies >= 4e9) & (rates.frequencies <= 9e9)
        for f, g in zip(rates.frequencies[keep], rates.gamma_over_delta[keep]):
            rows.append(
                {"Z_over_RQ": ratio, "f_GHz": f / 1e9, "gamma_over_Delta": float(g)}
            )
    return (
        {"fig4b_inelastic_vs_frequency.csv": rows_to_csv(rows)},
        {"Z_over_RQ": [0.75, 1.0, 1.3], "E_J_GHz": 2.0},
        ["frequency trend of the down-conversion rate across the transition"],
    )
