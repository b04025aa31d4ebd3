"""Synthetic reflection spectroscopy and the extraction pipeline.

Emulates the measurement end to end: single-port reflection traces
S11(f) are synthesized from the model at a given flux (mode frequencies
shifted by the junction phase shift, linewidths broadened by the
down-conversion rate), each dip is fit with a complex resonance model,
and the observables are formed exactly as in the experiment:

* phase shift in units of pi = baseline-referenced frequency shift / Delta,
* inelastic rate = internal-linewidth difference between integer and
  half-integer flux.

The half-integer-flux baseline (junction eliminated) makes both
observables immune to static offsets of the ladder and to the external
coupling and background loss.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .boundary import second_order_phase_shift
from .circuit import FluxPoint, JunctionSpec, LineSpec, ModeSet, build_modes, flux_map
from .constants import CONSTANTS
from .errors import ConfigError, NumericsError
from .inelastic import rate_curve
from .pe import PEFunction, pe_finite_T, pe_zero_T


def s11_model(f, f0: float, kappa_ext: float, kappa_int: float):
    """Single-port reflection of one mode: 1 - k_ext / (i(f-f0) + k_tot/2)."""
    f = np.asarray(f, dtype=float)
    return 1.0 - kappa_ext / (1j * (f - f0) + (kappa_ext + kappa_int) / 2.0)


@dataclass(frozen=True)
class S11Trace:
    """One reflection trace at a fixed flux."""

    flux: FluxPoint
    frequencies: np.ndarray
    s11: np.ndarray
    noise_sigma: float
    device_id: str = "synthetic"
    overlap_flag: bool = False

    def validate(self) -> None:
        bound = 1.0 + 5.0 * self.noise_sigma + 1e-12
        if np.any(np.abs(self.s11) > bound):
            raise NumericsError("passivity violated: |S11| above the noise bound")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# flux_ratio = {self.flux.phi_ratio!r}\n")
        buf.write(f"# device_id = {self.device_id}\n")
        buf.write(f"# noise_sigma = {self.noise_sigma!r}\n")
        buf.write("f_GHz,re_s11,im_s11\n")
        for f, s in zip(self.frequencies, self.s11):
            buf.write(f"{f/1e9!r},{s.real!r},{s.imag!r}\n")
        return buf.getvalue()


def trace_from_csv(text: str) -> S11Trace:
    meta: dict[str, str] = {}
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
        elif not line.startswith("f_GHz"):
            a, b, c = line.split(",")
            rows.append((float(a), float(b), float(c)))
    arr = np.array(rows)
    return S11Trace(
        flux=FluxPoint(float(meta.get("flux_ratio", 0.0))),
        frequencies=arr[:, 0] * 1e9,
        s11=arr[:, 1] + 1j * arr[:, 2],
        noise_sigma=float(meta.get("noise_sigma", 0.0)),
        device_id=meta.get("device_id", "unknown"),
    )


def mode_parameters(
    line: LineSpec,
    junction: JunctionSpec,
    flux: FluxPoint,
    kappa_bg: float,
    pe: PEFunction | None = None,
    modes: ModeSet | None = None,
):
    """Shifted frequencies and internal linewidths of all baseline modes."""
    if modes is None:
        modes = build_modes(line)
    ej = flux_map(junction, flux)
    if ej == 0.0:
        return modes.frequencies.copy(), np.full(len(modes), kappa_bg), modes
    if pe is None:
        e_c = CONSTANTS.h * line.f_cutoff
        pe = pe_zero_T(line.alpha(), e_c) if line.T == 0 else pe_finite_T(
            line.alpha(), e_c, line.T
        )
    delta_curve = second_order_phase_shift(line, junction, ej, modes.frequencies, pe=pe)
    gammas = rate_curve(modes, junction, ej, pe).gamma_in
    f_shifted = modes.frequencies + delta_curve.delta * line.delta / math.pi
    return f_shifted, gammas + kappa_bg, modes


def synthesize_s11(
    line: LineSpec,
    junction: JunctionSpec,
    flux: FluxPoint,
    kappa_ext: float,
    kappa_bg: float,
    noise_sigma: float,
    f_window: tuple[float, float],
    n_points: int = 2001,
    seed: int = 0,
    pe: PEFunction | None = None,
    device_id: str = "synthetic",
) -> S11Trace:
    """Synthetic single-port reflection trace.

    Every baseline mode within one free spectral range of the window
    contributes a multiplicative resonance factor; complex Gaussian noise
    of scale ``noise_sigma`` per quadrature is added pointwise.
    """
    if kappa_ext <= 0:
        raise ConfigError("kappa_ext must be positive")
    if kappa_bg < 0 or noise_sigma < 0:
        raise ConfigError("kappa_bg and noise_sigma must be non-negative")
    f_lo, f_hi = f_window
    if not (line.f_min <= f_lo < f_hi <= line.f_cutoff):
        raise ConfigError("f_window must lie inside [f_min, f_cutoff]")

    freqs = np.linspace(f_lo, f_hi, n_points)
    f_modes, kappa_int, _ = mode_parameters(line, junction, flux, kappa_bg, pe=pe)
    near = (f_modes > f_lo - line.delta) & (f_modes < f_hi + line.delta)
    s11 = np.ones(n_points, dtype=complex)
    overlap = False
    f_sel = f_modes[near]
    k_sel = kappa_int[near]
    for i, (fm, ki) in enumerate(zip(f_sel, k_sel)):
        s11 *= s11_model(freqs, fm, kappa_ext, ki)
        if i > 0 and (f_sel[i] - f_sel[i - 1]) < 3.0 * (kappa_ext + ki):
            overlap = True
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        s11 = s11 + noise_sigma * (
            rng.standard_normal(n_points) + 1j * rng.standard_normal(n_points)
        )
    trace = S11Trace(
        flux=flux, frequencies=freqs, s11=s11, noise_sigma=noise_sigma,
        device_id=device_id, overlap_flag=overlap,
    )
    trace.validate()
    return trace


@dataclass(frozen=True)
class ModeFit:
    """Fit result for one resonance dip."""

    f0: float
    kappa_ext: float
    kappa_int: float
    residual: float
    accepted: bool
    message: str = ""


@dataclass(frozen=True)
class FitReport:
    flux: FluxPoint
    modes: tuple[ModeFit, ...]
    noise_sigma: float

    def accepted_modes(self) -> tuple[ModeFit, ...]:
        return tuple(m for m in self.modes if m.accepted)

    def to_json(self) -> str:
        return json.dumps(
            {
                "flux_ratio": self.flux.phi_ratio,
                "noise_sigma": self.noise_sigma,
                "modes": [
                    {
                        "f0_GHz": m.f0 / 1e9,
                        "kappa_ext_MHz": m.kappa_ext / 1e6,
                        "kappa_int_MHz": m.kappa_int / 1e6,
                        "residual": m.residual,
                        "accepted": m.accepted,
                        "message": m.message,
                    }
                    for m in self.modes
                ],
            },
            indent=2,
            sort_keys=True,
        )


def _fit_single_window(
    f: np.ndarray, data: np.ndarray, noise_sigma: float
) -> ModeFit:
    depth = 1.0 - np.abs(data).min()
    noise_floor = max(noise_sigma, 1e-7)
    if depth < 5.0 * noise_floor:
        return ModeFit(
            f0=float("nan"), kappa_ext=0.0, kappa_int=0.0, residual=float("inf"),
            accepted=False, message="no mode: trace flat within the noise floor",
        )
    i_min = int(np.argmin(np.abs(data)))
    f0_guess = float(f[i_min])
    half = 1.0 - depth / 2.0
    below = np.abs(data) <= half
    k_tot_guess = max(
        float(f[below].max() - f[below].min()) if below.any() else (f[1] - f[0]) * 3,
        (f[1] - f[0]),
    )
    k_ext_guess = 0.5 * depth * k_tot_guess
    k_int_guess = max(k_tot_guess - k_ext_guess, 0.05 * k_tot_guess)

    def residual(p):
        f0, kext, kint, re_a, im_a = p
        model = (re_a + 1j * im_a) * s11_model(f, f0, kext, kint)
        r = model - data
        return np.concatenate([r.real, r.imag])

    p0 = [f0_guess, k_ext_guess, k_int_guess, 1.0, 0.0]
    span = float(f[-1] - f[0])
    res = least_squares(
        residual,
        p0,
        bounds=([f[0], 0.0, 0.0, -2.0, -2.0], [f[-1], span, span, 2.0, 2.0]),
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=4000,
    )
    rms = float(np.sqrt(np.mean(res.fun**2)))
    accepted = res.success and rms <= 5.0 * noise_floor
    message = "" if accepted else f"residual {rms:.3g} above 5x noise floor"
    return ModeFit(
        f0=float(res.x[0]),
        kappa_ext=float(res.x[1]),
        kappa_int=float(res.x[2]),
        residual=rms,
        accepted=accepted,
        message=message,
    )


def fit_modes(
    trace: S11Trace,
    guesses=None,
    window: float | None = None,
) -> FitReport:
    """Complex least-squares fit of every resonance dip in the trace.

    ``guesses`` are mode-frequency seeds (Hz), typically the baseline
    ladder; without them dips are located from local minima of |S11|.  A
    fit is rejected when its residual norm exceeds five times the noise
    floor, or when the window contains no dip.
    """
    f = trace.frequencies
    if guesses is None:
        mag = np.abs(trace.s11)
        thresh = 1.0 - max(5.0 * trace.noise_sigma, 0.02)
        idx = [
            i
            for i in range(1, len(f) - 1)
            if mag[i] < thresh and mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]
        ]
        guesses = []
        for i in idx:
            if not guesses or f[i] - guesses[-1] > 0.05 * (f[-1] - f[0]):
                guesses.append(float(f[i]))
    guesses = sorted(float(g) for g in guesses)
    if not guesses:
        return FitReport(
            flux=trace.flux,
            modes=(
                ModeFit(
                    f0=float("nan"), kappa_ext=0.0, kappa_int=0.0,
                    residual=float("inf"), accepted=False,
                    message="no mode: no dip found in the window",
                ),
            ),
            noise_sigma=trace.noise_sigma,
        )
    if window is None:
        if len(guesses) > 1:
            window = 0.4 * min(np.diff(guesses))
        else:
            window = 0.45 * (f[-1] - f[0])
    fits = []
    for g in guesses:
        sel = (f >= g - window) & (f <= g + window)
        if sel.sum() < 12:
            fits.append(
                ModeFit(
                    f0=g, kappa_ext=0.0, kappa_int=0.0, residual=float("inf"),
                    accepted=False, message="window contains too few points",
                )
            )
            continue
        fits.append(_fit_single_window(f[sel], trace.s11[sel], trace.noise_sigma))
    return FitReport(flux=trace.flux, modes=tuple(fits), noise_sigma=trace.noise_sigma)


@dataclass(frozen=True)
class ObservablePoint:
    """Extracted observables for one mode, baseline-referenced."""

    f_baseline: float        # Hz, mode frequency at the half-integer flux
    delta_over_pi: float
    gamma_in: float          # Hz
    delta_over_pi_per_area2: float | None = None
    gamma_in_per_area2: float | None = None   # Hz / um^4


def extract_observables(
    report_integer: FitReport,
    report_half: FitReport,
    delta: float,
    area_um2: float | None = None,
) -> list[ObservablePoint]:
    """Pair modes across the two flux points and form the observables.

    Matching is nearest-frequency with a half-spacing guard; a count
    mismatch between the accepted mode lists is an error, mirroring the
    experiment where every baseline mode must be tracked.
    """
    base = report_half.accepted_modes()
    shifted = report_integer.accepted_modes()
    if len(base) != len(shifted):
        raise ConfigError(
            f"unmatched mode count: {len(shifted)} at integer vs {len(base)} at half flux"
        )
    out = []
    used: set[int] = set()
    for b in base:
        dists = [
            (abs(s.f0 - b.f0), j) for j, s in enumerate(shifted) if j not in used
        ]
        dist, j = min(dists)
        if dist > delta / 2.0:
            raise ConfigError(
                f"mode at {b.f0/1e9:.4f} GHz moved farther than half a spacing; "
                "tracking lost"
            )
        used.add(j)
        s = shifted[j]
        d_pi = (s.f0 - b.f0) / delta
        g_in = s.kappa_int - b.kappa_int
        out.append(
            ObservablePoint(
                f_baseline=b.f0,
                delta_over_pi=d_pi,
                gamma_in=g_in,
                delta_over_pi_per_area2=(d_pi / area_um2**2 if area_um2 else None),
                gamma_in_per_area2=(g_in / area_um2**2 if area_um2 else None),
            )
        )
    return out
