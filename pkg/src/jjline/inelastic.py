"""Golden-rule inelastic down-conversion rates and derived observables.

A photon in mode n is destroyed by the junction nonlinearity and its
energy re-emitted as several lower-frequency photons.  To lowest order in
E_J the extra linewidth of mode n is

    gamma_n = c0 (2 pi)^2 (E_J/2)^2 lambda_n^2 P(h f_n) h,

with P the environment energy-exchange density and c0 the order-unity
prefactor calibrated once against the exact truncated-Fock-space rate
(see ``jjline.fock``).  With the ohmic zero-T P(E) this gives
gamma_n ~ f_n^(2 (alpha - 1)): decreasing on the superconducting side,
increasing on the insulating side, and frequency-independent at the
transition, where the junction mimics an ideal resistor.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import renormalize_ej
from .circuit import JunctionSpec, LineSpec, ModeSet
from .constants import CONSTANTS, RATE_PREFACTOR
from .errors import ConfigError, NumericsError, OutOfRegimeError
from .pe import PEFunction

PERTURBATIVE_EJ_FRACTION = 0.3

FLAG_BELOW_CROSSOVER = "below_crossover"
FLAG_CLIPPED = "p_clipped"


@dataclass(frozen=True)
class ScatteringResult:
    """Per-mode inelastic rates with provenance.

    ``p_inelastic`` is gamma_in / Delta, the down-conversion probability per
    free spectral range; values above 1 signal perturbation-theory
    breakdown and are clipped with a flag rather than silently.
    """

    frequencies: np.ndarray
    gamma_in: np.ndarray               # Hz
    gamma_over_delta: np.ndarray
    p_inelastic: np.ndarray
    flags: tuple[tuple[str, ...], ...]
    alpha: float
    ej: float
    ec: float
    T: float
    delta: float = field(default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("f_GHz,gamma_in_MHz,gamma_over_Delta,flags\n")
        for f, g, gd, fl in zip(
            self.frequencies, self.gamma_in, self.gamma_over_delta, self.flags
        ):
            buf.write(f"{f/1e9!r},{g/1e6!r},{gd!r},{'|'.join(fl)}\n")
        return buf.getvalue()


def _check_inputs(line: LineSpec, ej: float, pe: PEFunction) -> None:
    if ej < 0:
        raise ConfigError("E_J must be non-negative")
    if ej > PERTURBATIVE_EJ_FRACTION * line.f_cutoff:
        raise OutOfRegimeError(
            f"E_J = {ej:.4g} Hz beyond the perturbative bound "
            f"{PERTURBATIVE_EJ_FRACTION} * f_cutoff"
        )
    if not math.isclose(pe.alpha, line.alpha(), rel_tol=1e-9):
        raise ConfigError(
            f"P(E) built for alpha = {pe.alpha:.6g}, line has {line.alpha():.6g}"
        )
    if not math.isclose(pe.T, line.T, rel_tol=1e-9, abs_tol=1e-12):
        raise ConfigError(f"P(E) built for T = {pe.T} K, line has {line.T} K")


def inelastic_rate(
    modes: ModeSet, junction: JunctionSpec, ej: float, pe: PEFunction, n: int
) -> float:
    """Down-conversion linewidth gamma_in of mode index n (Hz)."""
    pos = np.nonzero(modes.indices == n)[0]
    if len(pos) != 1:
        raise ConfigError(f"mode index {n} not in the mode set")
    _check_inputs(modes.line, ej, pe)
    i = pos[0]
    lam_sq = modes.couplings[i] ** 2
    p_val = float(pe(CONSTANTS.h * modes.frequencies[i]))
    return (
        RATE_PREFACTOR
        * (2.0 * math.pi) ** 2
        * (ej / 2.0) ** 2
        * lam_sq
        * p_val
        * CONSTANTS.h
    )


def rate_curve(
    modes: ModeSet, junction: JunctionSpec, ej: float, pe: PEFunction
) -> ScatteringResult:
    """Inelastic rates for every mode in the set."""
    _check_inputs(modes.line, ej, pe)
    line = modes.line
    lam_sq = modes.couplings**2
    p_vals = pe(CONSTANTS.h * modes.frequencies)
    gamma = (
        RATE_PREFACTOR
        * (2.0 * math.pi) ** 2
        * (ej / 2.0) ** 2
        * lam_sq
        * p_vals
        * CONSTANTS.h
    )
    gd = gamma / line.delta
    p_in = np.clip(gd, 0.0, 1.0)
    ej_star = renormalize_ej(line, junction, ej) if ej <= line.f_cutoff else 0.0
    flags = []
    for f, g in zip(modes.frequencies, gd):
        fl = []
        if f < ej_star:
            fl.append(FLAG_BELOW_CROSSOVER)
        if g > 1.0:
            fl.append(FLAG_CLIPPED)
        flags.append(tuple(fl))
    return ScatteringResult(
        frequencies=modes.frequencies.copy(),
        gamma_in=gamma,
        gamma_over_delta=gd,
        p_inelastic=p_in,
        flags=tuple(flags),
        alpha=line.alpha(),
        ej=ej,
        ec=junction.ec,
        T=line.T,
        delta=line.delta,
    )


def scaling_exponent(
    result: ScatteringResult, f_lo: float, f_hi: float
) -> tuple[float, float]:
    """Log-log slope of gamma_in over [f_lo, f_hi] with its standard error.

    Ordinary least squares on log gamma vs log f; at zero temperature the
    slope equals 2 (alpha - 1).
    """
    mask = (result.frequencies >= f_lo) & (result.frequencies <= f_hi)
    if mask.sum() < 8:
        raise ConfigError(
            f"need at least 8 modes in [{f_lo:.4g}, {f_hi:.4g}] Hz, have {int(mask.sum())}"
        )
    g = result.gamma_in[mask]
    if np.any(g <= 0):
        raise NumericsError("non-positive rates in the fit window")
    x = np.log(result.frequencies[mask])
    y = np.log(g)
    n = len(x)
    xm = x - x.mean()
    slope = float(np.dot(xm, y) / np.dot(xm, xm))
    resid = y - y.mean() - slope * xm
    dof = max(n - 2, 1)
    stderr = float(np.sqrt(np.dot(resid, resid) / dof / np.dot(xm, xm)))
    return slope, stderr


@dataclass(frozen=True)
class CriticalResistance:
    """Effective resistance at the transition with a validity marker."""

    r_eff: float          # ohm
    in_validity: bool     # E_J/E_C <= 0.3
    message: str = ""


def critical_resistance(junction: JunctionSpec, ej: float) -> CriticalResistance:
    """Ideal-resistor value R_Q (E_C/E_J)^2 seen by photons at alpha = 1.

    Valid for E_J << E_C; outside E_J/E_C <= 0.3 the result carries an
    out-of-validity warning instead of raising.
    """
    if ej <= 0:
        raise ConfigError("E_J must be positive for the critical resistance")
    ratio = ej / junction.ec
    r_eff = CONSTANTS.R_Q * (junction.ec / ej) ** 2
    if ratio > 0.3:
        return CriticalResistance(
            r_eff=r_eff, in_validity=False,
            message=f"E_J/E_C = {ratio:.3g} > 0.3: formula out of validity",
        )
    return CriticalResistance(r_eff=r_eff, in_validity=True)


def plateau_resistance(result: ScatteringResult, z: float) -> float:
    """Series resistance equivalent to the critical down-conversion plateau.

    A resistor R >> Z terminating the line absorbs a fraction 4 Z / R of
    each incident photon per encounter.  A linewidth gamma_in (Hz) costs a
    photon the fraction q = 2 pi gamma_in / Delta per round trip (energy
    decay rate 2 pi gamma over the round-trip time 1/Delta), so the
    equivalent resistance is R = 4 Z / q = 2 Z Delta / (pi gamma_in).
    """
    p = np.median(result.gamma_over_delta)
    if p <= 0:
        raise NumericsError("no inelastic plateau to convert")
    return 4.0 * z / (2.0 * math.pi * float(p))
