"""Circuit description: transmission line, junction, flux map, mode ladder.

The finite high-impedance line is characterized entirely by its wave
impedance Z, free spectral range Delta, and a frequency band
[f_min, f_cutoff].  The line's standing-wave modes discretize the ohmic
environment seen by the terminating junction; each retained mode carries a
coupling lambda_n to the junction phase with

    lambda_n^2 = 2 (Z/R_Q) * Delta / f_n,

the unique normalization for which the discrete phase-fluctuation variance
sum(lambda_n^2) reproduces the continuum ohmic result
2 (Z/R_Q) ln(f_cutoff/f_min) as Delta -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CONSTANTS
from .errors import ConfigError

ALPHA_MAX = 10.0

# E_J per junction area, GHz / um^2, typical of the fabrication process.
DEFAULT_AREA_SCALE_GHZ_UM2 = 124.0

# Relative tolerance for the E_J_max vs area * scale consistency check.
AREA_CONSISTENCY_RTOL = 0.25


@dataclass(frozen=True)
class LineSpec:
    """Finite transmission line section acting as the ohmic environment.

    Parameters
    ----------
    Z : float
        Wave impedance (ohm).
    delta : float
        Free spectral range of the standing-wave modes (Hz).
    f_min : float
        Lowest retained mode frequency (Hz).
    f_cutoff : float
        High-frequency cutoff (Hz), physically ~ 1 / (2 pi Z C_J).
    T : float
        Temperature (K).
    """

    Z: float
    delta: float
    f_min: float
    f_cutoff: float
    T: float = 0.0

    def __post_init__(self) -> None:
        if not (self.Z > 0):
            raise ConfigError(f"wave impedance must be positive, got {self.Z}")
        if not (self.delta > 0):
            raise ConfigError(f"free spectral range must be positive, got {self.delta}")
        if not (0 < self.f_min < self.f_cutoff):
            raise ConfigError(
                f"need 0 < f_min < f_cutoff, got f_min={self.f_min}, f_cutoff={self.f_cutoff}"
            )
        if not (self.T >= 0):
            raise ConfigError(f"temperature must be non-negative, got {self.T}")
        a = self.alpha()
        if not (0 < a < ALPHA_MAX):
            raise ConfigError(f"Z/R_Q = {a:.4g} outside the supported range (0, {ALPHA_MAX})")

    def alpha(self) -> float:
        """Dimensionless dissipation strength Z / R_Q."""
        return self.Z / CONSTANTS.R_Q


@dataclass(frozen=True)
class JunctionSpec:
    """Small junction (SQUID) terminating the line.

    Energies are stored as frequencies (E/h, in Hz).  The self-capacitance
    is derived from the charging energy, C_J = e^2 / (2 h E_C).
    """

    ej_max: float                  # maximal Josephson energy, Hz
    ec: float                      # charging energy e^2/2C_J, Hz
    area_um2: float | None = None  # junction area, um^2
    area_scale_ghz_um2: float = DEFAULT_AREA_SCALE_GHZ_UM2
    cj: float = field(init=False)  # junction self-capacitance, F

    def __post_init__(self) -> None:
        if not (self.ec > 0):
            raise ConfigError(f"charging energy must be positive, got {self.ec}")
        if not (self.ej_max >= 0):
            raise ConfigError(f"Josephson energy must be non-negative, got {self.ej_max}")
        object.__setattr__(
            self, "cj", CONSTANTS.e**2 / (2.0 * CONSTANTS.h * self.ec)
        )
        if self.area_um2 is not None:
            expected = self.area_scale_ghz_um2 * self.area_um2 * 1e9
            if expected > 0 and not math.isclose(
                self.ej_max, expected, rel_tol=AREA_CONSISTENCY_RTOL
            ):
                raise ConfigError(
                    f"ej_max = {self.ej_max:.4g} Hz inconsistent with "
                    f"area_scale * area = {expected:.4g} Hz"
                )


@dataclass(frozen=True)
class FluxPoint:
    """External flux through the SQUID loop in units of the flux quantum."""

    phi_ratio: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi_ratio):
            raise ConfigError("flux ratio must be finite")


@dataclass(frozen=True)
class ModeSet:
    """Baseline standing-wave ladder with junction couplings.

    ``frequencies[i] = indices[i] * line.delta`` and the couplings obey the
    ModeSet sum rule (see module docstring).
    """

    line: LineSpec
    indices: np.ndarray      # integer mode numbers n
    frequencies: np.ndarray  # f_n = n * delta, Hz
    couplings: np.ndarray    # lambda_n, dimensionless

    def __len__(self) -> int:
        return len(self.frequencies)

    def coupling_sum_sq(self) -> float:
        """sum(lambda_n^2), the discrete phase-fluctuation variance."""
        return float(np.sum(self.couplings**2))


def flux_map(junction: JunctionSpec, flux: FluxPoint) -> float:
    """Josephson energy of a symmetric SQUID at the given flux.

    E_J(Phi) = ej_max * |cos(pi Phi/Phi_0)|; periodic with period 1 in
    phi_ratio and vanishing at half-integer flux, which eliminates the
    junction and defines the measurement baseline.
    """
    return junction.ej_max * abs(math.cos(math.pi * flux.phi_ratio))


def build_modes(line: LineSpec) -> ModeSet:
    """Construct the baseline mode ladder f_n = n * delta within the band.

    The junction end is treated as open at E_J = 0; static offsets of the
    ladder cancel in all baseline-referenced observables.
    """
    n_lo = math.ceil(line.f_min / line.delta - 1e-9)
    n_hi = math.floor(line.f_cutoff / line.delta + 1e-9)
    if n_hi < n_lo:
        raise ConfigError(
            "empty mode set: no multiple of delta inside "
            f"[{line.f_min:.4g}, {line.f_cutoff:.4g}] Hz"
        )
    indices = np.arange(max(n_lo, 1), n_hi + 1)
    freqs = indices * line.delta
    lam_sq = 2.0 * line.alpha() * line.delta / freqs
    return ModeSet(
        line=line,
        indices=indices,
        frequencies=freqs,
        couplings=np.sqrt(lam_sq),
    )


# Device configuration files are plain "key = value" text with '#' comments.
_CONFIG_KEYS = {
    "Z_ohm",
    "Delta_GHz",
    "EJ_max_GHz",
    "EC_GHz",
    "area_um2",
    "T_K",
    "f_cutoff_GHz",
    "f_min_GHz",
}


def parse_device_config(text: str) -> dict[str, float]:
    """Parse device-config text into a key -> float mapping.

    Unknown keys are rejected so that typos fail loudly.
    """
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = stripped.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {val.strip()!r}") from exc
    return values


def device_from_config(values: dict[str, float]) -> tuple[LineSpec, JunctionSpec]:
    """Build (LineSpec, JunctionSpec) from parsed config values.

    ``EJ_max_GHz`` may be omitted when ``area_um2`` is given, in which case
    E_J is filled from the per-area scale.  The cutoff defaults to the
    RC-type value 1/(2 pi Z C_J); a user-supplied cutoff can only lower it.
    """
    missing = {"Z_ohm", "Delta_GHz", "EC_GHz"} - set(values)
    if missing:
        raise ConfigError(f"missing required config keys: {sorted(missing)}")
    if "EJ_max_GHz" not in values and "area_um2" not in values:
        raise ConfigError("config must provide EJ_max_GHz or area_um2")

    ec = values["EC_GHz"] * 1e9
    area = values.get("area_um2")
    if "EJ_max_GHz" in values:
        ej_max = values["EJ_max_GHz"] * 1e9
    else:
        ej_max = DEFAULT_AREA_SCALE_GHZ_UM2 * area * 1e9
    junction = JunctionSpec(ej_max=ej_max, ec=ec, area_um2=area)

    z = values["Z_ohm"]
    delta = values["Delta_GHz"] * 1e9
    f_cutoff_physical = 1.0 / (2.0 * math.pi * z * junction.cj)
    f_cutoff = f_cutoff_physical
    if "f_cutoff_GHz" in values:
        f_cutoff = min(values["f_cutoff_GHz"] * 1e9, f_cutoff_physical)
    f_min = values.get("f_min_GHz", values["Delta_GHz"]) * 1e9
    line = LineSpec(Z=z, delta=delta, f_min=f_min, f_cutoff=f_cutoff, T=values.get("T_K", 0.0))
    return line, junction


def load_device_config(path) -> tuple[LineSpec, JunctionSpec]:
    """Read and validate a device-config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return device_from_config(parse_device_config(fh.read()))
