"""Energy-exchange probability density P(E) of the ohmic environment.

P(E) dE is the probability that a photon scattering event deposits energy
in [E, E+dE] into the environment.  For an ohmic line with dissipation
strength alpha = Z/R_Q at zero temperature the density is a pure power law
up to the circuit cutoff E_c:

    P(E) = (2 alpha / E_c) (E / E_c)^(2 alpha - 1),   0 < E <= E_c,

normalized exactly on (0, E_c].  This sharp closed form is the kernel
behind the f^(2(alpha-1)) scaling of the inelastic rate.

At finite temperature the density acquires detailed balance,
P(-E) = exp(-E/k_B T) P(E), and thermal smearing at |E| ~ k_B T.  The
finite-T constructor here convolves the zero-T density (with a softened
cutoff edge) against a zero-mean Gaussian kernel of sub-thermal width and
then enforces detailed balance exactly by Boltzmann-mirroring the
negative side.  The kernel width k_B T / 2 is chosen so that the
zero-temperature spectral shape is preserved for E >~ 3 k_B T while the
sub-thermal observables (flattening of the power law below k_B T,
Boltzmann-weighted absorption side) are retained.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .errors import ConfigError, NumericsError

# Steepness of the soft high-energy edge used on the finite-T path; the
# zero-T path keeps the sharp cutoff for analytic transparency.
EDGE_POWER = 32

NORMALIZATION_TOL = 1e-6
DETAILED_BALANCE_TOL = 1e-4

_MAX_GRID = 1 << 19


@dataclass(frozen=True)
class PEFunction:
    """Tabulated P(E) with provenance.

    Attributes
    ----------
    alpha : float
        Dissipation strength Z/R_Q the table was built for.
    T : float
        Temperature (K); 0 for the zero-temperature closed form.
    energies : np.ndarray
        Energy grid (J), strictly increasing.  Spans [0, E_max] at T = 0
        and a symmetric [-E_max, +E_max] at T > 0.
    values : np.ndarray
        Density P(E) (1/J), non-negative.
    E_cutoff : float
        Circuit cutoff energy hbar * omega_c (J).
    cutoff_form : str
        "sharp" for the zero-T closed form, "soft_edge" for the finite-T
        construction.
    """

    alpha: float
    T: float
    energies: np.ndarray
    values: np.ndarray
    E_cutoff: float
    cutoff_form: str

    def __call__(self, energy) -> np.ndarray:
        """Linear interpolation on the stored grid; no extrapolation."""
        e = np.asarray(energy, dtype=float)
        if np.any(e < self.energies[0]) or np.any(e > self.energies[-1]):
            raise NumericsError(
                "energy outside the tabulated P(E) grid; extrapolation refused"
            )
        return np.interp(e, self.energies, self.values)

    def norm(self) -> float:
        """Trapezoidal integral of the stored table."""
        return float(np.trapezoid(self.values, self.energies))

    def first_moment(self) -> float:
        """Trapezoidal mean energy of the stored table (J)."""
        return float(np.trapezoid(self.values * self.energies, self.energies))

    def validate(self) -> None:
        """Assert the type invariants: positivity, normalization, balance."""
        if np.any(self.values < 0):
            raise NumericsError("P(E) has negative entries")
        if np.any(np.diff(self.energies) <= 0):
            raise NumericsError("P(E) grid is not strictly increasing")
        err = abs(self.norm() - 1.0)
        if err > NORMALIZATION_TOL:
            raise NumericsError(f"P(E) normalization off by {err:.3g}")
        if self.T > 0:
            self._check_detailed_balance()

    def _check_detailed_balance(self) -> None:
        kt = CONSTANTS.k_B * self.T
        e = self.energies
        # symmetric grid: node at -E is the mirror of the node at +E
        center = int(np.argmin(np.abs(e)))
        n_side = min(center, len(e) - 1 - center)
        pos = slice(center + 1, center + 1 + n_side)
        stop = center - 1 - n_side
        neg = slice(center - 1, None if stop < 0 else stop, -1)
        e_pos = e[pos]
        mask = e_pos <= 10.0 * kt
        lhs = self.values[neg][mask]
        rhs = np.exp(-e_pos[mask] / kt) * self.values[pos][mask]
        scale = np.maximum(np.abs(rhs), 1e-300)
        worst = float(np.max(np.abs(lhs - rhs) / scale)) if mask.any() else 0.0
        if worst > DETAILED_BALANCE_TOL:
            raise NumericsError(f"detailed balance violated at {worst:.3g} relative")

    def to_csv(self) -> str:
        """Serialize as CSV with columns E_over_Ec, P_times_Ec."""
        buf = io.StringIO()
        buf.write(f"# alpha = {self.alpha!r}\n")
        buf.write(f"# T_K = {self.T!r}\n")
        buf.write(f"# E_cutoff_J = {self.E_cutoff!r}\n")
        buf.write(f"# cutoff_form = {self.cutoff_form}\n")
        buf.write("E_over_Ec,P_times_Ec\n")
        for e, p in zip(self.energies / self.E_cutoff, self.values * self.E_cutoff):
            buf.write(f"{e!r},{p!r}\n")
        return buf.getvalue()


def pe_from_csv(text: str) -> PEFunction:
    """Inverse of PEFunction.to_csv."""
    meta: dict[str, str] = {}
    rows: list[tuple[float, float]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
        elif not line.startswith("E_over_Ec"):
            a, _, b = line.partition(",")
            rows.append((float(a), float(b)))
    try:
        alpha = float(meta["alpha"])
        temp = float(meta["T_K"])
        e_c = float(meta["E_cutoff_J"])
        form = meta["cutoff_form"]
    except KeyError as exc:
        raise ConfigError(f"P(E) CSV header missing {exc}") from exc
    arr = np.array(rows)
    return PEFunction(
        alpha=alpha, T=temp, energies=arr[:, 0] * e_c, values=arr[:, 1] / e_c,
        E_cutoff=e_c, cutoff_form=form,
    )


def _zero_t_grid(alpha: float, e_cutoff: float, grid_size: int) -> np.ndarray:
    """Log-spaced grid dense enough for 1e-6 trapezoidal normalization.

    The lower edge is placed so the analytically missing mass below it,
    (E_lo/E_c)^(2 alpha), is below 1e-7; the log step is sized from the
    trapezoid curvature error of the power law.
    """
    p = 2.0 * alpha - 1.0
    x_lo = min(10.0 ** (-7.0 / (2.0 * alpha)), 1e-3)
    if x_lo < 1e-290:
        raise NumericsError(
            f"alpha = {alpha:.3g} too small: grid cannot resolve the E -> 0 singularity"
        )
    span = -math.log(x_lo)
    curv = max(abs(p * (p - 1.0)), 1e-2)
    h = math.sqrt(12.0 * 2e-7 / curv)
    n = max(int(math.ceil(span / h)) + 1, grid_size, 256)
    if n > _MAX_GRID:
        raise NumericsError(
            f"alpha = {alpha:.3g} needs {n} grid points (> {_MAX_GRID}); resolution failure"
        )
    return np.geomspace(x_lo * e_cutoff, e_cutoff, n)


def pe_zero_T(alpha: float, e_cutoff: float, grid_size: int = 4096) -> PEFunction:
    """Zero-temperature sharp-cutoff closed form.

    P(E) = (2 alpha / E_c) (E/E_c)^(2 alpha - 1) on (0, E_c], zero
    elsewhere; exactly normalized by construction.
    """
    if alpha <= 0 or e_cutoff <= 0:
        raise ConfigError("alpha and E_cutoff must be positive")
    if grid_size < 256:
        raise ConfigError("grid_size must be at least 256")
    if alpha <= 0.01:
        raise NumericsError(
            f"alpha = {alpha:.3g} <= 0.01: integrable singularity unresolvable on a finite grid"
        )
    grid = _zero_t_grid(alpha, e_cutoff, grid_size)
    vals = (2.0 * alpha / e_cutoff) * (grid / e_cutoff) ** (2.0 * alpha - 1.0)
    energies = np.concatenate(([0.0], grid))
    values = np.concatenate(([0.0], vals))
    pe = PEFunction(
        alpha=alpha, T=0.0, energies=energies, values=values,
        E_cutoff=e_cutoff, cutoff_form="sharp",
    )
    pe.validate()
    return pe


def soft_edge(x) -> np.ndarray:
    """Steep rational rolloff 1/(1 + x^m) softening the cutoff edge."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + x**EDGE_POWER)


def soft_edge_norm(alpha: float) -> float:
    """Analytic integral of 2a x^(2a-1) / (1 + x^m) over x > 0.

    Evaluates to 2a (pi/m) / sin(2a pi / m); this is the total mass of the
    soft-edged power law before renormalization.
    """
    m = float(EDGE_POWER)
    s = 2.0 * alpha
    if s >= m:
        raise NumericsError("soft edge too shallow for this alpha")
    return s * (math.pi / m) / math.sin(math.pi * s / m)


def soft_edge_mean(alpha: float) -> float:
    """Analytic mean of the normalized soft-edged power law, in units of E_c."""
    m = float(EDGE_POWER)
    s = 2.0 * alpha
    num = (s + 1.0) * (math.pi / m) / math.sin(math.pi * (s + 1.0) / m)
    return num / soft_edge_norm(alpha) * s / (s + 1.0)


def thermal_kernel_width(T: float) -> float:
    """Sub-thermal smearing width (J) used by the finite-T construction."""
    return 0.5 * CONSTANTS.k_B * T


def pe_finite_T(
    alpha: float, e_cutoff: float, T: float, grid_size: int = 4096
) -> PEFunction:
    """Finite-temperature P(E) with exact detailed balance.

    Construction: the zero-T power law with a softened cutoff edge is
    convolved against a zero-mean Gaussian kernel of width
    sigma = k_B T / 2, after which the negative-energy side is replaced by
    the exact mirror exp(-|E|/k_B T) P(|E|) and the table renormalized.
    The kernel mean must vanish so the power law is reproduced without an
    energy offset; the emission/absorption asymmetry is carried entirely
    by the mirror step.  The result is normalized to 1e-15, satisfies
    detailed balance identically, reduces to the zero-T closed form for
    E >> k_B T, and keeps the soft cutoff suppression near E_c.
    """
    if T <= 0:
        raise ConfigError("pe_finite_T requires T > 0; use pe_zero_T at T = 0")
    if alpha <= 0 or e_cutoff <= 0:
        raise ConfigError("alpha and E_cutoff must be positive")
    if grid_size < 256:
        raise ConfigError("grid_size must be at least 256")

    kt = CONSTANTS.k_B * T
    sigma = thermal_kernel_width(T)

    # Symmetric grid containing E = 0 exactly; fine enough to resolve both
    # the kernel and the power law, wide enough for the soft tail.
    de = min(sigma / 6.0, e_cutoff / 3000.0)
    e_max = 1.5 * e_cutoff + 16.0 * kt
    n_half = int(math.ceil(e_max / de))
    if 2 * n_half + 1 > _MAX_GRID:
        raise NumericsError(
            "finite-T grid exceeds the size cap; temperature too small relative "
            "to the cutoff for the requested resolution"
        )
    n_half = max(n_half, grid_size // 2)
    idx = np.arange(-n_half, n_half + 1)
    energies = idx * de

    # Zero-T density with soft edge, cell-averaged near E = 0 so that the
    # integrable singularity at alpha < 1/2 carries its exact mass.
    norm0 = soft_edge_norm(alpha)
    x = energies / e_cutoff
    with np.errstate(invalid="ignore"):
        p0 = np.where(
            x > 0,
            (2.0 * alpha / e_cutoff) * np.abs(x) ** (2.0 * alpha - 1.0) * soft_edge(x),
            0.0,
        ) / norm0
    s = 2.0 * alpha
    for j in range(n_half, min(n_half + 6, len(energies))):
        lo = max(energies[j] - de / 2.0, 0.0) / e_cutoff
        hi = (energies[j] + de / 2.0) / e_cutoff
        p0[j] = (hi**s - lo**s) / (de / e_cutoff) / e_cutoff / norm0

    # Zero-mean Gaussian smearing kernel sampled on the same spacing.
    m_k = int(math.ceil(8.0 * sigma / de))
    y = np.arange(-m_k, m_k + 1) * de
    kernel = np.exp(-(y**2) / (2.0 * sigma**2))
    kernel /= kernel.sum() * de

    smeared = np.convolve(p0, kernel, mode="same") * de
    smeared = np.clip(smeared, 0.0, None)

    # Exact detailed-balance completion: mirror the positive side down.
    values = smeared.copy()
    pos = smeared[n_half + 1 :]
    with np.errstate(under="ignore"):
        values[:n_half] = (np.exp(energies[n_half + 1 :] * (-1.0 / kt)) * pos)[::-1]
    total = np.trapezoid(values, energies)
    values /= total

    pe = PEFunction(
        alpha=alpha, T=T, energies=energies, values=values,
        E_cutoff=e_cutoff, cutoff_form="soft_edge",
    )
    pe.validate()
    return pe
