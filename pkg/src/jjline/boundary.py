"""Effective linear boundary of the junction and elastic phase shifts.

Away from the critical impedance the junction terminates the line as a
linear reactance: a renormalized inductance on the superconducting side
(alpha < 1) and a quasicharge-band capacitance on the insulating side
(alpha > 1).  The elastic scattering phase delta follows from the
reflection coefficient r = (Z_T - Z)/(Z_T + Z) = exp(2 i delta).

Two routes to delta(f) are provided:

* ``boundary_phase_shift``: the nonperturbative linear-boundary formula,
  valid on either side of the transition but not at it.
* ``second_order_phase_shift``: lowest order in E_J^2.  The dissipative
  response is the golden-rule down-conversion rate; its reactive partner
  follows from a principal-value Kramers-Kronig transform, so the sign of
  delta flips automatically as alpha crosses 1.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .circuit import JunctionSpec, LineSpec
from .constants import CONSTANTS, RATE_PREFACTOR
from .errors import ConfigError, NumericsError, OutOfRegimeError
from .pe import PEFunction, pe_finite_T, pe_zero_T

CRITICAL_ALPHA_TOL = 1e-2

SIDE_SUPERCONDUCTING = "superconducting"
SIDE_INSULATING = "insulating"
SIDE_CRITICAL = "critical"


def renormalize_ej(line: LineSpec, junction: JunctionSpec, ej: float) -> float:
    """Quantum-fluctuation-renormalized Josephson energy (Hz).

    One-loop boundary flow with the order-unity prefactor set to 1:
    E_J* = f_c (E_J/f_c)^(1/(1-alpha)) for alpha < 1.  The scale collapses
    to zero for alpha >= 1, where phase fluctuations destroy the Josephson
    coupling at low energy.
    """
    if ej < 0:
        raise ConfigError("E_J must be non-negative")
    if ej == 0.0:
        return 0.0
    if ej > line.f_cutoff:
        raise OutOfRegimeError(
            f"E_J = {ej:.4g} Hz above the cutoff {line.f_cutoff:.4g} Hz; flow invalid"
        )
    alpha = line.alpha()
    if alpha >= 1.0:
        return 0.0
    return line.f_cutoff * (ej / line.f_cutoff) ** (1.0 / (1.0 - alpha))


def classify_side(alpha: float, tol: float = CRITICAL_ALPHA_TOL) -> str:
    if abs(alpha - 1.0) < tol:
        return SIDE_CRITICAL
    return SIDE_SUPERCONDUCTING if alpha < 1.0 else SIDE_INSULATING


@dataclass(frozen=True)
class RenormalizedJunction:
    """Linear-boundary parameters of the junction at a working point."""

    ej_star: float   # renormalized Josephson energy, Hz (0 for alpha >= 1)
    l_star: float    # effective inductance, H (inf when ej_star = 0)
    c_star: float    # quasicharge-band capacitance, F
    side: str


def renormalized_junction(
    line: LineSpec,
    junction: JunctionSpec,
    ej: float,
    use_renormalized: bool = True,
    charge_cutoff: int = 35,
    critical_tol: float = CRITICAL_ALPHA_TOL,
) -> RenormalizedJunction:
    """Assemble the effective boundary for a given working-point E_J.

    ``use_renormalized=False`` keeps the bare E_J in the inductive branch
    (for comparing against the renormalized choice); the insulating side
    always has ej_star = 0.
    """
    alpha = line.alpha()
    side = classify_side(alpha, critical_tol)
    ej_star = renormalize_ej(line, junction, ej)
    if not use_renormalized and alpha < 1.0:
        ej_star = ej
    if ej_star > 0:
        l_star = (CONSTANTS.Phi_0 / (2.0 * math.pi)) ** 2 / (CONSTANTS.h * ej_star)
    else:
        l_star = math.inf
    c_star = bloch_capacitance(junction, ej, charge_cutoff=charge_cutoff)
    return RenormalizedJunction(ej_star=ej_star, l_star=l_star, c_star=c_star, side=side)


def _ground_energy(ec: float, ej: float, ng: float, m_cut: int) -> float:
    """Lowest eigenvalue (Hz) of the charge-basis junction Hamiltonian.

    Diagonal 4 E_C (m - ng)^2 on m in [-M, M], off-diagonal -E_J/2.
    """
    m = np.arange(-m_cut, m_cut + 1, dtype=float)
    diag = 4.0 * ec * (m - ng) ** 2
    if ej == 0.0:
        return float(diag.min())
    off = np.full(2 * m_cut, -ej / 2.0)
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0]
    return float(vals[0])


def _band_curvature_fd(ec: float, ej: float, m_cut: int) -> float:
    """d^2 E_0 / d ng^2 at ng = 0 by even-symmetry finite differences.

    Richardson extrapolation over halved steps; the convergence test
    includes the float64 eigenvalue noise floor, which dominates once the
    band is exponentially flat (large E_J/E_C).
    """
    e0 = _ground_energy(ec, ej, 0.0, m_cut)
    norm_h = 4.0 * ec * m_cut**2 + ej
    h0 = 0.2
    levels = 7
    tableau: list[list[float]] = []
    prev_best = None
    for i in range(levels):
        h = h0 / 2.0**i
        d = 2.0 * (_ground_energy(ec, ej, h, m_cut) - e0) / h**2
        row = [d]
        for j in range(1, i + 1):
            fac = 4.0**j
            row.append((fac * row[j - 1] - tableau[i - 1][j - 1]) / (fac - 1.0))
        tableau.append(row)
        best = row[-1]
        if prev_best is not None:
            noise_floor = 64.0 * np.finfo(float).eps * norm_h / h**2
            if abs(best - prev_best) <= max(1e-8 * abs(best), noise_floor):
                return best
        prev_best = best
    return tableau[-1][-1]


def _band_curvature_hf(ec: float, ej: float, m_cut: int) -> float:
    """Curvature by the exact sum-over-states (Hellmann-Feynman) formula.

    Independent cross-check route: d^2 E_0/d ng^2 = 8 E_C +
    2 sum_k |<k| 8 E_C m |0>|^2 / (E_0 - E_k), evaluated from a full
    diagonalization.
    """
    m = np.arange(-m_cut, m_cut + 1, dtype=float)
    diag = 4.0 * ec * m**2
    off = np.full(2 * m_cut, -ej / 2.0)
    vals, vecs = eigh_tridiagonal(diag, off)
    g = vecs[:, 0]
    matel = (vecs[:, 1:].T * m) @ g * 8.0 * ec
    return 8.0 * ec + 2.0 * float(np.sum(matel**2 / (vals[0] - vals[1:])))


def _converged_curvature(ec: float, ej: float, m_cut: int, routine) -> float:
    """Raise the charge cutoff until the curvature stabilizes."""
    cur = routine(ec, ej, m_cut)
    while True:
        m_cut += 5
        nxt = routine(ec, ej, m_cut)
        noise = 512.0 * np.finfo(float).eps * (4.0 * ec * m_cut**2 + ej)
        if abs(nxt - cur) <= max(1e-8 * abs(nxt), noise):
            return nxt
        cur = nxt
        if m_cut > 200:
            raise NumericsError(
                f"band curvature not converged in charge cutoff (E_J/E_C = {ej/ec:.3g})"
            )


def bloch_capacitance(
    junction: JunctionSpec, ej: float, charge_cutoff: int = 35
) -> float:
    """Effective capacitance (F) from the lowest quasicharge band.

    C* = (2e)^2 / (h d^2 E_0/d ng^2).  Equals C_J exactly at E_J = 0 and
    grows with E_J as the band flattens.
    """
    if charge_cutoff < 10:
        raise ConfigError("charge_cutoff must be at least 10")
    if ej < 0:
        raise ConfigError("E_J must be non-negative")
    if ej == 0.0:
        # decoupled charge states: E_0 = 4 E_C ng^2, curvature exactly 8 E_C
        return (2.0 * CONSTANTS.e) ** 2 / (8.0 * CONSTANTS.h * junction.ec)
    curv = _converged_curvature(junction.ec, ej, charge_cutoff, _band_curvature_fd)
    if curv <= 0:
        raise NumericsError("non-positive band curvature")
    return (2.0 * CONSTANTS.e) ** 2 / (CONSTANTS.h * curv)


def bloch_capacitance_reference(
    junction: JunctionSpec, ej: float, charge_cutoff: int = 70
) -> float:
    """Independent C* evaluation (sum-over-states at doubled cutoff)."""
    if ej == 0.0:
        return (2.0 * CONSTANTS.e) ** 2 / (8.0 * CONSTANTS.h * junction.ec)
    curv = _converged_curvature(junction.ec, ej, charge_cutoff, _band_curvature_hf)
    return (2.0 * CONSTANTS.e) ** 2 / (CONSTANTS.h * curv)


@dataclass(frozen=True)
class PhaseShiftCurve:
    """Elastic phase shift delta(f) with the method that produced it."""

    frequencies: np.ndarray  # Hz
    delta: np.ndarray        # rad, |delta| <= pi/2
    method: str              # "boundary_impedance" or "second_order_KK"

    @property
    def delta_over_pi(self) -> np.ndarray:
        return self.delta / math.pi

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("f_GHz,delta_over_pi,method\n")
        for f, d in zip(self.frequencies, self.delta):
            buf.write(f"{f/1e9!r},{d/math.pi!r},{self.method}\n")
        return buf.getvalue()


def boundary_phase_shift(line: LineSpec, rj: RenormalizedJunction, f) -> np.ndarray:
    """Phase shift of the linear boundary at frequency f (rad).

    Inductive termination: delta = pi/2 - arctan(2 pi f L*/Z), approaching
    pi/2 (short circuit) at zero frequency.  Capacitive termination:
    delta = -arctan(2 pi f C* Z), approaching 0 (open circuit).  Refuses
    the critical side, where no linear boundary exists.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ConfigError("frequency must be positive")
    if rj.side == SIDE_CRITICAL:
        raise NumericsError(
            "no linear boundary at the critical point; use the inelastic channel"
        )
    if rj.side == SIDE_SUPERCONDUCTING:
        with np.errstate(over="ignore"):
            return math.pi / 2.0 - np.arctan(2.0 * math.pi * f * rj.l_star / line.Z)
    return -np.arctan(2.0 * math.pi * f * rj.c_star * line.Z)


def phase_shift_curve(
    line: LineSpec, rj: RenormalizedJunction, frequencies
) -> PhaseShiftCurve:
    f = np.asarray(frequencies, dtype=float)
    return PhaseShiftCurve(
        frequencies=f, delta=boundary_phase_shift(line, rj, f), method="boundary_impedance"
    )


def _loss_angle(
    line: LineSpec, ej: float, pe: PEFunction, f: np.ndarray
) -> np.ndarray:
    """Per-bounce dissipative angle eta(f) of the weak junction boundary.

    |r| = exp(-2 eta); eta = pi gamma_in / (2 Delta) is independent of the
    free spectral range because gamma_in itself carries one factor of
    Delta through the mode coupling.
    """
    alpha = line.alpha()
    return (
        RATE_PREFACTOR
        * math.pi
        * (2.0 * math.pi) ** 2
        * (ej / 2.0) ** 2
        * alpha
        * CONSTANTS.h
        * pe(CONSTANTS.h * f)
        / f
    )


def second_order_phase_shift(
    line: LineSpec,
    junction: JunctionSpec,
    ej: float,
    frequencies,
    pe: PEFunction | None = None,
    n_quad: int = 4096,
) -> PhaseShiftCurve:
    """Perturbative phase shift from the Kramers-Kronig partner of the loss.

    The junction's dissipative response (down-conversion) fixes the
    imaginary part of the boundary admittance; the reactive part follows
    from the principal-value transform

        delta(f) = -(2 f / pi) PV int_band eta(f') / (f'^2 - f^2) df'

    over the physical band [f_min, f_cutoff].  The band edges are real
    spectral boundaries of the finite line, not numerical truncations, so
    no out-of-band tail is added.  The result is exactly quadratic in E_J.
    """
    f_eval = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if ej < 0:
        raise ConfigError("E_J must be non-negative")
    if ej > 0.3 * line.f_cutoff:
        raise OutOfRegimeError(
            f"E_J = {ej:.4g} Hz beyond the perturbative bound 0.3 f_cutoff"
        )
    lo, hi = line.f_min, line.f_cutoff
    if np.any(f_eval < lo) or np.any(f_eval > hi):
        raise ConfigError("requested frequencies outside [f_min, f_cutoff]")
    if ej == 0.0:
        return PhaseShiftCurve(
            frequencies=f_eval, delta=np.zeros_like(f_eval), method="second_order_KK"
        )
    if pe is None:
        e_c = CONSTANTS.h * line.f_cutoff
        pe = pe_zero_T(line.alpha(), e_c) if line.T == 0 else pe_finite_T(
            line.alpha(), e_c, line.T
        )

    edge_pad = (hi / lo) ** (2.0 / n_quad)
    if np.any(f_eval < lo * edge_pad) or np.any(f_eval > hi / edge_pad):
        raise NumericsError(
            "evaluation frequency too close to the band edge for the PV transform"
        )
    fq = np.geomspace(lo, hi, n_quad)
    eta_q = _loss_angle(line, ej, pe, fq)

    delta = np.empty_like(f_eval)
    for i, f0 in enumerate(f_eval):
        eta0 = float(_loss_angle(line, ej, pe, np.array([f0]))[0])
        denom = fq**2 - f0**2
        integrand = np.where(
            np.abs(denom) > 1e-12 * f0**2, (eta_q - eta0) / denom, 0.0
        )
        # analytic fill of the removed singular node: d eta/df / (2 f)
        sing = np.abs(denom) <= 1e-12 * f0**2
        if sing.any():
            df = f0 * 1e-5
            deta = (
                float(_loss_angle(line, ej, pe, np.array([f0 + df]))[0])
                - float(_loss_angle(line, ej, pe, np.array([f0 - df]))[0])
            ) / (2.0 * df)
            integrand[sing] = deta / (2.0 * f0)
        regular = np.trapezoid(integrand, fq)
        pv_core = (1.0 / (2.0 * f0)) * math.log(
            ((hi - f0) * (f0 + lo)) / ((hi + f0) * (f0 - lo))
        )
        delta[i] = -(2.0 * f0 / math.pi) * (regular + eta0 * pv_core)

    if np.any(np.abs(delta) > math.pi / 2.0):
        raise OutOfRegimeError("perturbative phase shift exceeded pi/2; E_J too large")
    return PhaseShiftCurve(frequencies=f_eval, delta=delta, method="second_order_KK")
