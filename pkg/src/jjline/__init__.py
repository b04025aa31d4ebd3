"""Scattering workbench for a Josephson junction terminating a finite
high-impedance transmission line.

The environment's standing-wave photons probe the junction directly: the
elastic phase shift distinguishes inductive (superconducting) from
capacitive (insulating) response, and the inelastic down-conversion rate,
frequency independent at the critical impedance, marks the transition.
"""

from .boundary import (
    PhaseShiftCurve,
    RenormalizedJunction,
    bloch_capacitance,
    bloch_capacitance_reference,
    boundary_phase_shift,
    phase_shift_curve,
    renormalize_ej,
    renormalized_junction,
    second_order_phase_shift,
)
from .circuit import (
    FluxPoint,
    JunctionSpec,
    LineSpec,
    ModeSet,
    build_modes,
    device_from_config,
    flux_map,
    load_device_config,
    parse_device_config,
)
from .constants import CONSTANTS, RATE_PREFACTOR, PhysicalConstants
from .errors import ConfigError, JJLineError, NumericsError, OutOfRegimeError
from .fock import (
    GoldenRuleResult,
    TruncatedSystem,
    calibrate_rate_prefactor,
    golden_rule_exact,
    ladder_system,
)
from .inelastic import (
    CriticalResistance,
    ScatteringResult,
    critical_resistance,
    inelastic_rate,
    plateau_resistance,
    rate_curve,
    scaling_exponent,
)
from .pe import PEFunction, pe_finite_T, pe_from_csv, pe_zero_T
from .spectroscopy import (
    FitReport,
    ModeFit,
    ObservablePoint,
    S11Trace,
    extract_observables,
    fit_modes,
    s11_model,
    synthesize_s11,
    trace_from_csv,
)
from .sweep import SweepSpec, reproduce, run_sweep, run_table_sweep

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "ConfigError",
    "CriticalResistance",
    "FitReport",
    "FluxPoint",
    "GoldenRuleResult",
    "JJLineError",
    "JunctionSpec",
    "LineSpec",
    "ModeFit",
    "ModeSet",
    "NumericsError",
    "ObservablePoint",
    "OutOfRegimeError",
    "PEFunction",
    "PhaseShiftCurve",
    "PhysicalConstants",
    "RATE_PREFACTOR",
    "RenormalizedJunction",
    "S11Trace",
    "ScatteringResult",
    "SweepSpec",
    "TruncatedSystem",
    "bloch_capacitance",
    "bloch_capacitance_reference",
    "boundary_phase_shift",
    "build_modes",
    "calibrate_rate_prefactor",
    "critical_resistance",
    "device_from_config",
    "extract_observables",
    "fit_modes",
    "flux_map",
    "golden_rule_exact",
    "inelastic_rate",
    "ladder_system",
    "load_device_config",
    "parse_device_config",
    "pe_finite_T",
    "pe_from_csv",
    "pe_zero_T",
    "phase_shift_curve",
    "plateau_resistance",
    "rate_curve",
    "renormalize_ej",
    "renormalized_junction",
    "reproduce",
    "run_sweep",
    "run_table_sweep",
    "s11_model",
    "scaling_exponent",
    "second_order_phase_shift",
    "synthesize_s11",
    "trace_from_csv",
]
