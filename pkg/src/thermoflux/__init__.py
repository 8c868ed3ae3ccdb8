"""Single-shot work statistics for diagonal states in contact with a heat bath.

Exact rational arithmetic when ``beta = ln(r)``, binary64 otherwise.
"""
from .core import (
    Battery,
    BathModel,
    DiagonalState,
    EnergySpectrum,
    ThermalContext,
    bath_degeneracy,
    make_thermal_context,
)
from .divergence import (
    d0,
    d0_smooth_fractional,
    d0_smooth_integral,
    d0_smooth_suffix,
    d0_textbook,
    smooth,
)
from .errors import (
    InfeasibleError,
    NonPhysicalStateError,
    ResourceLimitError,
    SpectrumMismatchError,
    ThermofluxError,
)
from .exact import ExactEnergy, ExactLog
from .majorization import beta_order, majorization_curve, thermo_majorizes
from .process import (
    build_transition_currents,
    deterministic_work,
    epsilon_work_bound,
    fluctuation_ratio,
    forward_distribution,
    forward_probability,
    reverse_probability,
    thermal_work_content,
    w_delta,
)

__version__ = "0.1.0"

__all__ = [
    "Battery",
    "BathModel",
    "DiagonalState",
    "EnergySpectrum",
    "ExactEnergy",
    "ExactLog",
    "InfeasibleError",
    "NonPhysicalStateError",
    "ResourceLimitError",
    "SpectrumMismatchError",
    "ThermalContext",
    "ThermofluxError",
    "bath_degeneracy",
    "beta_order",
    "build_transition_currents",
    "d0",
    "d0_smooth_fractional",
    "d0_smooth_integral",
    "d0_smooth_suffix",
    "d0_textbook",
    "deterministic_work",
    "epsilon_work_bound",
    "fluctuation_ratio",
    "forward_distribution",
    "forward_probability",
    "make_thermal_context",
    "majorization_curve",
    "reverse_probability",
    "smooth",
    "thermal_work_content",
    "thermo_majorizes",
    "w_delta",
]
