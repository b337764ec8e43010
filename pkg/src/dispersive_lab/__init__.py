"""Well-posedness types of linear Schrodinger-type equations of order 2m on the torus.

Coefficient recursions and classification, exact per-mode evolution,
spectral states and energies, and numerical checks of the energy estimates.
"""
from .coefficients import (
    CheckReport,
    Classification,
    CoefficientTable,
    EquationSpec,
    Kind,
    classify,
    coefficient_table,
)
from .errors import DegenerateBeta, DispersiveLabError, InvalidConfig, ModeOverflow
from .estimates import EstimateReport, estimate_report, smoothing_rate_scan
from .evolution import eigen_exponents, evolve_mode, ModePair, propagator
from .state import SpectralState, energy_E, evolve_state, select_N

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "Classification",
    "CoefficientTable",
    "EquationSpec",
    "Kind",
    "classify",
    "coefficient_table",
    "DegenerateBeta",
    "DispersiveLabError",
    "InvalidConfig",
    "ModeOverflow",
    "EstimateReport",
    "estimate_report",
    "smoothing_rate_scan",
    "eigen_exponents",
    "evolve_mode",
    "ModePair",
    "propagator",
    "SpectralState",
    "energy_E",
    "evolve_state",
    "select_N",
]
