"""Multimode squeezed thermal states of light in lossy coupled cavities.

The state of M lossy quasimodes pumped by a classical field stays a
multimode squeezed thermal state, described by 3M real parameters whose
equations of motion are integrated here and checked against brute-force
oracles.
"""

from .model import CouplingSpec, PumpModel, QuasimodeSet, pump_amplitude_squared, validate
from .takagi import SchmidtBasis, schmidt_basis, squeezing_matrix_z, takagi_factorize
from .dynamics import MstsState, Trajectory, derived_rates, initial_conditions, integrate, rhs, trace_residual
from .observables import (
    QuadratureSpec,
    SecondMoments,
    correlation_variance,
    optimize_angles,
    photon_numbers,
    physicality,
    second_moments,
)

__version__ = "0.1.0"

__all__ = [
    "CouplingSpec",
    "PumpModel",
    "QuasimodeSet",
    "pump_amplitude_squared",
    "validate",
    "SchmidtBasis",
    "schmidt_basis",
    "squeezing_matrix_z",
    "takagi_factorize",
    "MstsState",
    "Trajectory",
    "derived_rates",
    "initial_conditions",
    "integrate",
    "rhs",
    "trace_residual",
    "QuadratureSpec",
    "SecondMoments",
    "correlation_variance",
    "optimize_angles",
    "photon_numbers",
    "physicality",
    "second_moments",
]
