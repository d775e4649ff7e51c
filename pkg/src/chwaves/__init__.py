"""Traveling waves and conservative Lagrangian solutions of the Camassa-Holm equation."""
from .errors import CHWavesError
from .profiles import (GOLDEN, ProfileTable, TravelingWaveParams, build_profile, cuspon_half_period,
                       derive_params)
from .helmholtz import EulerianState, Measure, p_closed_form, p_convolution, state_from_profile
from .lagrangian import LagrangianState, identity_labeling, to_eulerian, to_lagrangian
from .evolution import SimConfig, compute_pq, q_time_derivative, qt_closed_form_plateau, simulate
from .analysis import DiagnosticsReport, characteristics_compare, conservation_jump, energy

__version__ = "0.1.0"

__all__ = [
    "CHWavesError", "GOLDEN", "ProfileTable", "TravelingWaveParams", "build_profile",
    "cuspon_half_period", "derive_params", "EulerianState", "Measure", "p_closed_form",
    "p_convolution", "state_from_profile", "LagrangianState", "identity_labeling", "to_eulerian",
    "to_lagrangian", "SimConfig", "compute_pq", "q_time_derivative", "qt_closed_form_plateau",
    "simulate", "DiagnosticsReport", "characteristics_compare", "conservation_jump", "energy",
]
