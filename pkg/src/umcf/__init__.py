"""Spectral phase-field solver for non-oriented mean curvature flow.

The order parameter ``u`` lives in ``[0, 1/4]`` and concentrates on the
interface as the bump ``-q'(d/eps)``; it is advanced by a semi-implicit
Fourier scheme with a projection onto ``u <= 1/4``.
"""
from .grid import Grid, forward, inverse, rforward, rinverse, set_threads, get_threads
from .potential import CF, F, F_prime, F_second, profile_minus_qprime, profile_q
from .spectral_ops import LinearSolveSymbol, build_symbol, apply_solve, laplacian
from .model import (DivergenceError, EnergyBreakdown, ModelParams, ObstacleViolation,
                    Stepper, discrepancy, energy, eul, g_operator, step)
from .geometry import distance_field, initial_condition
from .diagnostics import DiagnosticsRecord, exact_radius_law, make_record
from .solver import ListSink, RunPlan, RunState, Sink, run

__version__ = "0.1.0"

__all__ = [
    "Grid", "forward", "inverse", "rforward", "rinverse", "set_threads", "get_threads",
    "CF", "F", "F_prime", "F_second", "profile_minus_qprime", "profile_q",
    "LinearSolveSymbol", "build_symbol", "apply_solve", "laplacian",
    "DivergenceError", "EnergyBreakdown", "ModelParams", "ObstacleViolation", "Stepper",
    "discrepancy", "energy", "eul", "g_operator", "step",
    "distance_field", "initial_condition",
    "DiagnosticsRecord", "exact_radius_law", "make_record",
    "ListSink", "RunPlan", "RunState", "Sink", "run",
]
