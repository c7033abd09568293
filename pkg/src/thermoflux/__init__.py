"""thermoflux: simulator and analysis toolkit for three non-isothermal
fluid models (ideal gas, porous media, generalized porous media) on a
periodic lattice, with numerical verification of their extremum principles,
temperature positivity, and weight-function structure.
"""
from .analysis import (IdealGasExponents, PMBranchParams, ThresholdResult,
                       WeightTable, find_thresholds, gamma_exponents,
                       gtilde_ideal_signs, gtilde_pm, psi_branches,
                       weight_function)
from .diagnostics import (DiagnosticsMonitor, DiagnosticsRecord,
                          entropy_production, record)
from .grid import (PeriodicGrid, ScalarField, div_a_grad_b, gradient,
                   laplacian, read_snapshot, total, write_snapshot)
from .kernels import BACKEND
from .solver import SimState, SolverConfig, rhs, run, stable_dt, step
from .thermo import (Conductivity, ModelParams, ThermoPoint, darcy_velocity,
                     eval_thermo)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Conductivity", "DiagnosticsMonitor", "DiagnosticsRecord",
    "IdealGasExponents", "ModelParams", "PMBranchParams", "PeriodicGrid",
    "ScalarField", "SimState", "SolverConfig", "ThermoPoint",
    "ThresholdResult", "WeightTable", "darcy_velocity", "div_a_grad_b",
    "entropy_production", "eval_thermo", "find_thresholds",
    "gamma_exponents", "gradient", "gtilde_ideal_signs", "gtilde_pm",
    "laplacian", "psi_branches", "read_snapshot", "record", "rhs", "run",
    "stable_dt", "step", "total", "weight_function", "write_snapshot",
]
